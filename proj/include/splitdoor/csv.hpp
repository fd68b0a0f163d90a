#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitdoor::csv {

/// One parsed record and the 1-based line on which it started.
struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC-4180 reader: quoted fields may hold commas, doubled quotes and line
/// breaks. Accepts both LF and CRLF record terminators.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. Throws DataError on an
    /// unterminated quoted field.
    std::optional<Record> next();

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

std::string quote(std::string_view field);

/// Writes one record, quoting fields that need it, terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Strict numeric parsing: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace splitdoor::csv
