#include "splitdoor/csv.hpp"

#include "splitdoor/error.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace splitdoor::csv {

std::optional<Record> Reader::next()
{
    Record rec;
    rec.line = line_;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    bool field_was_quoted = false;

    for (;;) {
        const int ci = in_.get();
        if (ci == std::char_traits<char>::eof()) {
            if (in_quotes) {
                throw DataError("line " + std::to_string(rec.line) + ": unterminated quoted field");
            }
            if (!any) return std::nullopt;
            rec.fields.push_back(std::move(field));
            return rec;
        }
        const char c = static_cast<char>(ci);
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field.empty() && !field_was_quoted) {
                in_quotes = true;
                field_was_quoted = true;
            } else {
                field.push_back(c);
            }
            break;
        case ',':
            rec.fields.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
            break;
        case '\r':
            if (in_.peek() == '\n') break;
            field.push_back(c);
            break;
        case '\n':
            ++line_;
            rec.fields.push_back(std::move(field));
            return rec;
        default:
            field.push_back(c);
        }
    }
}

std::string quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(std::string_view s)
{
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace splitdoor::csv
