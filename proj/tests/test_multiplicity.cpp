#include "splitdoor/error.hpp"
#include "splitdoor/multiplicity.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace splitdoor;

TEST_CASE("fixed-lambda share of independent tests")
{
    const std::vector<double> p{0.1, 0.2, 0.6, 0.9};
    CHECK(storey_pi_indep(p, 0.5) == doctest::Approx(1.0));
    CHECK(storey_pi_indep(p, 0.0) == doctest::Approx(1.0));
    CHECK(storey_pi_indep(std::vector<double>{0.1, 0.2, 0.3, 0.9}, 0.5) == doctest::Approx(0.5));
    CHECK(storey_pi_indep(p, 0.8) == 1.0);  // 1.25 clamped
    CHECK_THROWS_AS(storey_pi_indep({}, 0.5), ArgumentError);
    CHECK_THROWS_AS(storey_pi_indep(p, 1.0), ArgumentError);
}

TEST_CASE("histogram closes the last bin")
{
    const auto h = pvalue_histogram(std::vector<double>{0.0, 0.24, 0.25, 0.99, 1.0}, 4);
    CHECK(h == std::vector<std::size_t>{2, 1, 0, 2});
}

TEST_CASE("adaptive lambda picks the first bin not above the mean to its right")
{
    // counts per quarter: 5, 3, 1, 1
    const std::vector<double> p{0.01, 0.02, 0.03, 0.04, 0.05, 0.3, 0.4, 0.45, 0.6, 0.9};
    const auto e = nettleton_pi_indep(p, 4);
    CHECK(e.bin == 3);
    CHECK(e.lambda == doctest::Approx(0.5));
    CHECK(e.pi_indep == doctest::Approx(0.4));

    // strictly decreasing counts never qualify before the last bin
    const std::vector<double> q{0.1, 0.1, 0.1, 0.1, 0.3, 0.3, 0.3, 0.6, 0.6, 0.9};
    const auto f = nettleton_pi_indep(q, 4);
    CHECK(f.bin == 4);
    CHECK(f.lambda == doctest::Approx(0.75));

    // uniform p-values: the first bin already qualifies, lambda = 0
    std::vector<double> u;
    for (int i = 0; i < 100; ++i) u.push_back((i + 0.5) / 100.0);
    CHECK(nettleton_pi_indep(u, 20).bin == 1);
    CHECK(nettleton_pi_indep(u, 20).pi_indep == doctest::Approx(1.0));
}

TEST_CASE("false non-discovery bound")
{
    CHECK(fndr_bound(0.80, 0.187, 114469, 20000) == doctest::Approx(0.2 * 0.187 * 114469 / 20000.0));
    CHECK(fndr_bound(0.95, 0.5, 1000, 10) == doctest::Approx(2.5));
    CHECK(fndr_bound(0.95, 0.0, 1000, 10) == 0.0);
    CHECK_THROWS_AS(fndr_bound(0.95, 0.5, 1000, 0), DataError);
    CHECK_THROWS_AS(fndr_bound(1.0, 0.5, 1000, 10), ArgumentError);
    CHECK(phi_prime(0.2, 100, 50) == doctest::Approx(0.4));
}

TEST_CASE("interval on the four-value hand example")
{
    const std::vector<double> r{0.01, 0.02, 0.03, 0.10};
    const auto iv = effect_interval(r, 0.25, 2.58);
    const double sigma = std::sqrt(0.005 / 3.0);
    CHECK(iv.rho_hat == doctest::Approx(0.04));
    CHECK(iv.sigma_hat == doctest::Approx(sigma));
    CHECK(iv.rho_maxsum == doctest::Approx(0.10));
    CHECK(iv.lower == doctest::Approx(0.04 - 0.025 - 2.58 * sigma / 2.0));
    CHECK(iv.upper == doctest::Approx(0.04 + 2.58 * sigma / 2.0));

    const auto approx = effect_interval(r, 0.25, 2.58, MaxsumMethod::MeanApprox);
    CHECK(approx.rho_maxsum == doctest::Approx(0.04));
    CHECK(approx.lower > iv.lower);
    CHECK_THROWS_AS(effect_interval(r, 1.5), ArgumentError);
    CHECK_THROWS_AS(effect_interval({}, 0.5), DataError);
}

TEST_CASE("phi' N just above an integer does not add a term")
{
    const std::vector<double> r{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(rho_maxsum(r, 0.3, MaxsumMethod::TopKExact) == doctest::Approx(27.0));
    CHECK(rho_maxsum(r, 0.0, MaxsumMethod::TopKExact) == 0.0);
    CHECK(rho_maxsum(r, 1.0, MaxsumMethod::TopKExact) == doctest::Approx(55.0));
}

TEST_CASE("top-k maxsum dominates the mean approximation")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, 40);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<double> r(static_cast<std::size_t>(len(rng)));
        for (auto& v : r) v = u(rng);
        const double phi = u(rng);
        CHECK(rho_maxsum(r, phi, MaxsumMethod::TopKExact) >= rho_maxsum(r, phi, MaxsumMethod::MeanApprox) - 1e-12);
    }
}

TEST_CASE("multiplicity report uses the chosen estimator")
{
    const std::vector<double> p{0.01, 0.02, 0.03, 0.04, 0.05, 0.3, 0.4, 0.45, 0.6, 0.9};
    const auto a = assess_multiplicity(p, 0.5, 4, 2, PiEstimator::Nettleton, 4, 0.5);
    CHECK(a.pi_dep == doctest::Approx(0.6));
    CHECK(a.phi == doctest::Approx(0.5 * 0.6 * 10 / 4.0));
    CHECK(a.phi_prime == doctest::Approx(a.phi * 2.0));
    const auto b = assess_multiplicity(p, 0.5, 4, 2, PiEstimator::Storey, 4, 0.25);
    CHECK(b.pi_dep == doctest::Approx(1.0 - 5.0 / 7.5));
}
