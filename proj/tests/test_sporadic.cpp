#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dspodfl/sporadic.hpp"
#include "dspodfl/rng.hpp"

using namespace dspodfl;

TEST_CASE("fixed all-ones profile is the full-participation (DGD) profile")
{
    const Topology t = regenerate_connected_rgg(6, 0.6, 4);
    const auto p = sample_profile(DistributionSpec::fixed_constant(1.0, 1.0), t, 9);
    CHECK(p.d_min() == 1.0);
    CHECK(p.d_max() == 1.0);
    for (double b : p.b) CHECK(b == 1.0);
    const IndicatorDraw draw = draw_indicators(p, t, 0, 123);
    for (uint8_t v : draw.v) CHECK(v == 1);
    for (uint8_t v : draw.v_hat) CHECK(v == 1);
}

TEST_CASE("beta profile: values in (0,1], reproducible")
{
    const Topology t = regenerate_connected_rgg(10, 0.5, 5);
    const auto spec = DistributionSpec::beta(0.5, 0.5);
    const auto a = sample_profile(spec, t, 42);
    const auto b = sample_profile(spec, t, 42);
    CHECK(a.d == b.d);
    CHECK(a.b == b.b);
    for (double v : a.d) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
    for (double v : a.b) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
    const auto c = sample_profile(spec, t, 43);
    CHECK(a.d != c.d);
}

TEST_CASE("beta parameters must be positive")
{
    CHECK_THROWS(DistributionSpec::beta(0.0, 0.5));
    CHECK_THROWS(DistributionSpec::beta(0.5, -1.0));
}

TEST_CASE("uniform sampling: empirical mean near 0.5")
{
    // one big topology so the profile carries many independent draws
    const Topology t = make_topology(2000, {{0, 1}});
    double sum = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto p = sample_profile(DistributionSpec::uniform(), t, 100 + rep);
        for (double v : p.d) sum += v;
    }
    const int n = 2000 * 50;
    const double mean = sum / n;
    CHECK(std::fabs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("beta(0.5, 0.5) sampling: empirical mean near 0.5")
{
    const Topology t = make_topology(2000, {{0, 1}});
    double sum = 0.0;
    int n = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = sample_profile(DistributionSpec::beta(0.5, 0.5), t, 55 + rep);
        for (double v : p.d) {
            sum += v;
            ++n;
        }
    }
    // Beta(1/2,1/2) has mean 1/2 and variance 1/8
    CHECK(std::fabs(sum / n - 0.5) < 3.0 * std::sqrt(0.125 / n));
}

TEST_CASE("bernoulli activation rate matches d within 3 sigma")
{
    const Topology t = regenerate_connected_rgg(4, 0.9, 6);
    auto spec = DistributionSpec::fixed_constant(0.3, 0.6);
    const auto p = sample_profile(spec, t, 0);
    const int draws = 100000;
    std::vector<int> v_count(t.m, 0);
    std::vector<int> e_count(t.edges.size(), 0);
    for (int k = 0; k < draws; ++k) {
        const IndicatorDraw d = draw_indicators(p, t, k, 77);
        for (int i = 0; i < t.m; ++i) v_count[i] += d.v[i];
        for (size_t e = 0; e < t.edges.size(); ++e) e_count[e] += d.v_hat[e];
    }
    for (int i = 0; i < t.m; ++i) {
        const double rate = static_cast<double>(v_count[i]) / draws;
        CHECK(std::fabs(rate - 0.3) < 3.0 * std::sqrt(0.3 * 0.7 / draws));
    }
    for (size_t e = 0; e < t.edges.size(); ++e) {
        const double rate = static_cast<double>(e_count[e]) / draws;
        CHECK(std::fabs(rate - 0.6) < 3.0 * std::sqrt(0.6 * 0.4 / draws));
    }
}

TEST_CASE("independence harness: pairwise covariance within 3 sigma of zero")
{
    const Topology t = regenerate_connected_rgg(5, 0.8, 8);
    const auto p = sample_profile(DistributionSpec::fixed_constant(0.5, 0.5), t, 0);
    const int draws = 100000;
    // covariance between client 0's SGD indicator and every other indicator
    double s0 = 0.0;
    std::vector<double> sv(t.m, 0.0), svv(t.m, 0.0);
    std::vector<double> se(t.edges.size(), 0.0), sev(t.edges.size(), 0.0);
    for (int k = 0; k < draws; ++k) {
        const IndicatorDraw d = draw_indicators(p, t, k, 31);
        s0 += d.v[0];
        for (int i = 0; i < t.m; ++i) {
            sv[i] += d.v[i];
            svv[i] += static_cast<double>(d.v[0]) * d.v[i];
        }
        for (size_t e = 0; e < t.edges.size(); ++e) {
            se[e] += d.v_hat[e];
            sev[e] += static_cast<double>(d.v[0]) * d.v_hat[e];
        }
    }
    const double m0 = s0 / draws;
    // sd of the product of two independent Bernoulli(1/2) is <= 1/2
    const double band = 3.0 * 0.3 / std::sqrt(static_cast<double>(draws));
    for (int i = 1; i < t.m; ++i)
        CHECK(std::fabs(svv[i] / draws - m0 * (sv[i] / draws)) < band);
    for (size_t e = 0; e < t.edges.size(); ++e)
        CHECK(std::fabs(sev[e] / draws - m0 * (se[e] / draws)) < band);
}

TEST_CASE("link draws are shared per undirected edge and re-materializable")
{
    const Topology t = regenerate_connected_rgg(7, 0.6, 13);
    const auto p = sample_profile(DistributionSpec::uniform(), t, 3);
    const IndicatorDraw a = draw_indicators(p, t, 41, 9);
    const IndicatorDraw b = draw_indicators(p, t, 41, 9);
    CHECK(a.v == b.v);
    CHECK(a.v_hat == b.v_hat);  // one coin per edge by construction, same address
}

TEST_CASE("diminishing d formula")
{
    bool warned = false;
    CHECK(diminishing_d(0.01, 0.01, 0.0, &warned) == 1.0);
    CHECK_FALSE(warned);

    // gamma3 = 1/alpha0 at k = 0: d = 0, clamped to the floor with a warning
    CHECK(diminishing_d(0.01, 0.01, 100.0, &warned) == kProbabilityFloor);
    CHECK(warned);

    // alpha_k = alpha0 / sqrt(1 + k/gamma) with gamma3 = 1/alpha0
    const double alpha0 = 0.05, gamma = 10.0;
    for (uint64_t k : {1ull, 10ull, 1000ull}) {
        const double alpha_k = alpha0 / std::sqrt(1.0 + k / gamma);
        const double expected = 1.0 - 1.0 / std::sqrt(1.0 + k / gamma);
        CHECK(diminishing_d(alpha_k, alpha0, 1.0 / alpha0)
              == doctest::Approx(expected).epsilon(1e-15));
    }

    CHECK_THROWS(diminishing_d(0.01, 0.01, 150.0));  // gamma3 > 1/alpha0
    CHECK_THROWS(diminishing_d(0.01, 0.01, -1.0));
    CHECK_THROWS(diminishing_d(0.02, 0.01, 1.0));    // alpha_k > alpha0
}

TEST_CASE("diminishing d is nondecreasing along a diminishing step schedule")
{
    const double alpha0 = 0.1, gamma = 5.0, gamma3 = 1.0 / alpha0;
    double prev = -1.0;
    for (uint64_t k = 0; k < 5000; ++k) {
        const double alpha_k = alpha0 / std::sqrt(1.0 + k / gamma);
        const double d = diminishing_d(alpha_k, alpha0, gamma3);
        CHECK(d >= prev);
        prev = d;
    }
    CHECK(prev > 0.96);  // limit 1 as alpha_k -> 0
}
