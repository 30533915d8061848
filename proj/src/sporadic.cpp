#include "dspodfl/sporadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dspodfl/rng.hpp"

namespace dspodfl {

DistributionSpec DistributionSpec::beta(double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("beta distribution requires positive parameters");
    DistributionSpec s;
    s.kind = Kind::Beta;
    s.a = a;
    s.b = b;
    return s;
}

DistributionSpec DistributionSpec::fixed(std::vector<double> d, std::vector<double> b)
{
    DistributionSpec s;
    s.kind = Kind::Fixed;
    s.fixed_d = std::move(d);
    s.fixed_b = std::move(b);
    return s;
}

DistributionSpec DistributionSpec::fixed_constant(double d, double b)
{
    return fixed(std::vector<double>{d}, std::vector<double>{b});
}

double SporadicityProfile::d_min() const
{
    return *std::min_element(d.begin(), d.end());
}

double SporadicityProfile::d_max() const
{
    return *std::max_element(d.begin(), d.end());
}

namespace {

double clamp_probability(double v)
{
    return std::min(1.0, std::max(kProbabilityFloor, v));
}

// Marsaglia-Tsang gamma sampling driven by the keyed counter stream. Each
// rejection round consumes a fresh block of counters, so the draw stays a
// pure function of (seed, stream, entity).
double gamma_draw(double shape, uint64_t seed, rng::Stream stream, uint64_t entity,
                  uint64_t* counter)
{
    if (shape < 1.0) {
        const double u = rng::uniform01(seed, stream, 1, entity, (*counter)++);
        const double g = gamma_draw(shape + 1.0, seed, stream, entity, counter);
        return g * std::pow(std::max(u, 1e-300), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (int round = 0; round < 1000; ++round) {
        const double z = rng::gaussian(seed, stream, 2, entity, (*counter)++);
        const double v = std::pow(1.0 + c * z, 3.0);
        if (v <= 0.0) continue;
        const double u = rng::uniform01(seed, stream, 3, entity, (*counter)++);
        if (std::log(std::max(u, 1e-300)) < 0.5 * z * z + d - d * v + d * std::log(v))
            return d * v;
    }
    return d;  // unreachable in practice
}

double beta_draw(double a, double b, uint64_t seed, rng::Stream stream, uint64_t entity)
{
    uint64_t counter = 0;
    const double x = gamma_draw(a, seed, stream, entity, &counter);
    const double y = gamma_draw(b, seed, stream, entity + 0x800000, &counter);
    if (x + y == 0.0) return 0.5;
    return x / (x + y);
}

double sample_one(const DistributionSpec& spec, uint64_t seed, rng::Stream stream,
                  uint64_t entity)
{
    switch (spec.kind) {
        case DistributionSpec::Kind::Uniform:
            return rng::uniform01(seed, stream, 0, entity);
        case DistributionSpec::Kind::Beta:
            return beta_draw(spec.a, spec.b, seed, stream, entity);
        case DistributionSpec::Kind::Fixed:
            return 0.0;  // handled by caller
    }
    return 0.0;
}

}  // namespace

SporadicityProfile sample_profile(const DistributionSpec& spec, const Topology& t,
                                  uint64_t seed, bool all_pairs)
{
    SporadicityProfile p;
    p.source = spec;
    p.seed = seed;
    p.pair_indexed = all_pairs;
    p.d.resize(t.m);
    const size_t n_links = all_pairs ? static_cast<size_t>(t.m) * (t.m - 1) / 2
                                     : t.edges.size();
    p.b.resize(n_links);

    if (spec.kind == DistributionSpec::Kind::Fixed) {
        if (spec.fixed_d.empty() || spec.fixed_b.empty())
            throw std::invalid_argument("fixed profile requires d and b values");
        for (int i = 0; i < t.m; ++i) {
            const double v = spec.fixed_d.size() == 1 ? spec.fixed_d[0]
                                                      : spec.fixed_d.at(i);
            p.d[i] = clamp_probability(v);
        }
        for (size_t e = 0; e < n_links; ++e) {
            const double v = spec.fixed_b.size() == 1 ? spec.fixed_b[0]
                                                      : spec.fixed_b.at(e);
            p.b[e] = clamp_probability(v);
        }
        return p;
    }

    for (int i = 0; i < t.m; ++i)
        p.d[i] = clamp_probability(sample_one(spec, seed, rng::Stream::ProfileD, i));
    for (size_t e = 0; e < n_links; ++e) {
        // key link draws by the canonical pair so the value is stable under
        // either layout
        const uint64_t entity = all_pairs ? e : pair_index(t.edges[e].first,
                                                           t.edges[e].second, t.m);
        p.b[e] = clamp_probability(sample_one(spec, seed, rng::Stream::ProfileB, entity));
    }
    return p;
}

double link_probability(const SporadicityProfile& profile, const Topology& t, size_t e)
{
    if (!profile.pair_indexed) return profile.b.at(e);
    return profile.b.at(pair_index(t.edges[e].first, t.edges[e].second, t.m));
}

LinkProbabilities aligned_link_probabilities(const SporadicityProfile& profile,
                                             const Topology& t)
{
    if (!profile.pair_indexed) return profile.b;
    LinkProbabilities b(t.edges.size());
    for (size_t e = 0; e < t.edges.size(); ++e) b[e] = link_probability(profile, t, e);
    return b;
}

IndicatorDraw draw_indicators(const SporadicityProfile& profile, const Topology& t,
                              uint64_t k, uint64_t run_seed)
{
    IndicatorDraw draw;
    draw.iteration = k;
    draw.v.resize(t.m);
    draw.v_hat.resize(t.edges.size());
    for (int i = 0; i < t.m; ++i)
        draw.v[i] = rng::bernoulli(profile.d[i], run_seed, rng::Stream::SgdIndicator, k, i);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        // one coin per undirected link, addressed by its canonical pair id
        const uint64_t pair = pair_index(t.edges[e].first, t.edges[e].second, t.m);
        draw.v_hat[e] = rng::bernoulli(link_probability(profile, t, e), run_seed,
                                       rng::Stream::LinkIndicator, k, pair);
    }
    return draw;
}

double diminishing_d(double alpha_k, double alpha0, double gamma3, bool* warned_zero)
{
    if (gamma3 < 0.0 || gamma3 > 1.0 / alpha0)
        throw std::invalid_argument("diminishing_d: gamma3 must lie in [0, 1/alpha0]");
    if (alpha_k > alpha0 * (1.0 + 1e-12))
        throw std::invalid_argument("diminishing_d: alpha_k exceeds alpha0");
    const double d = 1.0 - gamma3 * alpha_k;
    if (warned_zero) *warned_zero = d < kProbabilityFloor;
    return std::min(1.0, std::max(kProbabilityFloor, d));
}

std::vector<double> effective_d(const SporadicityProfile& profile, double alpha_k)
{
    if (profile.d_schedule == DSchedule::Constant) return profile.d;
    const double d = diminishing_d(alpha_k, profile.alpha0, profile.gamma3);
    return std::vector<double>(profile.d.size(), d);
}

nlohmann::json profile_to_json(const SporadicityProfile& p)
{
    nlohmann::json j;
    switch (p.source.kind) {
        case DistributionSpec::Kind::Uniform: j["distribution"] = "uniform"; break;
        case DistributionSpec::Kind::Beta:
            j["distribution"] = "beta";
            j["a"] = p.source.a;
            j["b_param"] = p.source.b;
            break;
        case DistributionSpec::Kind::Fixed: j["distribution"] = "fixed"; break;
    }
    j["seed"] = p.seed;
    j["d"] = p.d;
    j["b"] = p.b;
    j["d_schedule"] = p.d_schedule == DSchedule::Constant ? "constant" : "diminishing";
    if (p.d_schedule == DSchedule::Diminishing) {
        j["gamma3"] = p.gamma3;
        j["alpha0"] = p.alpha0;
    }
    return j;
}

}  // namespace dspodfl
