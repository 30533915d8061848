#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspodfl/graph.hpp"
#include "dspodfl/mixing.hpp"

namespace dspodfl {

// Probabilities are clamped away from zero at this floor: the delay formulas
// divide by d_i and b_ij, and the model requires values in (0, 1].
constexpr double kProbabilityFloor = 1e-6;

struct DistributionSpec {
    enum class Kind { Uniform, Beta, Fixed };
    Kind kind = Kind::Uniform;
    double a = 1.0, b = 1.0;            // Beta parameters
    std::vector<double> fixed_d;        // Fixed: per client (or one value for all)
    std::vector<double> fixed_b;        // Fixed: per edge (or one value for all)

    static DistributionSpec uniform() { return {}; }
    static DistributionSpec beta(double a, double b);
    static DistributionSpec fixed(std::vector<double> d, std::vector<double> b);
    static DistributionSpec fixed_constant(double d, double b);
};

enum class DSchedule { Constant, Diminishing };

// Per-client SGD probabilities d_i and per-edge aggregation probabilities
// b_ij, plus how d evolves over iterations. Immutable once sampled.
//
// For a static topology, b aligns with the base edge list. When the topology
// is regenerated per iteration, b is sampled for every unordered pair so any
// realized edge has a probability; pair_indexed marks that layout.
struct SporadicityProfile {
    std::vector<double> d;      // size m
    LinkProbabilities b;        // per base edge, or per pair when pair_indexed
    bool pair_indexed = false;
    DSchedule d_schedule = DSchedule::Constant;
    double gamma3 = 0.0;        // coupling constant of the diminishing schedule
    double alpha0 = 0.0;        // initial step size the schedule refers to
    DistributionSpec source;
    uint64_t seed = 0;

    double d_min() const;
    double d_max() const;
};

// canonical index of the unordered pair (i, j), i < j, over m clients
inline size_t pair_index(int i, int j, int m)
{
    if (i > j) std::swap(i, j);
    return static_cast<size_t>(i) * m - static_cast<size_t>(i) * (i + 1) / 2
           + static_cast<size_t>(j - i - 1);
}

// aggregation probability of edge e of topology t under either layout
double link_probability(const SporadicityProfile& profile, const Topology& t, size_t e);

// b values aligned with topology t's edge list (for mixing analysis)
LinkProbabilities aligned_link_probabilities(const SporadicityProfile& profile,
                                             const Topology& t);

// One iteration's indicator draws: v_i per client, a single shared coin per
// undirected edge (v_hat symmetric by construction).
struct IndicatorDraw {
    std::vector<uint8_t> v;       // size m
    std::vector<uint8_t> v_hat;   // aligned with topology edges
    uint64_t iteration = 0;
};

SporadicityProfile sample_profile(const DistributionSpec& spec, const Topology& t,
                                  uint64_t seed, bool all_pairs = false);

// Pure in (profile, k, run_seed); any iteration's draws can be re-materialized.
IndicatorDraw draw_indicators(const SporadicityProfile& profile, const Topology& t,
                              uint64_t k, uint64_t run_seed);

// d^(k) = 1 - gamma3 * alpha_k, identical across clients (clamped at the floor).
// Returns the common value; warned_zero reports a clamp at/below zero.
double diminishing_d(double alpha_k, double alpha0, double gamma3,
                     bool* warned_zero = nullptr);

// Effective per-client probabilities at iteration k under the profile schedule.
std::vector<double> effective_d(const SporadicityProfile& profile, double alpha_k);

nlohmann::json profile_to_json(const SporadicityProfile& p);

}  // namespace dspodfl
