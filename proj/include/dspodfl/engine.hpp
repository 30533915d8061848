#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dspodfl/graph.hpp"
#include "dspodfl/linalg.hpp"
#include "dspodfl/metrics.hpp"
#include "dspodfl/mixing.hpp"
#include "dspodfl/objectives.hpp"
#include "dspodfl/sporadic.hpp"

namespace dspodfl {

// Stacked parameter matrix: row i is client i's model.
struct ModelMatrix {
    Matrix theta;
    uint64_t iteration = 0;
};

struct StepSchedule {
    enum class Mode { Constant, Diminishing };
    Mode mode = Mode::Constant;
    double alpha = 0.01;   // constant step
    double alpha0 = 0.01;  // diminishing initial step
    double gamma = 1.0;    // diminishing time scale

    double at(uint64_t k) const;
};

enum class Variant { DSpodFL, DGD, RG, SporadicSGD, DFedAvg };

Variant variant_from_name(const std::string& name);
std::string variant_name(Variant v);

// A variant is the base profile plus overrides on the indicator processes.
// DFedAvg replaces the random indicators with the deterministic schedule
// v = 1 always, v_hat = 1 iff k % D == 0, with D = ceil((1/m) sum 1/d_i).
struct VariantSpec {
    Variant variant = Variant::DSpodFL;
    SporadicityProfile profile;   // effective profile (after overrides)
    int dfedavg_period = 1;
};

VariantSpec make_variant(Variant v, const SporadicityProfile& base,
                         const Topology& t);

int dfedavg_period(const std::vector<double>& d);

// Indicator draw for a variant at iteration k (random or scheduled).
IndicatorDraw variant_indicators(const VariantSpec& spec, const Topology& t,
                                 uint64_t k, uint64_t run_seed, double alpha_k);

// One DSpodFL iteration:
//   theta_i <- theta_i + sum_j r_ij (theta_j - theta_i) vhat_ij - alpha g_i v_i
// Gradients are evaluated only for clients with v_i = 1. Aggregation and SGD
// terms both read the iteration-k state. Per-row updates are independent, so
// the parallel loop is bit-deterministic regardless of thread count.
struct StepResult {
    std::optional<Vector> gv_mean;  // (1/m) sum_i g_i v_i when requested
};

StepResult step(ModelMatrix& state, const BaseWeights& r, const Topology& t,
                const IndicatorDraw& draw, double alpha_k,
                const ObjectiveFamily& fam, NoiseMode noise_mode, double sigma2,
                int batch_size, uint64_t run_seed, bool want_gv_mean = false);

struct RunConfig {
    VariantSpec variant;
    StepSchedule schedule;
    NoiseMode noise_mode = NoiseMode::Synthetic;
    double sigma2 = 0.0;
    int batch_size = 16;
    uint64_t iterations = 0;
    uint64_t eval_interval = 1;
    uint64_t run_seed = 0;

    enum class Init { Zero, Gaussian };
    Init init = Init::Zero;
    double init_scale = 1.0;

    bool retain_average_dynamics = false;  // keep per-iteration theta_bar and gv_mean
    uint64_t retain_limit = 2048;
    uint64_t snapshot_interval = 0;        // 0: no full model snapshots

    const Dataset* test_set = nullptr;     // accuracy evaluation when present
    EvalMode eval_mode = EvalMode::AverageModel;

    // incremental persistence hook, invoked as each metrics row is produced
    std::function<void(const MetricsRow&)> on_row;
};

struct RunTrace {
    std::vector<MetricsRow> rows;
    std::vector<Vector> theta_bar_path;  // when retain_average_dynamics
    std::vector<Vector> gv_mean_path;
    std::vector<double> alpha_path;
    std::vector<std::pair<uint64_t, Matrix>> snapshots;  // per snapshot_interval
    Matrix final_theta;
    uint64_t rng_seed = 0;               // realizes the run's filtration
};

// Full Algorithm-1 style run. All rows start from a shared initial model;
// everything is determined by (config, topology, family, optimum).
RunTrace run(const RunConfig& cfg, TopologySchedule& topology,
             const ObjectiveFamily& fam, const OptimumInfo* opt);

// Recomputes theta_bar^{k+1} = theta_bar^k - alpha_k * mean(g v) over a
// retained trace segment and returns the max norm deviation from the
// engine's realized averages.
double average_dynamics_check(const RunTrace& trace);

}  // namespace dspodfl
