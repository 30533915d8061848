#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspodfl/engine.hpp"
#include "dspodfl/theory.hpp"

namespace dspodfl {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "DSPODFL_OUTPUT_ROOT";

struct ExperimentConfig {
    std::vector<Variant> variants{Variant::DSpodFL};

    // topology
    int m = 10;
    double radius = 0.4;
    uint64_t topology_seed = 1;
    TopologySchedule::Mode topology_mode = TopologySchedule::Mode::Static;

    // capability profile
    DistributionSpec profile_spec;
    uint64_t profile_seed = 2;

    // objective
    enum class Family { Quadratic, Logistic, Svm };
    Family family = Family::Quadratic;
    QuadraticSpec quadratic;
    std::string train_images, train_labels, test_images, test_labels;
    int train_limit = 0, test_limit = 0;
    PartitionScheme scheme = PartitionScheme::Iid;
    int labels_per_client = 0;  // 0 = all classes
    uint64_t partition_seed = 3;
    double lambda = 1e-3;
    int batch_size = 16;
    NoiseMode noise_mode = NoiseMode::Minibatch;
    double sigma2 = 0.0;

    // schedule
    StepSchedule schedule;
    bool couple_d_to_schedule = false;  // d^(k) = 1 - gamma3 * alpha_k
    double gamma3 = 0.0;                // 0 with coupling means gamma3 = 1/alpha0

    uint64_t iterations = 0;
    uint64_t eval_interval = 1;
    std::vector<uint64_t> seeds{1};
    std::string output_dir = "results";
    bool theory_overlay = false;
    theory::Regime theory_regime = theory::Regime::Convex;

    RunConfig::Init init = RunConfig::Init::Zero;
    double init_scale = 1.0;
    EvalMode eval_mode = EvalMode::AverageModel;

    std::optional<double> target_accuracy;          // absolute target
    std::optional<double> target_fraction_of_dgd;   // fraction of DGD final accuracy
    int parallel_cells = 1;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// Dot-path override: "schedule.alpha=0.02", "seeds=[1,2,3]".
void apply_override(nlohmann::json& config, const std::string& assignment);

struct ValidationResult {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    nlohmann::json manifest_skeleton;
    bool ok() const { return errors.empty(); }
};

ValidationResult validate(const ExperimentConfig& cfg);

struct CellResult {
    Variant variant;
    uint64_t seed = 0;
    std::string status;  // "ok" or the failure reason
    std::string csv_path;
    double final_accuracy = 0.0;
    std::optional<double> delay_to_target;
};

struct ExecuteResult {
    std::string directory;
    std::vector<CellResult> cells;
};

// Runs every (variant x seed) cell; writes per-run CSV + manifest (+ optional
// theory envelope), an experiment manifest, and a summary with the
// delay-to-target-accuracy statistic. Cell failures are isolated.
ExecuteResult execute(const ExperimentConfig& cfg);

// Re-execution entry point: accepts either a config or a manifest JSON.
ExperimentConfig config_from_file(const std::string& path,
                                  const std::vector<std::string>& overrides = {});

enum class PlotCurve { AccuracyVsDelay, ErrorVsIteration, EnvelopeOverlay };
PlotCurve plot_curve_from_name(const std::string& name);

// Long-format plot emission from a result directory.
void emit_plot_data(const std::string& result_dir, PlotCurve curve,
                    const std::string& out_path);

// Smallest tau_cum at which accuracy first reaches target (linear
// interpolation between eval points); nullopt when never reached.
std::optional<double> delay_to_target(const std::vector<MetricsRow>& rows,
                                      double target);

}  // namespace dspodfl
