#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "dspodfl/harness.hpp"

using namespace dspodfl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quadratic_config(const std::string& outdir)
{
    ExperimentConfig cfg;
    cfg.variants = {Variant::DSpodFL, Variant::DGD};
    cfg.m = 6;
    cfg.radius = 0.5;
    cfg.topology_seed = 11;
    cfg.profile_spec = DistributionSpec::beta(0.5, 0.5);
    cfg.profile_seed = 12;
    cfg.family = ExperimentConfig::Family::Quadratic;
    cfg.quadratic.n = 3;
    cfg.quadratic.lambda_min = 0.5;
    cfg.quadratic.lambda_max = 1.0;
    cfg.quadratic.linear_spread = 0.5;
    cfg.quadratic.seed = 13;
    cfg.noise_mode = NoiseMode::Synthetic;
    cfg.sigma2 = 0.1;
    cfg.schedule.mode = StepSchedule::Mode::Constant;
    cfg.schedule.alpha = 0.02;
    cfg.iterations = 40;
    cfg.eval_interval = 10;
    cfg.seeds = {1, 2};
    cfg.output_dir = outdir;
    cfg.theory_overlay = true;
    return cfg;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

struct TempDir {
    std::string path;
    explicit TempDir(std::string p) : path(std::move(p)) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config json round trip and dot-path overrides")
{
    const ExperimentConfig cfg = quadratic_config("x");
    const nlohmann::json j = cfg.to_json();
    const ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);

    nlohmann::json patched = j;
    apply_override(patched, "schedule.alpha=0.05");
    apply_override(patched, "seeds=[7,8,9]");
    apply_override(patched, "objective.noise_mode=minibatch");
    const ExperimentConfig changed = ExperimentConfig::from_json(patched);
    CHECK(changed.schedule.alpha == 0.05);
    CHECK(changed.seeds == std::vector<uint64_t>{7, 8, 9});
    CHECK(changed.noise_mode == NoiseMode::Minibatch);
    CHECK_THROWS(apply_override(patched, "no-equals-sign"));
}

TEST_CASE("validation: named errors and alpha_max warning")
{
    ExperimentConfig cfg = quadratic_config("x");
    cfg.seeds.clear();
    CHECK_FALSE(validate(cfg).ok());

    cfg = quadratic_config("x");
    cfg.noise_mode = NoiseMode::Minibatch;  // quadratic has no shards
    CHECK_FALSE(validate(cfg).ok());

    cfg = quadratic_config("x");
    cfg.family = ExperimentConfig::Family::Svm;
    cfg.train_images = "missing_images.idx";
    cfg.train_labels = "missing_labels.idx";
    cfg.test_images = "missing_images.idx";
    cfg.test_labels = "missing_labels.idx";
    cfg.noise_mode = NoiseMode::Minibatch;
    const ValidationResult miss = validate(cfg);
    CHECK_FALSE(miss.ok());
    bool names_path = false;
    for (const auto& e : miss.errors)
        if (e.find("missing_images.idx") != std::string::npos) names_path = true;
    CHECK(names_path);

    // hinge + theory overlay rejected with a named reason
    bool named = false;
    for (const auto& e : miss.errors)
        if (e.find("non-smooth") != std::string::npos) named = true;
    CHECK(named);

    // oversized alpha is a warning, not an error
    cfg = quadratic_config("x");
    cfg.schedule.alpha = 10.0;
    const ValidationResult warn = validate(cfg);
    CHECK(warn.ok());
    bool has_warning = false;
    for (const auto& w : warn.warnings)
        if (w.find("alpha_max") != std::string::npos) has_warning = true;
    CHECK(has_warning);
}

TEST_CASE("execute: cell layout, csv shape, shared draws, summary")
{
    TempDir tmp("harness_exec_tmp");
    ExperimentConfig cfg = quadratic_config(tmp.path);
    const ExecuteResult res = execute(cfg);
    CHECK(res.cells.size() == 4);  // 2 variants x 2 seeds
    for (const auto& cell : res.cells) CHECK(cell.status == "ok");

    // csv rows: ceil(40 / 10) + 1
    const auto rows = read_metrics_csv(tmp.path + "/runs/DSpodFL_s1/metrics.csv");
    CHECK(rows.size() == 5);
    CHECK(rows.front().iteration == 0);
    CHECK(rows.back().iteration == 40);
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].iteration > rows[i - 1].iteration);
        CHECK(rows[i].tau_cum >= rows[i - 1].tau_cum);
    }

    // all cells share one topology and one capability draw
    const nlohmann::json m1 = nlohmann::json::parse(
        slurp(tmp.path + "/runs/DSpodFL_s1/manifest.json"));
    const nlohmann::json m2 = nlohmann::json::parse(
        slurp(tmp.path + "/runs/DSpodFL_s2/manifest.json"));
    const nlohmann::json mg = nlohmann::json::parse(
        slurp(tmp.path + "/runs/DGD_s1/manifest.json"));
    CHECK(m1.at("topology") == m2.at("topology"));
    CHECK(m1.at("topology") == mg.at("topology"));
    CHECK(m1.at("profile").at("d") == m2.at("profile").at("d"));
    // DGD overrides d and b to 1 but shares the topology
    for (const auto& v : mg.at("profile").at("d")) CHECK(v.get<double>() == 1.0);

    // envelope emitted for the overlay
    CHECK(fs::exists(tmp.path + "/runs/DSpodFL_s1/envelope.json"));
    CHECK(fs::exists(tmp.path + "/summary.json"));

    // one plot group per (variant, seed) cell
    const std::string out = tmp.path + "/groups.csv";
    emit_plot_data(tmp.path, PlotCurve::ErrorVsIteration, out);
    std::set<std::string> groups;
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line))
        groups.insert(line.substr(0, line.find(',', line.find(',') + 1)));
    CHECK(groups.size() == 4);
}

TEST_CASE("reruns are byte-identical, serial or concurrent")
{
    TempDir tmp1("harness_rerun_a");
    TempDir tmp2("harness_rerun_b");
    ExperimentConfig cfg = quadratic_config(tmp1.path);
    execute(cfg);

    // re-execute from the written manifest, concurrently
    const std::string manifest_path = tmp1.path + "/manifest.json";
    {
        std::ifstream in(manifest_path);
        REQUIRE(in);
    }
    ExperimentConfig again = config_from_file(manifest_path,
                                              {"output_dir=" + tmp2.path,
                                               "parallel_cells=4"});
    execute(again);

    for (const std::string run : {"DSpodFL_s1", "DSpodFL_s2", "DGD_s1", "DGD_s2"}) {
        const std::string a = slurp(tmp1.path + "/runs/" + run + "/metrics.csv");
        const std::string b = slurp(tmp2.path + "/runs/" + run + "/metrics.csv");
        CHECK(a == b);
    }
}

TEST_CASE("delay to target interpolates between eval points")
{
    std::vector<MetricsRow> rows(3);
    rows[0].iteration = 0;
    rows[0].tau_cum = 0.0;
    rows[0].test_accuracy = 0.1;
    rows[1].iteration = 10;
    rows[1].tau_cum = 10.0;
    rows[1].test_accuracy = 0.5;
    rows[2].iteration = 20;
    rows[2].tau_cum = 20.0;
    rows[2].test_accuracy = 0.9;

    CHECK(*delay_to_target(rows, 0.5) == 10.0);
    CHECK(*delay_to_target(rows, 0.7) == doctest::Approx(15.0));
    CHECK(*delay_to_target(rows, 0.05) == 0.0);
    CHECK_FALSE(delay_to_target(rows, 0.95).has_value());
}

TEST_CASE("plot data emission")
{
    TempDir tmp("harness_plot_tmp");
    ExperimentConfig cfg = quadratic_config(tmp.path);
    cfg.variants = {Variant::DSpodFL};
    cfg.seeds = {1};
    // well-mixed profile and a small step so the geometric envelope exists
    cfg.profile_spec = DistributionSpec::fixed_constant(0.9, 0.9);
    cfg.quadratic.lambda_min = 0.5;
    cfg.quadratic.lambda_max = 0.5;
    cfg.quadratic.hessian_spread = 0.0;
    cfg.schedule.alpha = 0.004;
    execute(cfg);

    const std::string out = tmp.path + "/err.csv";
    emit_plot_data(tmp.path, PlotCurve::ErrorVsIteration, out);
    const std::string text = slurp(out);
    CHECK(text.rfind("variant,seed,x,y\n", 0) == 0);
    CHECK(text.find("DSpodFL,1,") != std::string::npos);

    const std::string env_out = tmp.path + "/env.csv";
    emit_plot_data(tmp.path, PlotCurve::EnvelopeOverlay, env_out);
    const std::string env_text = slurp(env_out);
    CHECK(env_text.rfind("variant,seed,iteration,opt_err,cons_err,opt_env,cons_env\n", 0)
          == 0);
    // empirical and bound columns joined on the same iteration grid
    CHECK(std::count(env_text.begin(), env_text.end(), '\n') >= 5);

    CHECK_THROWS(plot_curve_from_name("mystery-curve"));

    // quadratic runs carry no accuracy: header-only accuracy file
    const std::string acc_out = tmp.path + "/acc.csv";
    emit_plot_data(tmp.path, PlotCurve::AccuracyVsDelay, acc_out);
    CHECK(slurp(acc_out) == "variant,seed,x,y\n");
}

TEST_CASE("execute rejects an invalid config with aggregated errors")
{
    ExperimentConfig cfg = quadratic_config("never_created_dir");
    cfg.seeds.clear();
    cfg.batch_size = 0;
    CHECK_THROWS_WITH_AS(execute(cfg), doctest::Contains("validation failed"),
                         std::runtime_error);
    CHECK_FALSE(fs::exists("never_created_dir"));
}
