// Command-line front end: run / validate / theory / plotdata / mc-verify.
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dspodfl/harness.hpp"
#include "dspodfl/rng.hpp"

using namespace dspodfl;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides)
{
    ExperimentConfig cfg;
    try {
        cfg = config_from_file(config_path, overrides);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const ValidationResult vr = validate(cfg);
    for (const auto& w : vr.warnings) std::cerr << "warning: " << w << "\n";
    if (!vr.ok()) {
        for (const auto& e : vr.errors) std::cerr << "error: " << e << "\n";
        return 1;
    }
    try {
        const ExecuteResult res = execute(cfg);
        int failures = 0;
        for (const auto& cell : res.cells) {
            std::cout << variant_name(cell.variant) << " seed=" << cell.seed << ": "
                      << cell.status << "\n";
            if (cell.status != "ok") ++failures;
        }
        std::cout << "results: " << res.directory << "\n";
        return failures == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_validate(const std::string& config_path, const std::vector<std::string>& overrides)
{
    try {
        const ExperimentConfig cfg = config_from_file(config_path, overrides);
        const ValidationResult vr = validate(cfg);
        for (const auto& w : vr.warnings) std::cout << "warning: " << w << "\n";
        for (const auto& e : vr.errors) std::cout << "error: " << e << "\n";
        if (!vr.ok()) return 1;
        std::cout << vr.manifest_skeleton.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_theory(const std::string& constants_path, double alpha, const std::string& regime,
               double gamma3, double alpha0)
{
    try {
        std::ifstream in(constants_path);
        if (!in) throw std::runtime_error("cannot open " + constants_path);
        const nlohmann::json j = nlohmann::json::parse(in);

        TheoryConstants c;
        c.mu = j.at("mu").get<double>();
        c.beta = j.at("beta").get<double>();
        c.delta = j.value("delta", 0.0);
        c.zeta = j.value("zeta", 0.0);
        c.sigma2 = j.value("sigma2", 0.0);
        const double d_min = j.value("d_min", 1.0);
        const double d_max = j.value("d_max", 1.0);
        const double rho = j.value("rho_tilde", 0.0);
        const int m = j.value("m", 1);

        nlohmann::json out;
        if (regime == "convex") {
            const auto rep = theory::max_step_convex(c, d_min, d_max, rho);
            out["feasibility"] = rep.to_json();
            if (alpha > 0.0) {
                const auto sr = theory::spectral_radius_phi_convex(c, alpha, d_min,
                                                                   d_max, rho, m);
                out["rho_phi"] = sr.value;
                out["feasible"] = rep.feasible(alpha);
                if (sr.value < 1.0)
                    out["asymptotic_gap"] = {
                        {"opt_err", theory::asymptotic_gap_convex(c, alpha, d_min, d_max,
                                                                  rho, m, sr.value).opt_err},
                        {"cons_err", theory::asymptotic_gap_convex(c, alpha, d_min, d_max,
                                                                   rho, m, sr.value).cons_err}};
            }
        } else if (regime == "pl") {
            const auto rep = theory::max_step_pl(c, d_min, d_max, rho);
            out["feasibility"] = rep.to_json();
            out["participation_floor"] = theory::pl_participation_floor(c);
            if (alpha > 0.0) {
                const auto sr = theory::spectral_radius_phi_pl(c, alpha, d_min, d_max,
                                                               rho, m);
                out["rho_phi"] = sr.value;
                out["feasible"] = rep.feasible(alpha);
                if (sr.value < 1.0)
                    out["asymptotic_gap"] = {
                        {"opt_err", theory::asymptotic_gap_pl(c, alpha, d_min, d_max,
                                                              rho, m, sr.value).opt_err},
                        {"cons_err", theory::asymptotic_gap_pl(c, alpha, d_min, d_max,
                                                               rho, m, sr.value).cons_err}};
            }
        } else if (regime == "diminishing") {
            if (alpha0 <= 0.0) throw std::runtime_error("diminishing regime needs --alpha0");
            const auto rep = theory::diminishing_feasibility(c, rho, gamma3, alpha0);
            out["feasibility"] = rep.to_json();
        } else {
            throw std::runtime_error("regime must be convex, pl, or diminishing");
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_plotdata(const std::string& results, const std::string& curve,
                 const std::string& out)
{
    try {
        emit_plot_data(results, plot_curve_from_name(curve), out);
        std::cout << "wrote " << out << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

// Monte-Carlo validators of the mixing laws and the delay model.
int cmd_mc_verify(int graphs, int draws, uint64_t seed)
{
    try {
        int failures = 0;
        for (int g = 0; g < graphs; ++g) {
            const uint64_t gseed = rng::subseed(seed, g);
            const int m = 3 + static_cast<int>(rng::uniform_index(6, gseed,
                                                                  rng::Stream::Test, 0, 1));
            const Topology t = regenerate_connected_rgg(m, 0.7, gseed);
            const BaseWeights r = metropolis_weights(t);
            LinkProbabilities b(t.edges.size());
            for (size_t e = 0; e < b.size(); ++e)
                b[e] = 0.05 + 0.95 * rng::uniform01(gseed, rng::Stream::Test, 1, e);
            const MixingAnalysis an = analyze_mixing(r, t, b);

            Matrix mean_p(m, m), mean_p2(m, m), msq_p(m, m), msq_p2(m, m);
            for (int d = 0; d < draws; ++d) {
                std::vector<uint8_t> coin(t.edges.size());
                for (size_t e = 0; e < coin.size(); ++e)
                    coin[e] = rng::bernoulli(b[e], gseed, rng::Stream::LinkIndicator, d, e);
                const Matrix p = realize_mixing(r, t, coin).p;
                const Matrix p2 = matmul(p, p);
                for (int i = 0; i < m; ++i)
                    for (int jj = 0; jj < m; ++jj) {
                        mean_p(i, jj) += p(i, jj);
                        msq_p(i, jj) += p(i, jj) * p(i, jj);
                        mean_p2(i, jj) += p2(i, jj);
                        msq_p2(i, jj) += p2(i, jj) * p2(i, jj);
                    }
            }
            double worst = 0.0;
            for (int i = 0; i < m; ++i)
                for (int jj = 0; jj < m; ++jj) {
                    const double n = draws;
                    const double m1 = mean_p(i, jj) / n;
                    const double v1 = std::max(msq_p(i, jj) / n - m1 * m1, 0.0);
                    const double z1 = std::fabs(m1 - an.r_bar(i, jj))
                                      / (std::sqrt(v1 / n) + 1e-12);
                    const double m2 = mean_p2(i, jj) / n;
                    const double v2 = std::max(msq_p2(i, jj) / n - m2 * m2, 0.0);
                    const double z2 = std::fabs(m2 - an.r_tilde(i, jj))
                                      / (std::sqrt(v2 / n) + 1e-12);
                    worst = std::max({worst, z1, z2});
                }
            const bool ok = worst <= 3.0;
            if (!ok) ++failures;
            std::printf("graph %2d (m=%d, rho_tilde=%.4f): worst z = %.2f  [%s]\n", g, m,
                        an.rho_tilde, worst, ok ? "ok" : "FAIL");
        }
        return failures == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"DSpodFL: decentralized sporadic federated-learning simulator "
                 "and theory-verification toolkit"};
    app.require_subcommand(1);

    std::string config_path, constants_path, results_dir, curve, out_path;
    std::vector<std::string> overrides;
    double alpha = 0.0, gamma3 = 0.0, alpha0 = 0.0;
    std::string regime = "convex";
    int graphs = 10, draws = 20000;
    uint64_t seed = 7;

    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("--config", config_path, "config or manifest JSON")->required();
    run->add_option("--set", overrides, "dot-path override, e.g. schedule.alpha=0.02");

    auto* val = app.add_subcommand("validate", "validate a config without running");
    val->add_option("--config", config_path, "config or manifest JSON")->required();
    val->add_option("--set", overrides, "dot-path override");

    auto* theory_cmd = app.add_subcommand("theory",
                                          "feasibility/envelope calculator on constants");
    theory_cmd->add_option("--constants", constants_path,
                           "JSON with mu, beta, delta, zeta, sigma2, d_min, d_max, "
                           "rho_tilde, m")->required();
    theory_cmd->add_option("--alpha", alpha, "step size to evaluate");
    theory_cmd->add_option("--regime", regime, "convex | pl | diminishing");
    theory_cmd->add_option("--gamma3", gamma3, "diminishing coupling constant");
    theory_cmd->add_option("--alpha0", alpha0, "diminishing initial step");

    auto* plot = app.add_subcommand("plotdata", "emit long-format plot tables");
    plot->add_option("--results", results_dir, "result directory")->required();
    plot->add_option("--curve", curve,
                     "accuracy-vs-delay | error-vs-iteration | envelope-overlay")
        ->required();
    plot->add_option("--out", out_path, "output CSV path")->required();

    auto* mc = app.add_subcommand("mc-verify", "Monte-Carlo mixing-law validators");
    mc->add_option("--graphs", graphs, "number of random graphs");
    mc->add_option("--draws", draws, "draws per graph");
    mc->add_option("--seed", seed, "validator seed");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, overrides);
    if (val->parsed()) return cmd_validate(config_path, overrides);
    if (theory_cmd->parsed()) return cmd_theory(constants_path, alpha, regime, gamma3, alpha0);
    if (plot->parsed()) return cmd_plotdata(results_dir, curve, out_path);
    if (mc->parsed()) return cmd_mc_verify(graphs, draws, seed);
    return 1;
}
