#include "dspodfl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dspodfl {

namespace fs = std::filesystem;

namespace {

std::string family_name(ExperimentConfig::Family f)
{
    switch (f) {
        case ExperimentConfig::Family::Quadratic: return "quadratic";
        case ExperimentConfig::Family::Logistic: return "logistic";
        case ExperimentConfig::Family::Svm: return "svm";
    }
    return "?";
}

ExperimentConfig::Family family_from_name(const std::string& s)
{
    if (s == "quadratic") return ExperimentConfig::Family::Quadratic;
    if (s == "logistic") return ExperimentConfig::Family::Logistic;
    if (s == "svm" || s == "hinge-svm") return ExperimentConfig::Family::Svm;
    throw std::invalid_argument("unknown objective family: " + s);
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const
{
    nlohmann::json j;
    auto vs = nlohmann::json::array();
    for (Variant v : variants) vs.push_back(variant_name(v));
    j["variants"] = vs;

    j["topology"] = {{"m", m},
                     {"radius", radius},
                     {"seed", topology_seed},
                     {"mode", topology_mode == TopologySchedule::Mode::Static
                                  ? "static" : "regenerated"}};

    nlohmann::json prof;
    switch (profile_spec.kind) {
        case DistributionSpec::Kind::Uniform: prof["distribution"] = "uniform"; break;
        case DistributionSpec::Kind::Beta:
            prof["distribution"] = "beta";
            prof["a"] = profile_spec.a;
            prof["b"] = profile_spec.b;
            break;
        case DistributionSpec::Kind::Fixed:
            prof["distribution"] = "fixed";
            prof["d"] = profile_spec.fixed_d;
            prof["b_edges"] = profile_spec.fixed_b;
            break;
    }
    prof["seed"] = profile_seed;
    j["profile"] = prof;

    nlohmann::json obj;
    obj["family"] = family_name(family);
    if (family == Family::Quadratic) {
        obj["quadratic"] = quadratic_spec_to_json(quadratic);
    } else {
        obj["dataset"] = {{"train_images", train_images},
                          {"train_labels", train_labels},
                          {"test_images", test_images},
                          {"test_labels", test_labels},
                          {"train_limit", train_limit},
                          {"test_limit", test_limit}};
        obj["partition"] = {{"scheme", scheme == PartitionScheme::Iid ? "iid" : "label-skew"},
                            {"labels_per_client", labels_per_client},
                            {"seed", partition_seed}};
        obj["lambda"] = lambda;
    }
    obj["batch_size"] = batch_size;
    obj["noise_mode"] = noise_mode == NoiseMode::Minibatch ? "minibatch" : "synthetic";
    obj["sigma2"] = sigma2;
    j["objective"] = obj;

    nlohmann::json sched;
    if (schedule.mode == StepSchedule::Mode::Constant) {
        sched["mode"] = "constant";
        sched["alpha"] = schedule.alpha;
    } else {
        sched["mode"] = "diminishing";
        sched["alpha0"] = schedule.alpha0;
        sched["gamma"] = schedule.gamma;
        sched["couple_d"] = couple_d_to_schedule;
        sched["gamma3"] = gamma3;
    }
    j["schedule"] = sched;

    j["iterations"] = iterations;
    j["eval_interval"] = eval_interval;
    j["seeds"] = seeds;
    j["output_dir"] = output_dir;
    j["theory_overlay"] = theory_overlay;
    j["theory_regime"] = theory_regime == theory::Regime::Convex ? "convex" : "pl";
    j["init"] = {{"kind", init == RunConfig::Init::Zero ? "zero" : "gaussian"},
                 {"scale", init_scale}};
    j["eval_mode"] = eval_mode == EvalMode::AverageModel ? "average-model"
                                                         : "per-client-mean";
    if (target_accuracy) j["target_accuracy"] = *target_accuracy;
    if (target_fraction_of_dgd) j["target_fraction_of_dgd"] = *target_fraction_of_dgd;
    j["parallel_cells"] = parallel_cells;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    if (j.contains("variants")) {
        c.variants.clear();
        for (const auto& v : j.at("variants"))
            c.variants.push_back(variant_from_name(v.get<std::string>()));
    }
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        c.m = t.value("m", c.m);
        c.radius = t.value("radius", c.radius);
        c.topology_seed = t.value("seed", c.topology_seed);
        c.topology_mode = t.value("mode", std::string("static")) == "regenerated"
                              ? TopologySchedule::Mode::Regenerated
                              : TopologySchedule::Mode::Static;
    }
    if (j.contains("profile")) {
        const auto& p = j.at("profile");
        const std::string dist = p.value("distribution", std::string("uniform"));
        if (dist == "uniform") {
            c.profile_spec = DistributionSpec::uniform();
        } else if (dist == "beta") {
            c.profile_spec = DistributionSpec::beta(p.value("a", 0.5), p.value("b", 0.5));
        } else if (dist == "fixed") {
            auto as_list = [](const nlohmann::json& v) {
                return v.is_array() ? v.get<std::vector<double>>()
                                    : std::vector<double>{v.get<double>()};
            };
            c.profile_spec = DistributionSpec::fixed(as_list(p.at("d")),
                                                     as_list(p.at("b_edges")));
        } else {
            throw std::invalid_argument("unknown profile distribution: " + dist);
        }
        c.profile_seed = p.value("seed", c.profile_seed);
    }
    if (j.contains("objective")) {
        const auto& o = j.at("objective");
        c.family = family_from_name(o.value("family", std::string("quadratic")));
        if (o.contains("quadratic"))
            c.quadratic = quadratic_spec_from_json(o.at("quadratic"));
        if (o.contains("dataset")) {
            const auto& d = o.at("dataset");
            c.train_images = d.value("train_images", std::string());
            c.train_labels = d.value("train_labels", std::string());
            c.test_images = d.value("test_images", std::string());
            c.test_labels = d.value("test_labels", std::string());
            c.train_limit = d.value("train_limit", 0);
            c.test_limit = d.value("test_limit", 0);
        }
        if (o.contains("partition")) {
            const auto& p = o.at("partition");
            c.scheme = p.value("scheme", std::string("iid")) == "label-skew"
                           ? PartitionScheme::LabelSkew
                           : PartitionScheme::Iid;
            c.labels_per_client = p.value("labels_per_client", 0);
            c.partition_seed = p.value("seed", c.partition_seed);
        }
        c.lambda = o.value("lambda", c.lambda);
        c.batch_size = o.value("batch_size", c.batch_size);
        c.noise_mode = o.value("noise_mode", std::string("minibatch")) == "synthetic"
                           ? NoiseMode::Synthetic
                           : NoiseMode::Minibatch;
        c.sigma2 = o.value("sigma2", 0.0);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        if (s.value("mode", std::string("constant")) == "diminishing") {
            c.schedule.mode = StepSchedule::Mode::Diminishing;
            c.schedule.alpha0 = s.value("alpha0", 0.01);
            c.schedule.gamma = s.value("gamma", 1.0);
            c.couple_d_to_schedule = s.value("couple_d", false);
            c.gamma3 = s.value("gamma3", 0.0);
        } else {
            c.schedule.mode = StepSchedule::Mode::Constant;
            c.schedule.alpha = s.value("alpha", 0.01);
        }
    }
    c.iterations = j.value("iterations", 0ull);
    c.eval_interval = j.value("eval_interval", 1ull);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.theory_overlay = j.value("theory_overlay", false);
    c.theory_regime = j.value("theory_regime", std::string("convex")) == "pl"
                          ? theory::Regime::Pl
                          : theory::Regime::Convex;
    if (j.contains("init")) {
        c.init = j.at("init").value("kind", std::string("zero")) == "gaussian"
                     ? RunConfig::Init::Gaussian
                     : RunConfig::Init::Zero;
        c.init_scale = j.at("init").value("scale", 1.0);
    }
    c.eval_mode = j.value("eval_mode", std::string("average-model")) == "per-client-mean"
                      ? EvalMode::PerClientMean
                      : EvalMode::AverageModel;
    if (j.contains("target_accuracy")) c.target_accuracy = j.at("target_accuracy").get<double>();
    if (j.contains("target_fraction_of_dgd"))
        c.target_fraction_of_dgd = j.at("target_fraction_of_dgd").get<double>();
    c.parallel_cells = j.value("parallel_cells", 1);
    return c;
}

void apply_override(nlohmann::json& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like path.to.key=value: "
                                    + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    nlohmann::json* node = &config;
    std::stringstream ss(path);
    std::string key, next;
    std::getline(ss, key, '.');
    while (std::getline(ss, next, '.')) {
        node = &(*node)[key];
        key = next;
    }
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        parsed = value;  // treat as a plain string
    }
    (*node)[key] = parsed;
}

ExperimentConfig config_from_file(const std::string& path,
                                  const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("config")) j = j.at("config");  // accept a run manifest as input
    for (const auto& o : overrides) apply_override(j, o);
    return ExperimentConfig::from_json(j);
}

ValidationResult validate(const ExperimentConfig& cfg)
{
    ValidationResult res;
    auto err = [&res](const std::string& s) { res.errors.push_back(s); };
    auto warn = [&res](const std::string& s) { res.warnings.push_back(s); };

    if (cfg.seeds.empty()) err("seeds list must be nonempty");
    if (cfg.variants.empty()) err("variants list must be nonempty");
    if (cfg.eval_interval < 1) err("eval_interval must be >= 1");
    if (cfg.m < 1) err("topology.m must be >= 1");
    if (cfg.radius <= 0.0) err("topology.radius must be positive");
    if (cfg.batch_size < 1) err("objective.batch_size must be >= 1");

    if (cfg.family == ExperimentConfig::Family::Quadratic) {
        if (cfg.noise_mode == NoiseMode::Minibatch)
            err("quadratic family has no data shards; use noise_mode=synthetic");
    } else {
        for (const std::string& p : {cfg.train_images, cfg.train_labels,
                                     cfg.test_images, cfg.test_labels}) {
            if (p.empty())
                err("classifier family requires dataset paths");
            else if (!fs::exists(p))
                err("dataset file missing: " + p);
        }
    }

    if (cfg.family == ExperimentConfig::Family::Svm && cfg.theory_overlay)
        err("hinge-SVM family is non-smooth: theory_overlay is not available "
            "(hinge losses are not smooth)");

    if (cfg.schedule.mode == StepSchedule::Mode::Diminishing) {
        if (cfg.schedule.alpha0 <= 0.0) err("schedule.alpha0 must be positive");
        if (cfg.schedule.gamma <= 0.0) err("schedule.gamma must be positive");
        if (cfg.gamma3 < 0.0 || (cfg.gamma3 > 0.0 && cfg.gamma3 > 1.0 / cfg.schedule.alpha0))
            err("schedule.gamma3 must lie in [0, 1/alpha0]");
    } else if (cfg.schedule.alpha <= 0.0) {
        err("schedule.alpha must be positive");
    }

    // theory cross-checks need resolved constants; do them for the exact family
    if (res.errors.empty() && cfg.theory_overlay
        && cfg.family == ExperimentConfig::Family::Quadratic) {
        try {
            QuadraticSpec qs = cfg.quadratic;
            qs.m = cfg.m;
            const ObjectiveFamily fam = make_quadratic(qs);
            const OptimumInfo opt = global_optimum(fam);
            const TheoryConstants consts = compute_constants(fam, opt, cfg.sigma2);
            const Topology topo = regenerate_connected_rgg(cfg.m, cfg.radius,
                                                           cfg.topology_seed);
            const SporadicityProfile prof = sample_profile(cfg.profile_spec, topo,
                                                           cfg.profile_seed);
            const double rho = consensus_contraction_factor(metropolis_weights(topo),
                                                            topo, aligned_link_probabilities(prof, topo));
            if (cfg.theory_regime == theory::Regime::Pl) {
                const double floor = theory::pl_participation_floor(consts);
                if (prof.d_min() <= floor)
                    err("PL regime requires d_min > 1 - mu^2/(2 beta^2) = "
                        + std::to_string(floor) + "; profile has d_min = "
                        + std::to_string(prof.d_min()));
            }
            if (cfg.schedule.mode == StepSchedule::Mode::Constant) {
                const auto rep = cfg.theory_regime == theory::Regime::Pl
                                     ? theory::max_step_pl(consts, prof.d_min(),
                                                           prof.d_max(), rho)
                                     : theory::max_step_convex(consts, prof.d_min(),
                                                               prof.d_max(), rho);
                if (cfg.schedule.alpha >= rep.alpha_max)
                    warn("alpha = " + std::to_string(cfg.schedule.alpha)
                         + " exceeds alpha_max = " + std::to_string(rep.alpha_max)
                         + " (bounds are sufficient, not necessary; run permitted)");
            }
        } catch (const std::exception& e) {
            err(std::string("theory cross-check failed: ") + e.what());
        }
    }

    res.manifest_skeleton = {{"config", cfg.to_json()},
                             {"artifact_version", kArtifactVersion},
                             {"warnings", res.warnings}};
    return res;
}

namespace {

std::string resolve_output_dir(const std::string& dir)
{
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv)) p = fs::path(root) / p;
    }
    return p.string();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

struct ExperimentSetup {
    Topology topology;
    SporadicityProfile base_profile;
    ObjectiveFamily family;
    std::shared_ptr<Dataset> train;
    std::shared_ptr<Dataset> test;
    std::optional<OptimumInfo> optimum;
    std::optional<TheoryConstants> constants;
};

ExperimentSetup build_setup(const ExperimentConfig& cfg)
{
    ExperimentSetup s;
    s.topology = regenerate_connected_rgg(cfg.m, cfg.radius, cfg.topology_seed);
    // regenerated topologies realize fresh edge sets, so capabilities cover
    // every pair rather than just the base edges
    const bool all_pairs = cfg.topology_mode == TopologySchedule::Mode::Regenerated;
    s.base_profile = sample_profile(cfg.profile_spec, s.topology, cfg.profile_seed,
                                    all_pairs);
    if (cfg.couple_d_to_schedule || (cfg.schedule.mode == StepSchedule::Mode::Diminishing
                                     && cfg.gamma3 > 0.0)) {
        s.base_profile.d_schedule = DSchedule::Diminishing;
        s.base_profile.alpha0 = cfg.schedule.alpha0;
        s.base_profile.gamma3 = cfg.gamma3 > 0.0 ? cfg.gamma3 : 1.0 / cfg.schedule.alpha0;
    }

    if (cfg.family == ExperimentConfig::Family::Quadratic) {
        QuadraticSpec qs = cfg.quadratic;
        qs.m = cfg.m;
        s.family = make_quadratic(qs);
        s.optimum = global_optimum(s.family);
        s.constants = compute_constants(s.family, *s.optimum, cfg.sigma2);
        return s;
    }

    s.train = std::make_shared<Dataset>(load_idx(cfg.train_images, cfg.train_labels,
                                                 cfg.train_limit));
    s.test = std::make_shared<Dataset>(load_idx(cfg.test_images, cfg.test_labels,
                                                cfg.test_limit));
    const int lpc = cfg.labels_per_client > 0 ? cfg.labels_per_client
                                              : s.train->num_classes;
    const DataPartition part = partition(*s.train, cfg.m, cfg.scheme, lpc,
                                         cfg.partition_seed);
    const auto kind = cfg.family == ExperimentConfig::Family::Logistic
                          ? ObjectiveFamily::Kind::Logistic
                          : ObjectiveFamily::Kind::HingeSvm;
    s.family = make_classifier(kind, s.train, part, cfg.lambda);
    if (cfg.theory_overlay && kind == ObjectiveFamily::Kind::Logistic) {
        s.optimum = global_optimum(s.family);
        s.constants = compute_constants(s.family, *s.optimum, cfg.sigma2);
    }
    return s;
}

nlohmann::json envelope_json(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                             const VariantSpec& vs, const RunTrace& trace,
                             double rho_tilde)
{
    using namespace theory;
    const TheoryConstants& c = *setup.constants;
    const double d_min = vs.profile.d_min(), d_max = vs.profile.d_max();
    const int m = cfg.m;

    nlohmann::json env;
    env["rho_tilde"] = rho_tilde;
    auto rows = nlohmann::json::array();

    ErrorVector nu0;
    nu0.opt_err = cfg.theory_regime == Regime::Pl ? trace.rows[0].pl_err.value_or(0.0)
                                                  : trace.rows[0].opt_err.value_or(0.0);
    nu0.cons_err = trace.rows[0].cons_err;

    if (cfg.schedule.mode == StepSchedule::Mode::Constant) {
        const double alpha = cfg.schedule.alpha;
        const SpectralRadius sr =
            cfg.theory_regime == Regime::Pl
                ? spectral_radius_phi_pl(c, alpha, d_min, d_max, rho_tilde, m)
                : spectral_radius_phi_convex(c, alpha, d_min, d_max, rho_tilde, m);
        const PhiPsi pp = cfg.theory_regime == Regime::Pl
                              ? phi_psi_pl(c, alpha, d_min, d_max, rho_tilde, m)
                              : phi_psi_convex(c, alpha, d_min, d_max, rho_tilde, m);
        env["rho_phi"] = sr.value;
        env["psi"] = {pp.psi[0], pp.psi[1]};
        const auto rep = cfg.theory_regime == Regime::Pl
                             ? max_step_pl(c, d_min, d_max, rho_tilde)
                             : max_step_convex(c, d_min, d_max, rho_tilde);
        env["feasibility"] = rep.to_json();
        if (sr.value < 1.0) {
            for (const auto& row : trace.rows) {
                const ErrorVector e = envelope_at_iteration(nu0, sr.value, pp.psi,
                                                            row.iteration);
                rows.push_back({{"iteration", row.iteration},
                                {"opt_env", e.opt_err},
                                {"cons_env", e.cons_err}});
            }
        } else {
            env["warning"] = "rho(Phi) >= 1 at this step size; no envelope emitted";
        }
    } else {
        const double gamma3 = vs.profile.gamma3;
        const auto rep = diminishing_feasibility(c, rho_tilde, gamma3,
                                                 cfg.schedule.alpha0);
        env["feasibility"] = rep.to_json();
        SublinearEnvelope se(nu0, c, m, cfg.schedule.alpha0, cfg.schedule.gamma,
                             rho_tilde, gamma3);
        for (const auto& row : trace.rows) {
            if (row.iteration < 2) continue;
            const ErrorVector e = se.at(row.iteration);
            rows.push_back({{"iteration", row.iteration},
                            {"opt_env", e.opt_err},
                            {"cons_env", e.cons_err}});
        }
    }
    env["rows"] = rows;
    return env;
}

CellResult run_cell(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                    Variant variant, uint64_t seed, const std::string& dir)
{
    CellResult cell;
    cell.variant = variant;
    cell.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fs::create_directories(dir);

        const VariantSpec vs = make_variant(variant, setup.base_profile, setup.topology);

        RunConfig rc;
        rc.variant = vs;
        rc.schedule = cfg.schedule;
        rc.noise_mode = cfg.noise_mode;
        rc.sigma2 = cfg.sigma2;
        rc.batch_size = cfg.batch_size;
        rc.iterations = cfg.iterations;
        rc.eval_interval = cfg.eval_interval;
        rc.run_seed = seed;
        rc.init = cfg.init;
        rc.init_scale = cfg.init_scale;
        rc.test_set = setup.test ? setup.test.get() : nullptr;
        rc.eval_mode = cfg.eval_mode;

        // trace rows stream to disk as they are produced
        cell.csv_path = dir + "/metrics.csv";
        std::ofstream csv(cell.csv_path, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + cell.csv_path);
        csv << metrics_csv_header() << "\n";
        rc.on_row = [&csv](const MetricsRow& row) {
            csv << metrics_csv_line(row) << "\n";
            csv.flush();
        };

        TopologySchedule sched(setup.topology, cfg.topology_mode);
        const RunTrace trace = run(rc, sched, setup.family,
                                   setup.optimum ? &*setup.optimum : nullptr);
        rc.on_row = nullptr;
        csv.close();

        double rho_tilde = -1.0;
        nlohmann::json mixing_norms;
        if (setup.constants) {
            try {
                const MixingAnalysis an =
                    analyze_mixing(metropolis_weights(setup.topology), setup.topology,
                                   aligned_link_probabilities(vs.profile, setup.topology));
                rho_tilde = an.rho_tilde;
                mixing_norms = mixing_norms_json(an);
            } catch (const std::exception&) {
                rho_tilde = -1.0;  // no contraction certificate; no overlay
            }
        }

        nlohmann::json manifest;
        manifest["artifact_version"] = kArtifactVersion;
        manifest["variant"] = variant_name(variant);
        manifest["seed"] = seed;
        manifest["config"] = cfg.to_json();
        manifest["topology"] = topology_to_json(setup.topology);
        manifest["profile"] = profile_to_json(vs.profile);
        if (variant == Variant::DFedAvg) manifest["dfedavg_period"] = vs.dfedavg_period;
        if (setup.constants) {
            manifest["constants"] = {{"mu", setup.constants->mu},
                                     {"beta", setup.constants->beta},
                                     {"delta", setup.constants->delta},
                                     {"zeta", setup.constants->zeta},
                                     {"sigma2", setup.constants->sigma2},
                                     {"exact", setup.constants->exact}};
            if (rho_tilde >= 0.0) {
                manifest["rho_tilde"] = rho_tilde;
                manifest["mixing"] = mixing_norms;
            }
        }
        if (!trace.rows.empty() && trace.rows.back().test_accuracy) {
            cell.final_accuracy = *trace.rows.back().test_accuracy;
            manifest["final_accuracy"] = cell.final_accuracy;
        }

        if (cfg.theory_overlay && setup.constants && rho_tilde >= 0.0) {
            const nlohmann::json env = envelope_json(cfg, setup, vs, trace, rho_tilde);
            write_text(dir + "/envelope.json", env.dump(2) + "\n");
        }

        const auto t1 = std::chrono::steady_clock::now();
        manifest["elapsed_seconds"] =
            std::chrono::duration<double>(t1 - t0).count();
        write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
        cell.status = "ok";
    } catch (const std::exception& e) {
        cell.status = e.what();
    }
    return cell;
}

}  // namespace

std::optional<double> delay_to_target(const std::vector<MetricsRow>& rows, double target)
{
    std::optional<double> prev_acc;
    double prev_tau = 0.0;
    for (const auto& row : rows) {
        if (!row.test_accuracy) continue;
        const double acc = *row.test_accuracy;
        if (acc >= target) {
            if (!prev_acc || *prev_acc >= target || row.tau_cum == prev_tau)
                return row.tau_cum;
            const double f = (target - *prev_acc) / (acc - *prev_acc);
            return prev_tau + f * (row.tau_cum - prev_tau);
        }
        prev_acc = acc;
        prev_tau = row.tau_cum;
    }
    return std::nullopt;
}

ExecuteResult execute(const ExperimentConfig& cfg)
{
    const ValidationResult vr = validate(cfg);
    if (!vr.ok()) {
        std::string msg = "config validation failed:";
        for (const auto& e : vr.errors) msg += "\n  - " + e;
        throw std::runtime_error(msg);
    }

    ExecuteResult result;
    result.directory = resolve_output_dir(cfg.output_dir);
    fs::create_directories(result.directory);

    const ExperimentSetup setup = build_setup(cfg);

    nlohmann::json experiment_manifest = vr.manifest_skeleton;
    experiment_manifest["topology"] = topology_to_json(setup.topology);
    experiment_manifest["base_profile"] = profile_to_json(setup.base_profile);
    write_text(result.directory + "/manifest.json", experiment_manifest.dump(2) + "\n");

    struct Cell {
        Variant variant;
        uint64_t seed;
        std::string dir;
    };
    std::vector<Cell> cells;
    for (Variant v : cfg.variants)
        for (uint64_t s : cfg.seeds)
            cells.push_back({v, s, result.directory + "/runs/" + variant_name(v)
                                       + "_s" + std::to_string(s)});

    result.cells.resize(cells.size());
    const int workers = std::max(1, std::min<int>(cfg.parallel_cells,
                                                  static_cast<int>(cells.size())));
    if (workers == 1) {
        for (size_t i = 0; i < cells.size(); ++i)
            result.cells[i] = run_cell(cfg, setup, cells[i].variant, cells[i].seed,
                                       cells[i].dir);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < cells.size();
                     i = next.fetch_add(1))
                    result.cells[i] = run_cell(cfg, setup, cells[i].variant,
                                               cells[i].seed, cells[i].dir);
            });
        for (auto& th : pool) th.join();
    }

    // delay-to-target summary (the accuracy-vs-delay comparison statistic)
    nlohmann::json summary;
    summary["artifact_version"] = kArtifactVersion;
    std::map<uint64_t, double> dgd_final;
    for (size_t i = 0; i < cells.size(); ++i)
        if (cells[i].variant == Variant::DGD && result.cells[i].status == "ok")
            dgd_final[cells[i].seed] = result.cells[i].final_accuracy;

    auto cell_rows = nlohmann::json::array();
    for (size_t i = 0; i < cells.size(); ++i) {
        auto& cell = result.cells[i];
        nlohmann::json row;
        row["variant"] = variant_name(cell.variant);
        row["seed"] = cell.seed;
        row["status"] = cell.status;
        row["csv"] = cell.csv_path;
        if (cell.status == "ok") {
            row["final_accuracy"] = cell.final_accuracy;
            std::optional<double> target = cfg.target_accuracy;
            if (!target && cfg.target_fraction_of_dgd && dgd_final.count(cell.seed))
                target = *cfg.target_fraction_of_dgd * dgd_final[cell.seed];
            if (target) {
                row["target_accuracy"] = *target;
                const auto rows = read_metrics_csv(cell.csv_path);
                cell.delay_to_target = delay_to_target(rows, *target);
                if (cell.delay_to_target)
                    row["delay_to_target"] = *cell.delay_to_target;
                else
                    row["delay_to_target"] = nullptr;
            }
        }
        cell_rows.push_back(row);
    }
    summary["cells"] = cell_rows;
    write_text(result.directory + "/summary.json", summary.dump(2) + "\n");
    return result;
}

PlotCurve plot_curve_from_name(const std::string& name)
{
    if (name == "accuracy-vs-delay") return PlotCurve::AccuracyVsDelay;
    if (name == "error-vs-iteration") return PlotCurve::ErrorVsIteration;
    if (name == "envelope-overlay") return PlotCurve::EnvelopeOverlay;
    throw std::invalid_argument("unknown plot curve: " + name);
}

void emit_plot_data(const std::string& result_dir, PlotCurve curve,
                    const std::string& out_path)
{
    std::ifstream in(result_dir + "/summary.json");
    if (!in) throw std::runtime_error("no summary.json under " + result_dir);
    const nlohmann::json summary = nlohmann::json::parse(in);

    std::string out;
    if (curve == PlotCurve::EnvelopeOverlay)
        out = "variant,seed,iteration,opt_err,cons_err,opt_env,cons_env\n";
    else
        out = "variant,seed,x,y\n";

    for (const auto& cell : summary.at("cells")) {
        if (cell.at("status").get<std::string>() != "ok") continue;
        const std::string variant = cell.at("variant").get<std::string>();
        const uint64_t seed = cell.at("seed").get<uint64_t>();
        const std::string csv = cell.at("csv").get<std::string>();
        const auto rows = read_metrics_csv(csv);

        if (curve == PlotCurve::AccuracyVsDelay) {
            for (const auto& r : rows) {
                if (!r.test_accuracy) continue;
                out += variant + "," + std::to_string(seed) + ","
                       + std::to_string(r.tau_cum) + "," + std::to_string(*r.test_accuracy)
                       + "\n";
            }
        } else if (curve == PlotCurve::ErrorVsIteration) {
            for (const auto& r : rows) {
                const double y = r.opt_err ? *r.opt_err : r.train_loss;
                out += variant + "," + std::to_string(seed) + ","
                       + std::to_string(r.iteration) + "," + std::to_string(y) + "\n";
            }
        } else {
            const fs::path env_path = fs::path(csv).parent_path() / "envelope.json";
            if (!fs::exists(env_path)) continue;
            std::ifstream env_in(env_path);
            const nlohmann::json env = nlohmann::json::parse(env_in);
            std::map<uint64_t, std::pair<double, double>> env_rows;
            for (const auto& er : env.at("rows"))
                env_rows[er.at("iteration").get<uint64_t>()] =
                    {er.at("opt_env").get<double>(), er.at("cons_env").get<double>()};
            for (const auto& r : rows) {
                const auto it = env_rows.find(r.iteration);
                if (it == env_rows.end()) continue;
                out += variant + "," + std::to_string(seed) + ","
                       + std::to_string(r.iteration) + ","
                       + std::to_string(r.opt_err.value_or(0.0)) + ","
                       + std::to_string(r.cons_err) + ","
                       + std::to_string(it->second.first) + ","
                       + std::to_string(it->second.second) + "\n";
            }
        }
    }
    write_text(out_path, out);
}

}  // namespace dspodfl
