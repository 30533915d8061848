#include "dspodfl/engine.hpp"

#include <cmath>
#include <stdexcept>

#include "dspodfl/rng.hpp"

namespace dspodfl {

double StepSchedule::at(uint64_t k) const
{
    if (mode == Mode::Constant) return alpha;
    return alpha0 / std::sqrt(1.0 + static_cast<double>(k) / gamma);
}

Variant variant_from_name(const std::string& name)
{
    if (name == "DSpodFL") return Variant::DSpodFL;
    if (name == "DGD") return Variant::DGD;
    if (name == "RG") return Variant::RG;
    if (name == "SporadicSGD") return Variant::SporadicSGD;
    if (name == "DFedAvg") return Variant::DFedAvg;
    throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v)
{
    switch (v) {
        case Variant::DSpodFL: return "DSpodFL";
        case Variant::DGD: return "DGD";
        case Variant::RG: return "RG";
        case Variant::SporadicSGD: return "SporadicSGD";
        case Variant::DFedAvg: return "DFedAvg";
    }
    return "?";
}

int dfedavg_period(const std::vector<double>& d)
{
    double s = 0.0;
    for (double v : d) s += 1.0 / v;
    return static_cast<int>(std::ceil(s / d.size()));
}

VariantSpec make_variant(Variant v, const SporadicityProfile& base, const Topology& t)
{
    VariantSpec spec;
    spec.variant = v;
    spec.profile = base;
    switch (v) {
        case Variant::DSpodFL:
            break;
        case Variant::DGD:
            std::fill(spec.profile.d.begin(), spec.profile.d.end(), 1.0);
            std::fill(spec.profile.b.begin(), spec.profile.b.end(), 1.0);
            spec.profile.d_schedule = DSchedule::Constant;
            break;
        case Variant::RG:
            std::fill(spec.profile.d.begin(), spec.profile.d.end(), 1.0);
            spec.profile.d_schedule = DSchedule::Constant;
            break;
        case Variant::SporadicSGD:
            std::fill(spec.profile.b.begin(), spec.profile.b.end(), 1.0);
            break;
        case Variant::DFedAvg:
            // deterministic schedule calibrated to the base capabilities
            spec.dfedavg_period = dfedavg_period(base.d);
            std::fill(spec.profile.d.begin(), spec.profile.d.end(), 1.0);
            std::fill(spec.profile.b.begin(), spec.profile.b.end(), 1.0);
            spec.profile.d_schedule = DSchedule::Constant;
            break;
    }
    (void)t;
    return spec;
}

IndicatorDraw variant_indicators(const VariantSpec& spec, const Topology& t,
                                 uint64_t k, uint64_t run_seed, double alpha_k)
{
    if (spec.variant == Variant::DFedAvg) {
        IndicatorDraw draw;
        draw.iteration = k;
        draw.v.assign(t.m, 1);
        draw.v_hat.assign(t.edges.size(),
                          k % static_cast<uint64_t>(spec.dfedavg_period) == 0 ? 1 : 0);
        return draw;
    }
    if (spec.profile.d_schedule == DSchedule::Diminishing) {
        SporadicityProfile p = spec.profile;
        p.d = effective_d(spec.profile, alpha_k);
        return draw_indicators(p, t, k, run_seed);
    }
    return draw_indicators(spec.profile, t, k, run_seed);
}

StepResult step(ModelMatrix& state, const BaseWeights& r, const Topology& t,
                const IndicatorDraw& draw, double alpha_k,
                const ObjectiveFamily& fam, NoiseMode noise_mode, double sigma2,
                int batch_size, uint64_t run_seed, bool want_gv_mean)
{
    const int m = t.m;
    const int n = state.theta.cols();
    if (state.theta.rows() != m)
        throw std::invalid_argument("step: model row count does not match topology");

    Matrix next(m, n);
    Matrix gradients(m, n);  // rows touched only where v_i = 1
    int bad_client = -1;     // non-finite flag, raised outside the parallel regions

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < m; ++i) {
        if (!draw.v[i]) continue;
        const Vector theta_i(state.theta.row(i), state.theta.row(i) + n);
        const StochasticGradient sg = stochastic_gradient(fam, i, theta_i, batch_size,
                                                          noise_mode, sigma2, run_seed,
                                                          state.iteration);
        double* g = gradients.row(i);
        for (int j = 0; j < n; ++j) g[j] = sg.g[j];
    }

#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* cur = state.theta.row(i);
        double* out = next.row(i);
        for (int j = 0; j < n; ++j) out[j] = cur[j];
        for (int nb : t.adjacency[i]) {  // sorted: deterministic accumulation order
            const int e = t.edge_index(i, nb);
            if (!draw.v_hat[e]) continue;
            const double w = r.r(i, nb);
            const double* other = state.theta.row(nb);
            for (int j = 0; j < n; ++j) out[j] += w * (other[j] - cur[j]);
        }
        if (draw.v[i]) {
            const double* g = gradients.row(i);
            for (int j = 0; j < n; ++j) out[j] -= alpha_k * g[j];
        }
        for (int j = 0; j < n; ++j)
            if (!std::isfinite(out[j])) {
#pragma omp atomic write
                bad_client = i;
            }
    }
    if (bad_client >= 0)
        throw std::runtime_error("step: non-finite update at iteration "
                                 + std::to_string(state.iteration) + ", client "
                                 + std::to_string(bad_client));

    StepResult res;
    if (want_gv_mean) {
        Vector gv(n, 0.0);
        for (int i = 0; i < m; ++i) {
            if (!draw.v[i]) continue;
            const double* g = gradients.row(i);
            for (int j = 0; j < n; ++j) gv[j] += g[j];
        }
        for (double& v : gv) v /= m;
        res.gv_mean = std::move(gv);
    }

    state.theta = std::move(next);
    state.iteration += 1;
    return res;
}

namespace {

uint64_t draw_digest(const IndicatorDraw& draw)
{
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
    };
    for (uint8_t b : draw.v) mix(b + 1);
    for (uint8_t b : draw.v_hat) mix(b + 3);
    return h;
}

MetricsRow evaluate_row(const RunConfig& cfg, const ModelMatrix& state,
                        const ObjectiveFamily& fam, const OptimumInfo* opt,
                        double tau_cum, const DelayStep& tau, uint64_t digest)
{
    MetricsRow row;
    row.iteration = state.iteration;
    row.tau_trans = tau.tau_trans;
    row.tau_proc = tau.tau_proc;
    row.tau_total = tau.tau_total;
    row.tau_cum = tau_cum;
    row.draw_digest = digest;

    const Vector theta_bar = row_mean(state.theta);
    row.cons_err = consensus_error(state.theta, theta_bar);
    row.train_loss = global_value(fam, theta_bar);
    if (opt) {
        Vector dev = theta_bar;
        for (size_t j = 0; j < dev.size(); ++j) dev[j] -= opt->theta_star[j];
        row.opt_err = dot(dev, dev);
        row.pl_err = row.train_loss - opt->f_star;
    }
    if (cfg.test_set && fam.is_classifier())
        row.test_accuracy = evaluate_accuracy(state.theta, fam, *cfg.test_set,
                                              cfg.eval_mode);
    return row;
}

}  // namespace

RunTrace run(const RunConfig& cfg, TopologySchedule& topology,
             const ObjectiveFamily& fam, const OptimumInfo* opt)
{
    const Topology& base = topology.base();
    const int m = base.m;
    const int n = fam.dim;
    if (fam.m != m) throw std::invalid_argument("run: family/topology client mismatch");

    // shared initial model theta^(0)
    Vector theta0(n, 0.0);
    if (cfg.init == RunConfig::Init::Gaussian)
        for (int j = 0; j < n; ++j)
            theta0[j] = cfg.init_scale * rng::gaussian(cfg.run_seed, rng::Stream::Init, 0, j);

    ModelMatrix state;
    state.theta = Matrix(m, n);
    state.iteration = 0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) state.theta(i, j) = theta0[j];

    RunTrace trace;
    trace.rng_seed = cfg.run_seed;

    double tau_cum = 0.0;
    trace.rows.push_back(evaluate_row(cfg, state, fam, opt, tau_cum, DelayStep{}, 0));
    if (cfg.on_row) cfg.on_row(trace.rows.back());

    if (cfg.retain_average_dynamics) {
        trace.theta_bar_path.push_back(row_mean(state.theta));
    }
    if (cfg.snapshot_interval > 0) trace.snapshots.emplace_back(0, state.theta);

    const bool static_topology = topology.mode() == TopologySchedule::Mode::Static;
    const BaseWeights static_weights = static_topology ? metropolis_weights(base)
                                                       : BaseWeights{};

    BaseWeights dynamic_weights;
    for (uint64_t k = 0; k < cfg.iterations; ++k) {
        const Topology& t = static_topology ? base : topology.at_iteration(k);
        if (!static_topology) dynamic_weights = metropolis_weights(t);
        const BaseWeights& weights = static_topology ? static_weights : dynamic_weights;

        const double alpha_k = cfg.schedule.at(k);
        const IndicatorDraw draw = variant_indicators(cfg.variant, t, k, cfg.run_seed,
                                                      alpha_k);
        const std::vector<double> d_eff =
            cfg.variant.variant == Variant::DFedAvg
                ? std::vector<double>(m, 1.0)
                : effective_d(cfg.variant.profile, alpha_k);
        const DelayStep tau = delay_step(draw, d_eff, cfg.variant.profile, t);
        tau_cum += tau.tau_total;

        const bool retain = cfg.retain_average_dynamics
                            && k < cfg.retain_limit;
        const StepResult sr = step(state, weights, t, draw, alpha_k, fam,
                                   cfg.noise_mode, cfg.sigma2, cfg.batch_size,
                                   cfg.run_seed, retain);
        if (retain) {
            trace.theta_bar_path.push_back(row_mean(state.theta));
            trace.gv_mean_path.push_back(*sr.gv_mean);
            trace.alpha_path.push_back(alpha_k);
        }
        if (cfg.snapshot_interval > 0 && state.iteration % cfg.snapshot_interval == 0)
            trace.snapshots.emplace_back(state.iteration, state.theta);

        if (state.iteration % cfg.eval_interval == 0
            || state.iteration == cfg.iterations) {
            trace.rows.push_back(evaluate_row(cfg, state, fam, opt, tau_cum, tau,
                                              draw_digest(draw)));
            if (cfg.on_row) cfg.on_row(trace.rows.back());
        }
    }

    trace.final_theta = state.theta;
    return trace;
}

double average_dynamics_check(const RunTrace& trace)
{
    if (trace.theta_bar_path.empty() || trace.gv_mean_path.empty())
        throw std::invalid_argument("average_dynamics_check: trace did not retain "
                                    "average dynamics");
    double worst = 0.0;
    for (size_t k = 0; k < trace.gv_mean_path.size(); ++k) {
        const Vector& prev = trace.theta_bar_path[k];
        const Vector& next = trace.theta_bar_path[k + 1];
        const Vector& gv = trace.gv_mean_path[k];
        double dev = 0.0;
        for (size_t j = 0; j < prev.size(); ++j) {
            const double predicted = prev[j] - trace.alpha_path[k] * gv[j];
            dev += (next[j] - predicted) * (next[j] - predicted);
        }
        worst = std::max(worst, std::sqrt(dev));
    }
    return worst;
}

}  // namespace dspodfl
