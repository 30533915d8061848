// Benchmark: OpenMP-parallel engine step against the serial reference loop.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dspodfl/engine.hpp"

using namespace dspodfl;

namespace {

// Straight-line serial rendering of the update rule, kept as a reference.
void serial_step(Matrix& theta, const BaseWeights& r, const Topology& t,
                 const IndicatorDraw& draw, double alpha,
                 const ObjectiveFamily& fam)
{
    const int m = t.m, n = theta.cols();
    Matrix next(m, n);
    for (int i = 0; i < m; ++i) {
        const double* cur = theta.row(i);
        double* out = next.row(i);
        for (int j = 0; j < n; ++j) out[j] = cur[j];
        for (int nb : t.adjacency[i]) {
            const int e = t.edge_index(i, nb);
            if (!draw.v_hat[e]) continue;
            const double w = r.r(i, nb);
            const double* other = theta.row(nb);
            for (int j = 0; j < n; ++j) out[j] += w * (other[j] - cur[j]);
        }
        if (draw.v[i]) {
            const Vector ti(cur, cur + n);
            const Vector g = full_gradient(fam, i, ti);
            for (int j = 0; j < n; ++j) out[j] -= alpha * g[j];
        }
    }
    theta = std::move(next);
}

double now_seconds()
{
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

int main(int argc, char** argv)
{
    const int m = argc > 1 ? std::atoi(argv[1]) : 32;
    const int n = argc > 2 ? std::atoi(argv[2]) : 256;
    const int iters = argc > 3 ? std::atoi(argv[3]) : 200;

    const Topology t = regenerate_connected_rgg(m, 0.4, 42);
    const BaseWeights r = metropolis_weights(t);

    QuadraticSpec qs;
    qs.m = m;
    qs.n = n;
    qs.lambda_min = 0.5;
    qs.lambda_max = 2.0;
    qs.hessian_spread = 0.3;
    qs.linear_spread = 0.5;
    qs.seed = 1;
    const ObjectiveFamily fam = make_quadratic(qs);

    SporadicityProfile prof = sample_profile(DistributionSpec::uniform(), t, 3);

    ModelMatrix state;
    state.theta = Matrix(m, n, 0.1);
    Matrix serial_theta = state.theta;

    const double alpha = 1e-3;

    double t0 = now_seconds();
    for (int k = 0; k < iters; ++k) {
        const IndicatorDraw draw = draw_indicators(prof, t, k, 99);
        step(state, r, t, draw, alpha, fam, NoiseMode::Synthetic, 0.0, 1, 99);
    }
    const double parallel_time = now_seconds() - t0;

    t0 = now_seconds();
    for (int k = 0; k < iters; ++k) {
        const IndicatorDraw draw = draw_indicators(prof, t, k, 99);
        serial_step(serial_theta, r, t, draw, alpha, fam);
    }
    const double serial_time = now_seconds() - t0;

    const double diff = max_abs_diff(state.theta, serial_theta);
#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("m=%d n=%d iters=%d threads=%d\n", m, n, iters, threads);
    std::printf("engine step (parallel): %8.3f ms/iter\n", 1e3 * parallel_time / iters);
    std::printf("serial reference:       %8.3f ms/iter\n", 1e3 * serial_time / iters);
    std::printf("max |diff| vs serial:   %.3e\n", diff);
    return diff == 0.0 ? 0 : 1;
}
