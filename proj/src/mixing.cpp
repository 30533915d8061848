#include "dspodfl/mixing.hpp"

#include <cmath>
#include <stdexcept>

namespace dspodfl {

BaseWeights metropolis_weights(const Topology& t)
{
    const int m = t.m;
    Matrix r(m, m);
    for (const auto& [i, j] : t.edges) {
        const double w = 1.0 / (1.0 + std::max(t.degree(i), t.degree(j)));
        r(i, j) = w;
        r(j, i) = w;
    }
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != i) s += r(i, j);
        r(i, i) = 1.0 - s;
    }
    BaseWeights bw{std::move(r)};
    validate_base_weights(bw, t);
    return bw;
}

void validate_base_weights(const BaseWeights& bw, const Topology& t, double tol)
{
    const Matrix& r = bw.r;
    const int m = r.rows();
    if (r.cols() != m || m != t.m)
        throw std::invalid_argument("base weights: shape mismatch with topology");
    for (int i = 0; i < m; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < m; ++j) {
            if (r(i, j) < 0.0)
                throw std::invalid_argument("base weights: negative entry");
            if (r(i, j) != r(j, i))
                throw std::invalid_argument("base weights: not symmetric");
            if (i != j && r(i, j) != 0.0 && !t.has_edge(i, j))
                throw std::invalid_argument("base weights: weight off the edge set");
            row += r(i, j);
            col += r(j, i);
        }
        if (std::fabs(row - 1.0) > tol || std::fabs(col - 1.0) > tol)
            throw std::invalid_argument("base weights: not doubly stochastic");
    }
}

RealizedMixing realize_mixing(const BaseWeights& bw, const Topology& t,
                              const std::vector<uint8_t>& edge_draws)
{
    if (edge_draws.size() != t.edges.size())
        throw std::invalid_argument("realize_mixing: one draw per undirected edge required");
    const int m = t.m;
    Matrix p(m, m);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        if (!edge_draws[e]) continue;
        const auto& [i, j] = t.edges[e];
        p(i, j) = bw.r(i, j);
        p(j, i) = bw.r(j, i);
    }
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != i) s += p(i, j);
        p(i, i) = 1.0 - s;
    }
    return RealizedMixing{std::move(p), edge_draws};
}

static void check_link_probabilities(const Topology& t, const LinkProbabilities& b)
{
    if (b.size() != t.edges.size())
        throw std::invalid_argument("link probabilities: one value per edge required");
    for (double v : b)
        if (!(v > 0.0) || v > 1.0)
            throw std::invalid_argument("link probabilities must lie in (0, 1]");
}

Matrix expected_mixing(const BaseWeights& bw, const Topology& t, const LinkProbabilities& b)
{
    check_link_probabilities(t, b);
    const int m = t.m;
    Matrix r_bar(m, m);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        const auto& [i, j] = t.edges[e];
        r_bar(i, j) = b[e] * bw.r(i, j);
        r_bar(j, i) = r_bar(i, j);
    }
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != i) s += r_bar(i, j);
        r_bar(i, i) = 1.0 - s;
    }
    return r_bar;
}

MixingAnalysis second_moment_mixing(const BaseWeights& bw, const Topology& t,
                                    const LinkProbabilities& b)
{
    check_link_probabilities(t, b);
    const int m = t.m;
    MixingAnalysis a;
    a.r_bar = expected_mixing(bw, t, b);

    // R_zero: off-diagonal (i,j) on an edge = -2 b (1-b) r^2, diagonal i is
    // the positive completion sum over incident edges.
    a.r_zero = Matrix(m, m);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        const auto& [i, j] = t.edges[e];
        const double v = 2.0 * b[e] * (1.0 - b[e]) * bw.r(i, j) * bw.r(i, j);
        a.r_zero(i, j) = -v;
        a.r_zero(j, i) = -v;
        a.r_zero(i, i) += v;
        a.r_zero(j, j) += v;
    }
    a.r_tilde = add(matmul(a.r_bar, a.r_bar), a.r_zero);
    return a;
}

static bool expected_graph_connected(const Topology& t, const LinkProbabilities& b)
{
    std::vector<std::pair<int, int>> live;
    for (size_t e = 0; e < t.edges.size(); ++e)
        if (b[e] > 0.0) live.push_back(t.edges[e]);
    return is_connected(make_topology(t.m, std::move(live)));
}

MixingAnalysis analyze_mixing(const BaseWeights& bw, const Topology& t,
                              const LinkProbabilities& b)
{
    MixingAnalysis a = second_moment_mixing(bw, t, b);
    if (!expected_graph_connected(t, b))
        throw std::runtime_error("mixing analysis: expected graph disconnected, "
                                 "rho_tilde would be 1");
    const int m = t.m;
    Matrix deflated = a.r_tilde;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) deflated(i, j) -= 1.0 / m;
    a.rho_tilde = spectral_radius_symmetric(deflated);
    if (a.rho_tilde >= 1.0 - 1e-12)
        throw std::runtime_error("mixing analysis: no contraction (rho_tilde = "
                                 + std::to_string(a.rho_tilde) + "); base weights "
                                 "carry no mixing on the expected graph");
    return a;
}

double consensus_contraction_factor(const BaseWeights& bw, const Topology& t,
                                    const LinkProbabilities& b)
{
    return analyze_mixing(bw, t, b).rho_tilde;
}

bool is_doubly_stochastic(const Matrix& p, double tol)
{
    const int m = p.rows();
    if (p.cols() != m) return false;
    for (int i = 0; i < m; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < m; ++j) {
            row += p(i, j);
            col += p(j, i);
        }
        if (std::fabs(row - 1.0) > tol || std::fabs(col - 1.0) > tol) return false;
    }
    return true;
}

nlohmann::json matrix_to_json(const Matrix& m)
{
    auto rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json mixing_norms_json(const MixingAnalysis& a)
{
    return {{"rho_tilde", a.rho_tilde},
            {"r_bar_frobenius", std::sqrt(frobenius_norm_sq(a.r_bar))},
            {"r_tilde_frobenius", std::sqrt(frobenius_norm_sq(a.r_tilde))},
            {"r_zero_frobenius", std::sqrt(frobenius_norm_sq(a.r_zero))}};
}

}  // namespace dspodfl
