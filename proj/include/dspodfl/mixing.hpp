#pragma once

#include <map>
#include <utility>
#include <vector>

#include "dspodfl/graph.hpp"
#include "dspodfl/linalg.hpp"

namespace dspodfl {

// Symmetric doubly-stochastic base mixing weights R over a topology.
// r_ij = 0 off the edge set; diagonals are completions to row sum 1.
struct BaseWeights {
    Matrix r;  // m x m

    int m() const { return r.rows(); }
};

// One realized mixing matrix P built from R and symmetric 0/1 link draws.
struct RealizedMixing {
    Matrix p;
    std::vector<uint8_t> link_draws;  // aligned with topology edge order
};

// First/second moments of P and the consensus contraction factor of the
// expected-mixing analysis: R_bar = E[P], R_tilde = E[P^2] = R_bar^2 + R_zero,
// rho_tilde = spectral radius of R_tilde - (1/m) 1 1^T.
struct MixingAnalysis {
    Matrix r_bar;
    Matrix r_tilde;
    Matrix r_zero;
    double rho_tilde = 0.0;
};

// Metropolis-Hastings weights: r_ij = 1 / (1 + max(|N_i|, |N_j|)) on edges.
BaseWeights metropolis_weights(const Topology& t);

// Base weights validation (doubly stochastic within 1e-12, symmetric,
// support confined to edges, nonnegative entries). Throws on violation.
void validate_base_weights(const BaseWeights& r, const Topology& t, double tol = 1e-12);

// Per-edge aggregation probabilities in (0,1], aligned with topology edges.
using LinkProbabilities = std::vector<double>;

RealizedMixing realize_mixing(const BaseWeights& r, const Topology& t,
                              const std::vector<uint8_t>& edge_draws);

Matrix expected_mixing(const BaseWeights& r, const Topology& t,
                       const LinkProbabilities& b);

// Populates r_bar, r_tilde, r_zero (no spectral factor).
MixingAnalysis second_moment_mixing(const BaseWeights& r, const Topology& t,
                                    const LinkProbabilities& b);

// Full analysis including rho_tilde. Errors when the expected graph
// (edges with b_ij > 0) is disconnected or the deflated radius reaches 1.
MixingAnalysis analyze_mixing(const BaseWeights& r, const Topology& t,
                              const LinkProbabilities& b);

double consensus_contraction_factor(const BaseWeights& r, const Topology& t,
                                    const LinkProbabilities& b);

bool is_doubly_stochastic(const Matrix& p, double tol = 1e-12);

// Dense JSON export for debugging dumps of R, R_bar, R_tilde, R_zero.
nlohmann::json matrix_to_json(const Matrix& m);

// Frobenius norms of the analysis matrices for the run manifest.
nlohmann::json mixing_norms_json(const MixingAnalysis& a);

}  // namespace dspodfl
