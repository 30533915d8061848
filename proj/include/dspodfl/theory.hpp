#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspodfl/objectives.hpp"

namespace dspodfl {
namespace theory {

enum class Regime { Convex, Pl };

// 2x2 error-recursion coefficients: nu^{k+1} <= phi nu^k + psi.
struct PhiPsi {
    double phi[2][2] = {{0, 0}, {0, 0}};
    double psi[2] = {0, 0};
    Regime regime = Regime::Convex;
};

// (average-model error, consensus error); the first component is
// ||theta_bar - theta*||^2 in the convex regime and F(theta_bar) - F* under PL.
struct ErrorVector {
    double opt_err = 0.0;
    double cons_err = 0.0;
};

struct FeasibilityReport {
    double alpha_max = 0.0;
    std::vector<std::pair<std::string, double>> terms;  // +inf terms dropped from the min
    double gamma1 = 1.0;
    double gamma2_star = 0.0;
    double gamma3 = 0.0;
    bool feasible(double alpha) const { return alpha > 0.0 && alpha < alpha_max; }
    nlohmann::json to_json() const;
};

// ---- constant-step strongly convex regime ----------------------------------

PhiPsi phi_psi_convex(const TheoryConstants& c, double alpha, double d_min,
                      double d_max, double rho_tilde, int m);

// Step-size optimizer constant of the closed-form spectral radius. gamma2_star
// diverges as d_min -> 1; the product (gamma2_star - 1)(1 - d_min) stays finite
// and is what the closed form consumes.
struct Gamma2 {
    double gamma2_star = 0.0;  // +inf at d_min = 1
    double product = 0.0;      // (gamma2_star - 1) * (1 - d_min), continuous
};

Gamma2 gamma2_star_convex(const TheoryConstants& c, double d_min, double d_max,
                          double rho_tilde, double gamma1 = 1.0);

FeasibilityReport max_step_convex(const TheoryConstants& c, double d_min,
                                  double d_max, double rho_tilde,
                                  double gamma1 = 1.0);

// Closed-form rho(Phi) together with the 2x2 matrix whose dominant eigenvalue
// it is (the step-size-simplified recursion coefficients), for cross-checks.
struct SpectralRadius {
    double value = 0.0;       // >= 1 signals an infeasible step (warning, not error)
    double a = 0.0, b = 0.0, c = 0.0;  // the alpha-polynomial coefficients
    double phi[2][2] = {{0, 0}, {0, 0}};
};

SpectralRadius spectral_radius_phi_convex(const TheoryConstants& c, double alpha,
                                          double d_min, double d_max,
                                          double rho_tilde, int m,
                                          double gamma1 = 1.0);

double dominant_eigenvalue_2x2(const double phi[2][2]);

// Geometric envelope: bound on nu^{k+1} given rho(Phi) and Psi.
ErrorVector geometric_envelope(const ErrorVector& nu0, double rho_phi,
                               const double psi[2], uint64_t k);
// Bound on nu^{k} itself (k >= 0); geometric_envelope(k) == at_iteration(k+1).
ErrorVector envelope_at_iteration(const ErrorVector& nu0, double rho_phi,
                                  const double psi[2], uint64_t k);

ErrorVector asymptotic_gap_convex(const TheoryConstants& c, double alpha,
                                  double d_min, double d_max, double rho_tilde,
                                  int m, double rho_phi);

// ---- constant-step PL (non-convex) regime -----------------------------------

// participation floor: d_min must exceed 1 - mu^2 / (2 beta^2)
double pl_participation_floor(const TheoryConstants& c);

PhiPsi phi_psi_pl(const TheoryConstants& c, double alpha, double d_min,
                  double d_max, double rho_tilde, int m);

FeasibilityReport max_step_pl(const TheoryConstants& c, double d_min, double d_max,
                              double rho_tilde);

SpectralRadius spectral_radius_phi_pl(const TheoryConstants& c, double alpha,
                                      double d_min, double d_max, double rho_tilde,
                                      int m, double gamma1 = 0.2);

ErrorVector asymptotic_gap_pl(const TheoryConstants& c, double alpha, double d_min,
                              double d_max, double rho_tilde, int m, double rho_phi);

// ---- diminishing-step regime -------------------------------------------------

// Default gamma1: midpoint of the admissible interval (0, 1/(1 + 2 beta^2 gamma3 / mu^2)).
double default_gamma1_diminishing(const TheoryConstants& c, double gamma3);

// gamma3 * (gamma2_star - 1), evaluated in the gamma3 -> 0 stable form.
double gamma2_product_diminishing(const TheoryConstants& c, double rho_tilde,
                                  double gamma1, double gamma3);

FeasibilityReport diminishing_feasibility(const TheoryConstants& c, double rho_sup,
                                          double gamma3, double alpha0);

// h(alpha_k) with rho(Phi^k) = 1 - h(alpha_k); <= 0 signals infeasibility.
double contraction_gain_h(const TheoryConstants& c, double alpha_k, double rho_tilde,
                          double gamma1, double gamma3);

// Tightened 2x2 matrix of the diminishing regime at alpha_k (for eigen cross-checks).
SpectralRadius spectral_radius_phi_diminishing(const TheoryConstants& c, double alpha_k,
                                               double rho_tilde, double gamma1,
                                               double gamma3, int m);

// Fully explicit sublinear envelope of the diminishing-step bound: a product
// term over 1 - h, a triple-sum term in closed form, and the Psi tail. Valid
// for k >= 2; evaluate on an ascending iteration grid (h sums accumulate).
class SublinearEnvelope {
public:
    SublinearEnvelope(const ErrorVector& nu0, const TheoryConstants& c, int m,
                      double alpha0, double gamma, double rho_sup, double gamma3);

    ErrorVector at(uint64_t k);  // k >= 2, nondecreasing across calls

    double alpha_at(uint64_t k) const;
    double a_constant() const { return a_; }

private:
    ErrorVector nu0_;
    TheoryConstants c_;
    int m_;
    double alpha0_, gamma_, rho_sup_, gamma3_, gamma1_, a_;
    double w1_ = 0.0, w2_ = 0.0;        // triple-sum weight vector
    double psi1_ = 0.0, psi2_ = 0.0;    // Psi tail weights (before the alpha^2 factor)
    double h_sum_ = 0.0;
    uint64_t h_upto_ = 0;               // h accumulated for q < h_upto_
};

}  // namespace theory
}  // namespace dspodfl
