#include "dspodfl/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dspodfl {
namespace theory {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_common(const TheoryConstants& c, double d_min, double d_max,
                  double rho_tilde)
{
    if (!(c.mu > 0.0) || c.beta < c.mu)
        throw std::invalid_argument("theory: need 0 < mu <= beta");
    if (!(d_min > 0.0) || d_min > d_max || d_max > 1.0)
        throw std::invalid_argument("theory: need 0 < d_min <= d_max <= 1");
    if (rho_tilde < 0.0 || rho_tilde >= 1.0)
        throw std::invalid_argument("theory: need 0 <= rho_tilde < 1");
}

double safe_mul(double a, double b)
{
    return b == 0.0 ? 0.0 : a * b;  // 0 * inf treated as 0 in envelope assembly
}

}  // namespace

nlohmann::json FeasibilityReport::to_json() const
{
    nlohmann::json j;
    j["alpha_max"] = std::isinf(alpha_max) ? nlohmann::json("inf")
                                           : nlohmann::json(alpha_max);
    auto terms_json = nlohmann::json::object();
    for (const auto& [name, value] : terms)
        terms_json[name] = std::isinf(value) ? nlohmann::json("inf")
                                             : nlohmann::json(value);
    j["terms"] = terms_json;
    j["gamma1"] = gamma1;
    j["gamma2_star"] = std::isinf(gamma2_star) ? nlohmann::json("inf")
                                               : nlohmann::json(gamma2_star);
    j["gamma3"] = gamma3;
    return j;
}

// ---- constant-step strongly convex regime ----------------------------------

PhiPsi phi_psi_convex(const TheoryConstants& c, double alpha, double d_min,
                      double d_max, double rho_tilde, int m)
{
    check_common(c, d_min, d_max, rho_tilde);
    if (alpha < 0.0) throw std::invalid_argument("phi_psi_convex: alpha must be >= 0");

    const double mu = c.mu, beta2 = c.beta * c.beta;
    const double ma = mu * alpha;
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);

    PhiPsi r;
    r.regime = Regime::Convex;
    r.phi[0][0] = 1.0 - ma * (1.0 + ma - ma * ma)
                  + (2.0 * alpha / mu) * (1.0 + ma) * (1.0 - d_min) * beta2;
    r.phi[0][1] = (1.0 + ma) * alpha * d_max * beta2 / (m * mu);
    r.phi[1][0] = 3.0 * ratio * m * d_max * alpha * alpha
                  * (c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min));
    r.phi[1][1] = 0.5 * (1.0 + rho_tilde)
                  + 3.0 * ratio * d_max * alpha * alpha * (c.zeta * c.zeta + 2.0 * beta2);
    r.psi[0] = (2.0 * alpha / mu) * (1.0 + ma) * (1.0 - d_min) * c.delta * c.delta
               + alpha * alpha * d_max * c.sigma2 / m;
    r.psi[1] = m * alpha * alpha * d_max
               * (3.0 * ratio * c.delta * c.delta + c.sigma2);
    return r;
}

Gamma2 gamma2_star_convex(const TheoryConstants& c, double d_min, double d_max,
                          double rho_tilde, double gamma1)
{
    check_common(c, d_min, d_max, rho_tilde);
    if (!(gamma1 > 0.0)) throw std::invalid_argument("gamma2_star: gamma1 must be > 0");

    const double w = c.zeta * c.zeta + 2.0 * c.beta * c.beta * (1.0 - d_min);
    // (gamma2* - 1)(1 - d_min) = W^{1/3} / D^{2/3}; the cube-root structure makes
    // the product continuous in d_min while gamma2* itself diverges at d_min = 1.
    const double d_coef = 4.0 * (1.0 + gamma1) * c.beta * c.beta * (1.0 - rho_tilde)
                          / (std::sqrt(6.0) * d_max * std::pow(1.0 + rho_tilde, 1.5) * c.mu);
    Gamma2 g;
    g.product = std::cbrt(w) / std::pow(d_coef, 2.0 / 3.0);
    g.gamma2_star = d_min < 1.0 ? 1.0 + g.product / (1.0 - d_min) : kInf;
    return g;
}

FeasibilityReport max_step_convex(const TheoryConstants& c, double d_min,
                                  double d_max, double rho_tilde, double gamma1)
{
    check_common(c, d_min, d_max, rho_tilde);
    const double beta2 = c.beta * c.beta;
    const double w = c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min);

    FeasibilityReport rep;
    rep.gamma1 = gamma1;
    rep.gamma2_star = gamma2_star_convex(c, d_min, d_max, rho_tilde, gamma1).gamma2_star;

    const double t1 = gamma1 / c.mu;
    const double t2 = (1.0 / (2.0 * std::sqrt(3.0 * d_max)))
                      * ((1.0 - rho_tilde) / std::sqrt(1.0 + rho_tilde))
                      / std::sqrt(c.zeta * c.zeta + 2.0 * beta2);
    const double t3 = w > 0.0
        ? std::cbrt(c.mu / (6.0 * (1.0 + gamma1) * w))
              * std::pow((1.0 - rho_tilde) / (2.0 * d_max * c.beta), 2.0 / 3.0)
        : kInf;

    rep.terms = {{"mu_term", t1}, {"consensus_term", t2}, {"cross_term", t3}};
    rep.alpha_max = std::min({t1, t2, t3});
    return rep;
}

double dominant_eigenvalue_2x2(const double phi[2][2])
{
    const double tr = phi[0][0] + phi[1][1];
    const double diff = phi[0][0] - phi[1][1];
    const double disc = diff * diff + 4.0 * phi[0][1] * phi[1][0];
    return 0.5 * (tr + std::sqrt(std::max(disc, 0.0)));
}

namespace {

double closed_form_rho(double rho_tilde, double a, double b, double c, double alpha)
{
    const double s = a * alpha + b * alpha * alpha;
    const double inner = 0.5 * (1.0 - rho_tilde) - 2.0 * s;
    return 0.25 * (3.0 + rho_tilde) - a * alpha + b * alpha * alpha
           + 0.5 * std::sqrt(inner * inner + c * alpha * alpha * alpha);
}

}  // namespace

SpectralRadius spectral_radius_phi_convex(const TheoryConstants& c, double alpha,
                                          double d_min, double d_max,
                                          double rho_tilde, int m, double gamma1)
{
    check_common(c, d_min, d_max, rho_tilde);
    const double beta2 = c.beta * c.beta;
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double w = c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min);
    const Gamma2 g2 = gamma2_star_convex(c, d_min, d_max, rho_tilde, gamma1);

    SpectralRadius s;
    s.a = (1.0 + gamma1) / c.mu * beta2 * g2.product;
    s.b = 1.5 * ratio * d_max * (c.zeta * c.zeta + 2.0 * beta2);
    s.c = 12.0 * (1.0 + gamma1) * (beta2 / c.mu) * ratio * d_max * d_max * w;
    s.value = closed_form_rho(rho_tilde, s.a, s.b, s.c, alpha);

    s.phi[0][0] = 1.0 - 2.0 * s.a * alpha;
    s.phi[0][1] = (1.0 + gamma1) * d_max * beta2 * alpha / (m * c.mu);
    s.phi[1][0] = 3.0 * ratio * m * d_max * alpha * alpha * w;
    s.phi[1][1] = 0.5 * (1.0 + rho_tilde) + 2.0 * s.b * alpha * alpha;
    return s;
}

ErrorVector envelope_at_iteration(const ErrorVector& nu0, double rho_phi,
                                  const double psi[2], uint64_t k)
{
    if (rho_phi >= 1.0)
        throw std::invalid_argument("geometric envelope requires rho(Phi) < 1");
    const double decay = std::pow(rho_phi, static_cast<double>(k));
    const double tail = 1.0 / (1.0 - rho_phi);
    ErrorVector e;
    e.opt_err = safe_mul(decay, nu0.opt_err) + safe_mul(tail, psi[0]);
    e.cons_err = safe_mul(decay, nu0.cons_err) + safe_mul(tail, psi[1]);
    return e;
}

ErrorVector geometric_envelope(const ErrorVector& nu0, double rho_phi,
                               const double psi[2], uint64_t k)
{
    return envelope_at_iteration(nu0, rho_phi, psi, k + 1);
}

ErrorVector asymptotic_gap_convex(const TheoryConstants& c, double alpha,
                                  double d_min, double d_max, double rho_tilde,
                                  int m, double rho_phi)
{
    check_common(c, d_min, d_max, rho_tilde);
    if (rho_phi >= 1.0)
        throw std::invalid_argument("asymptotic gap requires rho(Phi) < 1");
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double pre = alpha / (1.0 - rho_phi);
    ErrorVector gap;
    gap.opt_err = pre * ((2.0 / c.mu) * (1.0 + c.mu * alpha) * (1.0 - d_min)
                             * c.delta * c.delta
                         + alpha * d_max * c.sigma2 / m);
    gap.cons_err = pre * m * alpha * d_max
                   * (3.0 * ratio * c.delta * c.delta + c.sigma2);
    return gap;
}

// ---- constant-step PL regime -------------------------------------------------

double pl_participation_floor(const TheoryConstants& c)
{
    return 1.0 - c.mu * c.mu / (2.0 * c.beta * c.beta);
}

namespace {

void check_pl_floor(const TheoryConstants& c, double d_min)
{
    const double floor = pl_participation_floor(c);
    if (d_min <= floor)
        throw std::invalid_argument(
            "PL regime infeasible: d_min = " + std::to_string(d_min)
            + " is at or below the participation floor 1 - mu^2/(2 beta^2) = "
            + std::to_string(floor));
}

}  // namespace

PhiPsi phi_psi_pl(const TheoryConstants& c, double alpha, double d_min,
                  double d_max, double rho_tilde, int m)
{
    check_common(c, d_min, d_max, rho_tilde);
    check_pl_floor(c, d_min);
    if (alpha < 0.0) throw std::invalid_argument("phi_psi_pl: alpha must be >= 0");

    const double mu = c.mu, beta = c.beta, beta2 = beta * beta;
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double contraction = 1.0 - (2.0 * beta2 / (mu * mu)) * (1.0 - d_min);

    PhiPsi r;
    r.regime = Regime::Pl;
    r.phi[0][0] = 1.0 + (2.0 * beta2 * beta / mu) * (3.0 - 2.0 * d_min) * alpha * alpha
                  - mu * alpha * contraction;
    r.phi[0][1] = (beta2 * d_max / (2.0 * m)) * alpha * (1.0 + 2.0 * beta * alpha);
    r.phi[1][0] = (6.0 / mu) * ratio * m * d_max * alpha * alpha
                  * (c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min));
    r.phi[1][1] = 0.5 * (1.0 + rho_tilde)
                  + 3.0 * ratio * d_max * alpha * alpha * (c.zeta * c.zeta + 2.0 * beta2);
    r.psi[0] = 0.5 * beta * alpha * alpha
               * (4.0 * (1.0 - d_min) * c.delta * c.delta + d_max * c.sigma2 / m);
    r.psi[1] = m * alpha * alpha * d_max
               * (3.0 * ratio * c.delta * c.delta + c.sigma2);
    return r;
}

FeasibilityReport max_step_pl(const TheoryConstants& c, double d_min, double d_max,
                              double rho_tilde)
{
    check_common(c, d_min, d_max, rho_tilde);
    check_pl_floor(c, d_min);
    const double mu = c.mu, beta = c.beta, beta2 = beta * beta;
    const double contraction = 1.0 - (2.0 * beta2 / (mu * mu)) * (1.0 - d_min);
    const double w = c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min);

    const double t1 = contraction / (10.0 * (3.0 - 2.0 * d_min)) * (mu * mu / (beta2 * beta));
    const double t2 = 5.0 * (1.0 + rho_tilde) / (8.0 * mu * contraction);
    // the heterogeneity ratio zeta^2 / (zeta^2 + 2 beta^2 (1 - d_min)), with the
    // d_min = 1 limit taken first when both vanish
    const double het = w > 0.0 ? c.zeta * c.zeta / w : 1.0;
    const double t3 = (1.0 / (6.0 * std::sqrt(2.0 * d_max))) * (mu / beta2)
                      * ((1.0 - rho_tilde) / std::sqrt(1.0 + rho_tilde))
                      * std::sqrt(contraction * het);

    FeasibilityReport rep;
    rep.gamma1 = 0.2;
    rep.terms = {{"smoothness_term", t1}, {"det_term", t2}, {"cross_term", t3}};
    rep.alpha_max = std::min({t1, t2, t3});
    return rep;
}

SpectralRadius spectral_radius_phi_pl(const TheoryConstants& c, double alpha,
                                      double d_min, double d_max, double rho_tilde,
                                      int m, double gamma1)
{
    check_common(c, d_min, d_max, rho_tilde);
    check_pl_floor(c, d_min);
    const double mu = c.mu, beta2 = c.beta * c.beta;
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double contraction = 1.0 - (2.0 * beta2 / (mu * mu)) * (1.0 - d_min);
    const double w = c.zeta * c.zeta + 2.0 * beta2 * (1.0 - d_min);

    SpectralRadius s;
    s.a = 0.5 * (1.0 - gamma1) * contraction * mu;
    s.b = 1.5 * ratio * (c.zeta * c.zeta + 2.0 * beta2);
    s.c = 12.0 * (1.0 + gamma1) * (beta2 / mu) * ratio * d_max * d_max * w;
    s.value = closed_form_rho(rho_tilde, s.a, s.b, s.c, alpha);

    s.phi[0][0] = 1.0 - 2.0 * s.a * alpha;
    s.phi[0][1] = (beta2 * d_max / (2.0 * m)) * (1.0 + gamma1) * alpha;
    s.phi[1][0] = (6.0 / mu) * ratio * m * d_max * alpha * alpha * w;
    s.phi[1][1] = 0.5 * (1.0 + rho_tilde) + 2.0 * s.b * alpha * alpha;
    return s;
}

ErrorVector asymptotic_gap_pl(const TheoryConstants& c, double alpha, double d_min,
                              double d_max, double rho_tilde, int m, double rho_phi)
{
    check_common(c, d_min, d_max, rho_tilde);
    if (rho_phi >= 1.0)
        throw std::invalid_argument("asymptotic gap requires rho(Phi) < 1");
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double pre = alpha * alpha / (1.0 - rho_phi);
    ErrorVector gap;
    gap.opt_err = pre * 0.5 * c.beta
                  * (4.0 * (1.0 - d_min) * c.delta * c.delta + d_max * c.sigma2 / m);
    gap.cons_err = pre * m * d_max * (3.0 * ratio * c.delta * c.delta + c.sigma2);
    return gap;
}

// ---- diminishing-step regime -------------------------------------------------

double default_gamma1_diminishing(const TheoryConstants& c, double gamma3)
{
    return 0.5 / (1.0 + 2.0 * c.beta * c.beta * gamma3 / (c.mu * c.mu));
}

double gamma2_product_diminishing(const TheoryConstants& c, double rho_tilde,
                                  double gamma1, double gamma3)
{
    const double w3 = c.zeta * c.zeta + 2.0 * gamma3 * gamma1 * c.beta * c.beta / c.mu;
    const double first = 6.0 * (1.0 + rho_tilde) * w3
                         / (gamma1 * (1.0 - rho_tilde) * (1.0 - rho_tilde));
    const double second = c.mu * (1.0 + rho_tilde)
                          / (4.0 * gamma1 * (1.0 + gamma1) * c.beta * c.beta);
    return std::cbrt(first) * std::pow(second, 2.0 / 3.0);
}

FeasibilityReport diminishing_feasibility(const TheoryConstants& c, double rho_sup,
                                          double gamma3, double alpha0)
{
    if (rho_sup < 0.0 || rho_sup >= 1.0)
        throw std::invalid_argument("diminishing_feasibility: need 0 <= rho_sup < 1");
    if (!(alpha0 > 0.0))
        throw std::invalid_argument("diminishing_feasibility: alpha0 must be > 0");
    if (gamma3 < 0.0 || gamma3 > 1.0 / alpha0)
        throw std::invalid_argument("diminishing_feasibility: gamma3 must lie in "
                                    "[0, 1/alpha0]");

    const double gamma1 = default_gamma1_diminishing(c, gamma3);
    const double w3 = c.zeta * c.zeta + 2.0 * gamma3 * gamma1 * c.beta * c.beta / c.mu;

    const double t1 = gamma1 / c.mu;
    const double t2 = (1.0 / (2.0 * std::sqrt(3.0)))
                      * ((1.0 - rho_sup) / std::sqrt(1.0 + rho_sup))
                      / std::sqrt(c.zeta * c.zeta + 2.0 * c.beta * c.beta);
    const double t3 = w3 > 0.0
        ? std::cbrt(c.mu / (6.0 * w3 * (1.0 + gamma1)))
              * std::pow((1.0 - rho_sup) / (2.0 * c.beta), 2.0 / 3.0)
        : kInf;

    FeasibilityReport rep;
    rep.gamma1 = gamma1;
    rep.gamma3 = gamma3;
    rep.gamma2_star = gamma3 > 0.0
        ? 1.0 + gamma2_product_diminishing(c, rho_sup, gamma1, gamma3) / gamma3
        : kInf;
    rep.terms = {{"mu_term", t1}, {"consensus_term", t2}, {"cross_term", t3}};
    rep.alpha_max = std::min({t1, t2, t3});
    return rep;
}

SpectralRadius spectral_radius_phi_diminishing(const TheoryConstants& c, double alpha_k,
                                               double rho_tilde, double gamma1,
                                               double gamma3, int m)
{
    const double beta2 = c.beta * c.beta;
    const double ratio = (1.0 + rho_tilde) / (1.0 - rho_tilde);
    const double w3 = c.zeta * c.zeta + 2.0 * gamma3 * gamma1 * beta2 / c.mu;

    SpectralRadius s;
    s.a = gamma1 * (1.0 + gamma1) * beta2 / c.mu
          * gamma2_product_diminishing(c, rho_tilde, gamma1, gamma3);
    s.b = 1.5 * ratio * (c.zeta * c.zeta + 2.0 * beta2);
    s.c = 12.0 * (1.0 + gamma1) * (beta2 / c.mu) * ratio * w3;
    s.value = closed_form_rho(rho_tilde, s.a, s.b, s.c, alpha_k);

    s.phi[0][0] = 1.0 - 2.0 * s.a * alpha_k;
    s.phi[0][1] = (1.0 + gamma1) * beta2 * alpha_k / (m * c.mu);
    s.phi[1][0] = 3.0 * ratio * m * alpha_k * alpha_k * w3;
    s.phi[1][1] = 0.5 * (1.0 + rho_tilde) + 2.0 * s.b * alpha_k * alpha_k;
    return s;
}

double contraction_gain_h(const TheoryConstants& c, double alpha_k, double rho_tilde,
                          double gamma1, double gamma3)
{
    const SpectralRadius s = spectral_radius_phi_diminishing(c, alpha_k, rho_tilde,
                                                             gamma1, gamma3, 1);
    return 1.0 - s.value;
}

SublinearEnvelope::SublinearEnvelope(const ErrorVector& nu0, const TheoryConstants& c,
                                     int m, double alpha0, double gamma,
                                     double rho_sup, double gamma3)
    : nu0_(nu0), c_(c), m_(m), alpha0_(alpha0), gamma_(gamma), rho_sup_(rho_sup),
      gamma3_(gamma3)
{
    if (!(gamma > 0.0))
        throw std::invalid_argument("sublinear envelope: gamma must be > 0");
    gamma1_ = default_gamma1_diminishing(c, gamma3);
    a_ = gamma1_ * (1.0 + gamma1_) * c.beta * c.beta / c.mu
         * gamma2_product_diminishing(c, rho_sup, gamma1_, gamma3);

    const double ratio = (1.0 + rho_sup) / (1.0 - rho_sup);
    w1_ = (2.0 / (c.mu * alpha0)) * (1.0 + c.mu * alpha0) * c.delta * c.delta
          + c.sigma2 / m;
    w2_ = m * (3.0 * ratio * c.delta * c.delta + c.sigma2);
    psi1_ = (2.0 * gamma3 / c.mu) * (1.0 + gamma1_) * c.delta * c.delta + c.sigma2 / m;
    psi2_ = w2_;
}

double SublinearEnvelope::alpha_at(uint64_t k) const
{
    return alpha0_ / std::sqrt(1.0 + static_cast<double>(k) / gamma_);
}

ErrorVector SublinearEnvelope::at(uint64_t k)
{
    if (k < 2)
        throw std::invalid_argument("sublinear envelope: defined for k >= 2 only");

    if (k + 1 < h_upto_)
        throw std::invalid_argument("sublinear envelope: evaluate on an ascending grid");
    for (uint64_t q = h_upto_; q <= k; ++q)
        h_sum_ += std::max(contraction_gain_h(c_, alpha_at(q), rho_sup_, gamma1_, gamma3_),
                           0.0);
    h_upto_ = k + 1;

    const double sqrt_k = std::sqrt(1.0 + static_cast<double>(k) / gamma_);
    const double sqrt_1 = std::sqrt(1.0 + 1.0 / gamma_);

    // product bound applied to h itself
    const double product_term = h_sum_ > 0.0 ? 1.0 / h_sum_ : kInf;

    // closed-form triple-sum bound
    const double log_tail =
        -std::log(std::expm1(0.5 * std::log1p(1.0 / (gamma_ + static_cast<double>(k) - 1.0))));
    const double bracket = 1.0 / (sqrt_k - sqrt_1)
                           + (2.0 * (gamma_ + 1.0) / sqrt_k) * (std::log(sqrt_k) + log_tail)
                           + 2.0 * sqrt_k / (1.0 + (static_cast<double>(k) - 1.0) / gamma_);
    const double sum_term = a_ > 0.0 ? alpha0_ / (4.0 * a_) * bracket : kInf;

    const double tail_scale = alpha0_ * alpha0_ / (1.0 + static_cast<double>(k) / gamma_);

    ErrorVector e;
    e.opt_err = safe_mul(product_term, nu0_.opt_err) + safe_mul(sum_term, w1_)
                + tail_scale * psi1_;
    e.cons_err = safe_mul(product_term, nu0_.cons_err) + safe_mul(sum_term, w2_)
                 + tail_scale * psi2_;
    return e;
}

}  // namespace theory
}  // namespace dspodfl
