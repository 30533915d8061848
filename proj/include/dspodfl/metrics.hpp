#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dspodfl/graph.hpp"
#include "dspodfl/linalg.hpp"
#include "dspodfl/objectives.hpp"
#include "dspodfl/sporadic.hpp"

namespace dspodfl {

// One evaluation record. Also the CSV row schema (column order fixed):
// iteration, tau_trans, tau_proc, tau_total, tau_cum,
// cons_err, opt_err, pl_err, train_loss, test_accuracy.
struct MetricsRow {
    uint64_t iteration = 0;
    double tau_trans = 0.0;
    double tau_proc = 0.0;
    double tau_total = 0.0;
    double tau_cum = 0.0;
    double cons_err = 0.0;
    std::optional<double> opt_err;
    std::optional<double> pl_err;
    double train_loss = 0.0;
    std::optional<double> test_accuracy;
    uint64_t draw_digest = 0;  // manifest-side trace fingerprint, not in the CSV
};

// ||Theta - 1 theta_bar||_F^2
double consensus_error(const Matrix& theta);
double consensus_error(const Matrix& theta, const Vector& theta_bar);

struct DelayStep {
    double tau_trans = 0.0;
    double tau_proc = 0.0;
    double tau_total = 0.0;
};

// Normalized per-iteration delay: transmission term weighted by 1/|N_i| per
// link, processing term weighted by 1/d_i per client. Isolated clients
// contribute zero to both transmission sums.
DelayStep delay_step(const IndicatorDraw& draw, const std::vector<double>& effective_d,
                     const SporadicityProfile& profile, const Topology& t);

// Classifier accuracy. AverageModel mode classifies with theta_bar;
// PerClientMean averages the per-client accuracies over rows of theta.
double evaluate_accuracy(const Vector& theta, const ObjectiveFamily& fam,
                         const Dataset& test_set);
double evaluate_accuracy(const Matrix& theta_rows, const ObjectiveFamily& fam,
                         const Dataset& test_set, EvalMode mode);

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace dspodfl
