#include "dspodfl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dspodfl {

double consensus_error(const Matrix& theta)
{
    return consensus_error(theta, row_mean(theta));
}

double consensus_error(const Matrix& theta, const Vector& theta_bar)
{
    double s = 0.0;
    for (int i = 0; i < theta.rows(); ++i) {
        const double* r = theta.row(i);
        for (int j = 0; j < theta.cols(); ++j) {
            const double d = r[j] - theta_bar[j];
            s += d * d;
        }
    }
    return s;
}

DelayStep delay_step(const IndicatorDraw& draw, const std::vector<double>& effective_d,
                     const SporadicityProfile& profile, const Topology& t)
{
    DelayStep out;

    double num_proc = 0.0, den_proc = 0.0;
    for (int i = 0; i < t.m; ++i) {
        num_proc += draw.v[i] / effective_d[i];
        den_proc += 1.0 / effective_d[i];
    }
    out.tau_proc = den_proc > 0.0 ? num_proc / den_proc : 0.0;

    // per-client transmission sums over incident links, weighted by 1/|N_i|
    double num_trans = 0.0, den_trans = 0.0;
    std::vector<double> num_i(t.m, 0.0), den_i(t.m, 0.0);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        const auto& [i, j] = t.edges[e];
        const double inv_b = 1.0 / link_probability(profile, t, e);
        num_i[i] += draw.v_hat[e] * inv_b;
        num_i[j] += draw.v_hat[e] * inv_b;
        den_i[i] += inv_b;
        den_i[j] += inv_b;
    }
    for (int i = 0; i < t.m; ++i) {
        if (t.degree(i) == 0) continue;
        const double w = 1.0 / t.degree(i);
        num_trans += w * num_i[i];
        den_trans += w * den_i[i];
    }
    out.tau_trans = den_trans > 0.0 ? num_trans / den_trans : 0.0;
    out.tau_total = out.tau_trans + out.tau_proc;
    return out;
}

namespace {

int classify(const Vector& theta, const double* x, int p, int c)
{
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < c; ++k) {
        const double* w = theta.data() + static_cast<size_t>(k) * p;
        double s = 0.0;
        for (int j = 0; j < p; ++j) s += w[j] * x[j];
        if (s > best_score) {  // strict: ties resolve to the lowest class index
            best_score = s;
            best = k;
        }
    }
    return best;
}

}  // namespace

double evaluate_accuracy(const Vector& theta, const ObjectiveFamily& fam,
                         const Dataset& test_set)
{
    if (!fam.is_classifier())
        throw std::invalid_argument("evaluate_accuracy: quadratic family has no accuracy");
    const int p = fam.feature_dim, c = fam.num_classes;
    long correct = 0;
    const int n = test_set.size();
#pragma omp parallel for reduction(+ : correct) schedule(static)
    for (int s = 0; s < n; ++s) {
        if (classify(theta, test_set.features.row(s), p, c) == test_set.labels[s])
            ++correct;
    }
    return static_cast<double>(correct) / n;
}

double evaluate_accuracy(const Matrix& theta_rows, const ObjectiveFamily& fam,
                         const Dataset& test_set, EvalMode mode)
{
    if (mode == EvalMode::AverageModel)
        return evaluate_accuracy(row_mean(theta_rows), fam, test_set);
    double acc = 0.0;
    for (int i = 0; i < theta_rows.rows(); ++i) {
        Vector theta(theta_rows.row(i), theta_rows.row(i) + theta_rows.cols());
        acc += evaluate_accuracy(theta, fam, test_set);
    }
    return acc / theta_rows.rows();
}

std::string metrics_csv_header()
{
    return "iteration,tau_trans,tau_proc,tau_total,tau_cum,"
           "cons_err,opt_err,pl_err,train_loss,test_accuracy";
}

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v)
{
    return v ? fmt(*v) : std::string();
}

}  // namespace

std::string metrics_csv_line(const MetricsRow& r)
{
    std::string line = std::to_string(r.iteration);
    line += ',' + fmt(r.tau_trans) + ',' + fmt(r.tau_proc) + ',' + fmt(r.tau_total)
            + ',' + fmt(r.tau_cum) + ',' + fmt(r.cons_err) + ',' + fmt_opt(r.opt_err)
            + ',' + fmt_opt(r.pl_err) + ',' + fmt(r.train_loss) + ','
            + fmt_opt(r.test_accuracy);
    return line;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty metrics csv: " + path);

    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(10);
        MetricsRow r;
        r.iteration = std::stoull(cells[0]);
        r.tau_trans = std::stod(cells[1]);
        r.tau_proc = std::stod(cells[2]);
        r.tau_total = std::stod(cells[3]);
        r.tau_cum = std::stod(cells[4]);
        r.cons_err = std::stod(cells[5]);
        if (!cells[6].empty()) r.opt_err = std::stod(cells[6]);
        if (!cells[7].empty()) r.pl_err = std::stod(cells[7]);
        r.train_loss = std::stod(cells[8]);
        if (!cells[9].empty()) r.test_accuracy = std::stod(cells[9]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace dspodfl
