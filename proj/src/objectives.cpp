#include "dspodfl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "dspodfl/rng.hpp"

namespace dspodfl {

namespace {

uint32_t read_be_u32(std::istream& in, const std::string& path)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("idx: truncated header in " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8)
           | uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, int limit)
{
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);

    const uint32_t img_magic = read_be_u32(img, images_path);
    if (img_magic != 0x00000803u)
        throw std::runtime_error("idx: bad image magic in " + images_path);
    const uint32_t n_img = read_be_u32(img, images_path);
    const uint32_t rows = read_be_u32(img, images_path);
    const uint32_t cols = read_be_u32(img, images_path);

    const uint32_t lab_magic = read_be_u32(lab, labels_path);
    if (lab_magic != 0x00000801u)
        throw std::runtime_error("idx: bad label magic in " + labels_path);
    const uint32_t n_lab = read_be_u32(lab, labels_path);

    if (n_img != n_lab)
        throw std::runtime_error("idx: image/label count mismatch ("
                                 + std::to_string(n_img) + " vs " + std::to_string(n_lab) + ")");

    uint32_t n = n_img;
    if (limit > 0 && static_cast<uint32_t>(limit) < n) n = static_cast<uint32_t>(limit);
    const uint32_t p = rows * cols;

    Dataset d;
    d.features = Matrix(static_cast<int>(n), static_cast<int>(p));
    d.labels.resize(n);
    std::vector<unsigned char> buf(p);
    for (uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), p))
            throw std::runtime_error("idx: truncated image data in " + images_path);
        double* row = d.features.row(static_cast<int>(i));
        for (uint32_t j = 0; j < p; ++j) row[j] = buf[j] / 255.0;
        unsigned char y;
        if (!lab.read(reinterpret_cast<char*>(&y), 1))
            throw std::runtime_error("idx: truncated label data in " + labels_path);
        d.labels[i] = y;
    }
    int max_label = 0;
    for (int y : d.labels) max_label = std::max(max_label, y);
    d.num_classes = max_label + 1;
    return d;
}

DataPartition partition(const Dataset& data, int m, PartitionScheme scheme,
                        int labels_per_client, uint64_t seed)
{
    if (m < 1) throw std::invalid_argument("partition: client count must be >= 1");
    DataPartition part;
    part.scheme = scheme;
    part.labels_per_client = labels_per_client;
    part.assignment.assign(m, {});

    const int n = data.size();
    if (scheme == PartitionScheme::Iid) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng::uniform_index(i + 1, seed,
                                                              rng::Stream::Shuffle, 0, i));
            std::swap(idx[i], idx[j]);
        }
        for (int s = 0; s < n; ++s) part.assignment[s % m].push_back(idx[s]);
        for (auto& shard : part.assignment) std::sort(shard.begin(), shard.end());
        return part;
    }

    const int c = data.num_classes;
    if (labels_per_client < 1 || static_cast<long>(m) * labels_per_client < c)
        throw std::invalid_argument("partition: label-skew needs m * labels_per_client >= "
                                    "class count");

    // Deal labels: client i holds labels (i*L + j) mod C.
    std::vector<std::vector<int>> holders(c);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < labels_per_client; ++j) {
            const int label = (i * labels_per_client + j) % c;
            if (std::find(holders[label].begin(), holders[label].end(), i)
                == holders[label].end())
                holders[label].push_back(i);
        }

    std::vector<std::vector<int>> by_label(c);
    for (int s = 0; s < n; ++s) by_label[data.labels[s]].push_back(s);

    for (int label = 0; label < c; ++label) {
        const auto& samples = by_label[label];
        const auto& owners = holders[label];
        const int k = static_cast<int>(owners.size());
        for (size_t s = 0; s < samples.size(); ++s)
            part.assignment[owners[s % k]].push_back(samples[s]);
    }
    for (auto& shard : part.assignment) std::sort(shard.begin(), shard.end());
    return part;
}

namespace {

void check_quadratic_pd(const std::vector<Matrix>& hessians)
{
    for (const auto& h : hessians) {
        const auto eig = symmetric_eigenvalues(h);
        if (eig.front() <= 0.0)
            throw std::invalid_argument("quadratic family: Hessian not positive definite");
    }
}

// Orthonormal rotation as a product of Givens rotations with angles scaled by
// `spread`; spread = 0 gives the identity exactly.
Matrix random_rotation(int n, double spread, uint64_t seed, uint64_t entity)
{
    Matrix q = Matrix::identity(n);
    if (spread == 0.0) return q;
    uint64_t counter = 0;
    for (int p = 0; p < n - 1; ++p) {
        for (int r = p + 1; r < n; ++r) {
            const double u = 2.0 * rng::uniform01(seed, rng::Stream::Init, 7, entity,
                                                  counter++) - 1.0;
            const double angle = spread * M_PI * u;
            const double cs = std::cos(angle), sn = std::sin(angle);
            for (int k = 0; k < n; ++k) {
                const double qkp = q(k, p), qkr = q(k, r);
                q(k, p) = cs * qkp - sn * qkr;
                q(k, r) = sn * qkp + cs * qkr;
            }
        }
    }
    return q;
}

}  // namespace

ObjectiveFamily make_quadratic(const QuadraticSpec& spec)
{
    if (spec.n < 1) throw std::invalid_argument("make_quadratic: dimension must be >= 1");
    if (spec.lambda_min <= 0.0 || spec.lambda_max < spec.lambda_min)
        throw std::invalid_argument("make_quadratic: need 0 < lambda_min <= lambda_max");
    if (spec.hessian_spread < 0.0 || spec.hessian_spread >= 1.0)
        throw std::invalid_argument("make_quadratic: hessian_spread must lie in [0, 1)");

    const int n = spec.n;
    std::vector<double> base(n);
    for (int j = 0; j < n; ++j)
        base[j] = n == 1 ? spec.lambda_min
                         : spec.lambda_min + (spec.lambda_max - spec.lambda_min) * j / (n - 1);

    Vector c_base(n);
    for (int j = 0; j < n; ++j)
        c_base[j] = spec.linear_scale
                    * (2.0 * rng::uniform01(spec.seed, rng::Stream::Init, 1, j) - 1.0);

    ObjectiveFamily fam;
    fam.kind = ObjectiveFamily::Kind::Quadratic;
    fam.m = spec.m;
    fam.dim = n;
    for (int i = 0; i < spec.m; ++i) {
        std::vector<double> lam(n);
        for (int j = 0; j < n; ++j) {
            const double u = 2.0 * rng::uniform01(spec.seed, rng::Stream::Init, 2,
                                                  uint64_t(i) * 4096 + j) - 1.0;
            lam[j] = base[j] * (1.0 + spec.hessian_spread * u);
        }
        const Matrix q = random_rotation(n, spec.hessian_spread, spec.seed, i);
        Matrix h(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) s += q(a, k) * lam[k] * q(b, k);
                h(a, b) = s;
            }
        // symmetrize against accumulation error
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const double v = 0.5 * (h(a, b) + h(b, a));
                h(a, b) = v;
                h(b, a) = v;
            }
        Vector c = c_base;
        for (int j = 0; j < n; ++j)
            c[j] += spec.linear_spread
                    * rng::gaussian(spec.seed, rng::Stream::Init, 3, uint64_t(i) * 4096 + j);
        fam.hessians.push_back(std::move(h));
        fam.linear.push_back(std::move(c));
    }
    check_quadratic_pd(fam.hessians);
    return fam;
}

ObjectiveFamily make_quadratic_explicit(std::vector<Matrix> hessians,
                                        std::vector<Vector> linear)
{
    if (hessians.empty() || hessians.size() != linear.size())
        throw std::invalid_argument("make_quadratic_explicit: per-client H and c required");
    check_quadratic_pd(hessians);
    ObjectiveFamily fam;
    fam.kind = ObjectiveFamily::Kind::Quadratic;
    fam.m = static_cast<int>(hessians.size());
    fam.dim = hessians[0].rows();
    fam.hessians = std::move(hessians);
    fam.linear = std::move(linear);
    return fam;
}

ObjectiveFamily make_classifier(ObjectiveFamily::Kind kind,
                                std::shared_ptr<const Dataset> data,
                                DataPartition shards, double lambda)
{
    if (kind == ObjectiveFamily::Kind::Quadratic)
        throw std::invalid_argument("make_classifier: classifier kind required");
    if (lambda < 0.0) throw std::invalid_argument("make_classifier: lambda must be >= 0");
    ObjectiveFamily fam;
    fam.kind = kind;
    fam.m = static_cast<int>(shards.assignment.size());
    fam.dataset = std::move(data);
    fam.shards = std::move(shards);
    fam.lambda = lambda;
    fam.num_classes = fam.dataset->num_classes;
    fam.feature_dim = fam.dataset->feature_dim();
    fam.dim = fam.num_classes * fam.feature_dim;
    for (int i = 0; i < fam.m; ++i)
        if (fam.shards.assignment[i].empty())
            throw std::invalid_argument("make_classifier: empty shard for client "
                                        + std::to_string(i));
    return fam;
}

namespace {

// scores_c = <x, theta_c>, theta flattened class-major
void class_scores(const Vector& theta, const double* x, int p, int c, double* out)
{
    for (int k = 0; k < c; ++k) {
        const double* w = theta.data() + static_cast<size_t>(k) * p;
        double s = 0.0;
        for (int j = 0; j < p; ++j) s += w[j] * x[j];
        out[k] = s;
    }
}

double sample_loss(const ObjectiveFamily& fam, const Vector& theta, int sample,
                   Vector* grad_accum)
{
    const int p = fam.feature_dim, c = fam.num_classes;
    const double* x = fam.dataset->features.row(sample);
    const int y = fam.dataset->labels[sample];
    std::vector<double> scores(c);
    class_scores(theta, x, p, c, scores.data());

    if (fam.kind == ObjectiveFamily::Kind::Logistic) {
        const double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (int k = 0; k < c; ++k) z += std::exp(scores[k] - mx);
        const double loss = -(scores[y] - mx) + std::log(z);
        if (grad_accum) {
            for (int k = 0; k < c; ++k) {
                const double pk = std::exp(scores[k] - mx) / z;
                const double coef = pk - (k == y ? 1.0 : 0.0);
                double* g = grad_accum->data() + static_cast<size_t>(k) * p;
                for (int j = 0; j < p; ++j) g[j] += coef * x[j];
            }
        }
        return loss;
    }

    // one-vs-all hinge, subgradient 0 at the kink
    double loss = 0.0;
    for (int k = 0; k < c; ++k) {
        const double yk = (k == y) ? 1.0 : -1.0;
        const double margin = 1.0 - yk * scores[k];
        if (margin > 0.0) {
            loss += margin;
            if (grad_accum) {
                double* g = grad_accum->data() + static_cast<size_t>(k) * p;
                for (int j = 0; j < p; ++j) g[j] -= yk * x[j];
            }
        }
    }
    return loss;
}

double batch_objective(const ObjectiveFamily& fam, const Vector& theta,
                       const std::vector<int>& samples, Vector* grad)
{
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);
    double loss = 0.0;
    for (int s : samples) loss += sample_loss(fam, theta, s, grad);
    const double inv = 1.0 / samples.size();
    loss *= inv;
    if (grad)
        for (size_t j = 0; j < grad->size(); ++j)
            (*grad)[j] = (*grad)[j] * inv + fam.lambda * theta[j];
    double reg = 0.0;
    for (double v : theta) reg += v * v;
    return loss + 0.5 * fam.lambda * reg;
}

void check_theta(const ObjectiveFamily& fam, const Vector& theta)
{
    if (static_cast<int>(theta.size()) != fam.dim)
        throw std::invalid_argument("objective: model dimension mismatch");
}

}  // namespace

double local_value(const ObjectiveFamily& fam, int i, const Vector& theta)
{
    check_theta(fam, theta);
    if (fam.kind == ObjectiveFamily::Kind::Quadratic) {
        const Matrix& h = fam.hessians[i];
        double quad = 0.0;
        for (int a = 0; a < fam.dim; ++a) {
            double s = 0.0;
            for (int b = 0; b < fam.dim; ++b) s += h(a, b) * theta[b];
            quad += theta[a] * s;
        }
        return 0.5 * quad - dot(fam.linear[i], theta);
    }
    return batch_objective(fam, theta, fam.shards.assignment[i], nullptr);
}

double global_value(const ObjectiveFamily& fam, const Vector& theta)
{
    double s = 0.0;
    for (int i = 0; i < fam.m; ++i) s += local_value(fam, i, theta);
    return s / fam.m;
}

Vector full_gradient(const ObjectiveFamily& fam, int i, const Vector& theta)
{
    check_theta(fam, theta);
    if (fam.kind == ObjectiveFamily::Kind::Quadratic) {
        const Matrix& h = fam.hessians[i];
        Vector g(fam.dim);
        for (int a = 0; a < fam.dim; ++a) {
            double s = 0.0;
            for (int b = 0; b < fam.dim; ++b) s += h(a, b) * theta[b];
            g[a] = s - fam.linear[i][a];
        }
        return g;
    }
    Vector g(fam.dim);
    batch_objective(fam, theta, fam.shards.assignment[i], &g);
    return g;
}

Vector global_gradient(const ObjectiveFamily& fam, const Vector& theta)
{
    Vector g(fam.dim, 0.0);
    for (int i = 0; i < fam.m; ++i) axpy(1.0, full_gradient(fam, i, theta), g);
    for (double& v : g) v /= fam.m;
    return g;
}

StochasticGradient stochastic_gradient(const ObjectiveFamily& fam, int i,
                                       const Vector& theta, int batch_size,
                                       NoiseMode mode, double sigma2,
                                       uint64_t run_seed, uint64_t iteration)
{
    check_theta(fam, theta);
    if (mode == NoiseMode::Synthetic) {
        StochasticGradient out;
        out.g = full_gradient(fam, i, theta);
        Vector eps(fam.dim, 0.0);
        if (sigma2 > 0.0) {
            const double sd = std::sqrt(sigma2 / fam.dim);
            for (int j = 0; j < fam.dim; ++j)
                eps[j] = sd * rng::gaussian(run_seed, rng::Stream::Noise, iteration,
                                            uint64_t(i) * 0x10000 + j);
            axpy(1.0, eps, out.g);
        }
        out.epsilon_known = std::move(eps);
        return out;
    }

    if (!fam.is_classifier())
        throw std::invalid_argument("stochastic_gradient: minibatch mode needs a dataset");
    const auto& shard = fam.shards.assignment[i];
    if (shard.empty()) throw std::invalid_argument("stochastic_gradient: empty shard");
    if (batch_size < 1) throw std::invalid_argument("stochastic_gradient: batch size >= 1");

    std::vector<int> batch;
    if (batch_size >= static_cast<int>(shard.size())) {
        batch = shard;
    } else {
        // partial Fisher-Yates over the shard, keyed per (run, iteration, client)
        std::vector<int> pool = shard;
        batch.reserve(batch_size);
        for (int t = 0; t < batch_size; ++t) {
            const uint64_t j = rng::uniform_index(pool.size() - t, run_seed,
                                                  rng::Stream::Batch, iteration,
                                                  uint64_t(i) * 0x10000 + t);
            std::swap(pool[t], pool[t + j]);
            batch.push_back(pool[t]);
        }
    }
    StochasticGradient out;
    out.g.resize(fam.dim);
    batch_objective(fam, theta, batch, &out.g);
    return out;
}

OptimumInfo global_optimum(const ObjectiveFamily& fam, int max_iters, double tol)
{
    if (fam.kind == ObjectiveFamily::Kind::HingeSvm)
        throw std::runtime_error("global_optimum: hinge-SVM family is non-smooth; "
                                 "no optimum certificate available");

    OptimumInfo opt;
    if (fam.kind == ObjectiveFamily::Kind::Quadratic) {
        Matrix h_bar(fam.dim, fam.dim);
        Vector c_bar(fam.dim, 0.0);
        for (int i = 0; i < fam.m; ++i) {
            h_bar = add(h_bar, fam.hessians[i]);
            axpy(1.0, fam.linear[i], c_bar);
        }
        h_bar = scale(h_bar, 1.0 / fam.m);
        for (double& v : c_bar) v /= fam.m;
        opt.theta_star = spd_solve(h_bar, c_bar);
        opt.method = "closed-form";
        opt.residual = norm2(global_gradient(fam, opt.theta_star));
        opt.f_star = global_value(fam, opt.theta_star);
        if (opt.residual > 1e-10)
            throw std::runtime_error("global_optimum: closed-form residual "
                                     + std::to_string(opt.residual) + " exceeds 1e-10");
        return opt;
    }

    if (fam.lambda <= 0.0)
        throw std::runtime_error("global_optimum: logistic family needs lambda > 0");

    // Nesterov-accelerated full-gradient descent (strongly convex variant).
    const double beta_hat = fam.lambda
        + 0.5 * gram_top_eigenvalue(fam.dataset->features) / fam.dataset->size();
    const double mu_hat = fam.lambda;
    const double step = 1.0 / beta_hat;
    const double kappa = beta_hat / mu_hat;
    const double momentum = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);

    Vector theta(fam.dim, 0.0), look = theta, prev = theta;
    double res = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vector g = global_gradient(fam, look);
        res = norm2(g);
        if (res <= tol) {
            theta = look;
            break;
        }
        prev = theta;
        theta = look;
        axpy(-step, g, theta);
        look = theta;
        for (int j = 0; j < fam.dim; ++j) look[j] += momentum * (theta[j] - prev[j]);
    }
    opt.theta_star = theta;
    opt.residual = norm2(global_gradient(fam, theta));
    opt.method = "high-precision-solve";
    opt.f_star = global_value(fam, theta);
    if (opt.residual > tol)
        throw std::runtime_error("global_optimum: gradient descent stalled at residual "
                                 + std::to_string(opt.residual));
    return opt;
}

TheoryConstants compute_constants(const ObjectiveFamily& fam, const OptimumInfo& opt,
                                  double sigma2)
{
    if (opt.theta_star.empty())
        throw std::invalid_argument("compute_constants: optimum required");
    if (fam.kind == ObjectiveFamily::Kind::HingeSvm)
        throw std::runtime_error("compute_constants: hinge-SVM family is non-smooth and "
                                 "excluded from theory-bound paths");

    TheoryConstants c;
    c.sigma2 = sigma2;

    if (fam.kind == ObjectiveFamily::Kind::Quadratic) {
        c.exact = true;
        Matrix h_bar(fam.dim, fam.dim);
        for (int i = 0; i < fam.m; ++i) h_bar = add(h_bar, fam.hessians[i]);
        h_bar = scale(h_bar, 1.0 / fam.m);

        c.mu = std::numeric_limits<double>::infinity();
        for (int i = 0; i < fam.m; ++i) {
            const auto eig = symmetric_eigenvalues(fam.hessians[i]);
            c.mu = std::min(c.mu, eig.front());
            c.beta = std::max(c.beta, eig.back());
            Vector grad_at_star = full_gradient(fam, i, opt.theta_star);
            c.delta = std::max(c.delta, norm2(grad_at_star));
            c.zeta = std::max(c.zeta, spectral_radius_symmetric(sub(h_bar, fam.hessians[i])));
        }
        return c;
    }

    // logistic: estimated constants, inflated by a 10% safety margin
    c.exact = false;
    c.mu = fam.lambda;
    double beta_data = 0.0;
    for (int i = 0; i < fam.m; ++i) {
        const auto& shard = fam.shards.assignment[i];
        Matrix xi(static_cast<int>(shard.size()), fam.feature_dim);
        for (size_t s = 0; s < shard.size(); ++s)
            std::memcpy(xi.row(static_cast<int>(s)), fam.dataset->features.row(shard[s]),
                        sizeof(double) * fam.feature_dim);
        beta_data = std::max(beta_data,
                             fam.lambda + 0.5 * gram_top_eigenvalue(xi) / shard.size());
    }
    c.beta = 1.1 * beta_data;

    const DiversityFit fit = estimate_diversity(fam, opt);
    c.delta = fit.delta;
    c.zeta = std::min(fit.zeta, 2.0 * c.beta);
    return c;
}

DiversityFit estimate_diversity(const ObjectiveFamily& fam, const OptimumInfo& opt)
{
    DiversityFit fit;
    const int n_dirs = 8, n_radii = 4;
    const double r0 = 1.0 + norm2(opt.theta_star);
    fit.grid.push_back(opt.theta_star);
    for (int d = 0; d < n_dirs; ++d) {
        Vector dir(fam.dim);
        for (int j = 0; j < fam.dim; ++j)
            dir[j] = rng::gaussian(0xC0115, rng::Stream::Test, d, j);
        const double nd = norm2(dir);
        for (int r = 1; r <= n_radii; ++r) {
            Vector theta = opt.theta_star;
            axpy(r0 * r / (2.0 * nd), dir, theta);
            fit.grid.push_back(std::move(theta));
        }
    }

    std::vector<Vector> global_grads;
    global_grads.reserve(fit.grid.size());
    for (const auto& theta : fit.grid) global_grads.push_back(global_gradient(fam, theta));

    for (int i = 0; i < fam.m; ++i) {
        double sxx = 0.0, sx = 0.0, sy = 0.0, sxy = 0.0;
        std::vector<std::pair<double, double>> pts;
        for (size_t g = 0; g < fit.grid.size(); ++g) {
            const Vector& theta = fit.grid[g];
            Vector diff = global_grads[g];
            const Vector gi = full_gradient(fam, i, theta);
            for (size_t j = 0; j < diff.size(); ++j) diff[j] -= gi[j];
            Vector dev = theta;
            for (size_t j = 0; j < dev.size(); ++j) dev[j] -= opt.theta_star[j];
            const double x = norm2(dev);
            const double y = norm2(diff);
            pts.emplace_back(x, y);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(pts.size());
        double zeta_i = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-30);
        zeta_i = std::max(0.0, zeta_i);
        double delta_i = std::max(0.0, (sy - zeta_i * sx) / n);
        // shift delta so the fit covers every grid point, then add the margin
        double worst = 0.0;
        for (const auto& [x, y] : pts) worst = std::max(worst, y - (delta_i + zeta_i * x));
        delta_i += std::max(0.0, worst);
        fit.delta = std::max(fit.delta, 1.1 * delta_i);
        fit.zeta = std::max(fit.zeta, 1.1 * zeta_i);
    }
    return fit;
}

nlohmann::json quadratic_spec_to_json(const QuadraticSpec& s)
{
    return {{"m", s.m},
            {"n", s.n},
            {"lambda_min", s.lambda_min},
            {"lambda_max", s.lambda_max},
            {"hessian_spread", s.hessian_spread},
            {"linear_spread", s.linear_spread},
            {"linear_scale", s.linear_scale},
            {"seed", s.seed}};
}

QuadraticSpec quadratic_spec_from_json(const nlohmann::json& j)
{
    QuadraticSpec s;
    s.m = j.value("m", 1);
    s.n = j.value("n", 1);
    s.lambda_min = j.value("lambda_min", 1.0);
    s.lambda_max = j.value("lambda_max", 1.0);
    s.hessian_spread = j.value("hessian_spread", 0.0);
    s.linear_spread = j.value("linear_spread", 0.0);
    s.linear_scale = j.value("linear_scale", 1.0);
    s.seed = j.value("seed", 0ull);
    return s;
}

}  // namespace dspodfl
