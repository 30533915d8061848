#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dspodfl/objectives.hpp"
#include "dspodfl/rng.hpp"

using namespace dspodfl;

namespace {

ObjectiveFamily two_client_hand_family()
{
    // H1 = H2 = I, c1 = e1, c2 = -e1
    const int n = 3;
    Vector c1(n, 0.0), c2(n, 0.0);
    c1[0] = 1.0;
    c2[0] = -1.0;
    return make_quadratic_explicit({Matrix::identity(n), Matrix::identity(n)}, {c1, c2});
}

// conjugate-gradient oracle for H_bar theta = c_bar
Vector cg_solve(const Matrix& a, const Vector& b, int iters = 500)
{
    const int n = a.rows();
    Vector x(n, 0.0), r = b, p = b;
    double rs = dot(r, r);
    for (int it = 0; it < iters && rs > 1e-28; ++it) {
        Vector ap(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ap[i] += a(i, j) * p[j];
        const double alpha = rs / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        const double rs_new = dot(r, r);
        for (int i = 0; i < n; ++i) p[i] = r[i] + (rs_new / rs) * p[i];
        rs = rs_new;
    }
    return x;
}

Dataset tiny_separable_dataset()
{
    // two well-separated point clouds in 2d, two classes
    Dataset d;
    d.num_classes = 2;
    d.features = Matrix(8, 2);
    for (int s = 0; s < 8; ++s) {
        const int label = s % 2;
        d.labels.push_back(label);
        d.features(s, 0) = (label == 0 ? 0.2 : 0.8) + 0.01 * s;
        d.features(s, 1) = (label == 0 ? 0.8 : 0.2) - 0.01 * s;
    }
    return d;
}

std::string write_idx_fixture(const std::string& dir)
{
    std::filesystem::create_directories(dir);
    // 2 images of 2x2 pixels + matching labels
    const unsigned char images[] = {
        0, 0, 8, 3,  0, 0, 0, 2,  0, 0, 0, 2,  0, 0, 0, 2,  // magic 0x803, 2, 2, 2
        10, 20, 30, 40,
        250, 200, 150, 100,
    };
    const unsigned char labels[] = {
        0, 0, 8, 1,  0, 0, 0, 2,  // magic 0x801, 2
        7, 3,
    };
    const unsigned char labels3[] = {
        0, 0, 8, 1,  0, 0, 0, 3,  // 3 labels: count mismatch against 2 images
        7, 3, 1,
    };
    std::ofstream img(dir + "/images.idx", std::ios::binary);
    img.write(reinterpret_cast<const char*>(images), sizeof(images));
    std::ofstream lab(dir + "/labels.idx", std::ios::binary);
    lab.write(reinterpret_cast<const char*>(labels), sizeof(labels));
    std::ofstream lab3(dir + "/labels3.idx", std::ios::binary);
    lab3.write(reinterpret_cast<const char*>(labels3), sizeof(labels3));
    return dir;
}

}  // namespace

TEST_CASE("homogeneous quadratic: delta = 0, zeta = 0, exact spectrum")
{
    QuadraticSpec spec;
    spec.m = 4;
    spec.n = 5;
    spec.lambda_min = 0.5;
    spec.lambda_max = 2.0;
    spec.hessian_spread = 0.0;
    spec.linear_spread = 0.0;
    spec.seed = 7;
    const ObjectiveFamily fam = make_quadratic(spec);
    for (int i = 1; i < fam.m; ++i) {
        CHECK(fam.hessians[i] == fam.hessians[0]);
        CHECK(fam.linear[i] == fam.linear[0]);
    }
    const OptimumInfo opt = global_optimum(fam);
    const TheoryConstants c = compute_constants(fam, opt);
    CHECK(c.exact);
    CHECK(c.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.zeta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.mu == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(c.beta == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("two-client hand family: theta* = 0, delta = 1, zeta = 0, mu = beta = 1")
{
    const ObjectiveFamily fam = two_client_hand_family();
    const OptimumInfo opt = global_optimum(fam);
    CHECK(norm2(opt.theta_star) < 1e-14);
    CHECK(opt.f_star == doctest::Approx(0.0).epsilon(1e-14));

    const TheoryConstants c = compute_constants(fam, opt);
    CHECK(c.mu == doctest::Approx(1.0));
    CHECK(c.beta == doctest::Approx(1.0));
    CHECK(c.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.zeta == doctest::Approx(0.0).epsilon(1e-12));

    const Vector g0 = full_gradient(fam, 0, opt.theta_star);
    CHECK(g0[0] == doctest::Approx(-1.0));
    const Vector g1 = full_gradient(fam, 1, opt.theta_star);
    CHECK(g1[0] == doctest::Approx(1.0));
}

TEST_CASE("closed-form optimum matches conjugate-gradient oracle within 1e-10")
{
    QuadraticSpec spec;
    spec.m = 6;
    spec.n = 7;
    spec.lambda_min = 0.3;
    spec.lambda_max = 3.0;
    spec.hessian_spread = 0.4;
    spec.linear_spread = 0.8;
    spec.seed = 123;
    const ObjectiveFamily fam = make_quadratic(spec);
    const OptimumInfo opt = global_optimum(fam);
    CHECK(opt.method == "closed-form");
    CHECK(opt.residual <= 1e-10);

    Matrix h_bar(spec.n, spec.n);
    Vector c_bar(spec.n, 0.0);
    for (int i = 0; i < fam.m; ++i) {
        h_bar = add(h_bar, fam.hessians[i]);
        axpy(1.0, fam.linear[i], c_bar);
    }
    h_bar = scale(h_bar, 1.0 / fam.m);
    for (double& v : c_bar) v /= fam.m;
    const Vector oracle = cg_solve(h_bar, c_bar);
    for (int j = 0; j < spec.n; ++j)
        CHECK(std::fabs(opt.theta_star[j] - oracle[j]) < 1e-10);
}

TEST_CASE("quadratic gradient vanishes at the per-client optimum")
{
    QuadraticSpec spec;
    spec.m = 3;
    spec.n = 4;
    spec.lambda_min = 0.5;
    spec.lambda_max = 1.5;
    spec.hessian_spread = 0.3;
    spec.linear_spread = 1.0;
    spec.seed = 5;
    const ObjectiveFamily fam = make_quadratic(spec);
    for (int i = 0; i < fam.m; ++i) {
        const Vector local_opt = spd_solve(fam.hessians[i], fam.linear[i]);
        CHECK(norm2(full_gradient(fam, i, local_opt)) < 1e-12);
    }
}

TEST_CASE("full gradient matches central finite differences (quadratic and logistic)")
{
    QuadraticSpec spec;
    spec.m = 3;
    spec.n = 4;
    spec.lambda_min = 0.4;
    spec.lambda_max = 2.5;
    spec.hessian_spread = 0.5;
    spec.linear_spread = 1.0;
    spec.seed = 11;
    const ObjectiveFamily quad = make_quadratic(spec);

    auto data = std::make_shared<Dataset>(tiny_separable_dataset());
    const DataPartition part = partition(*data, 2, PartitionScheme::Iid, 0, 1);
    const ObjectiveFamily logi = make_classifier(ObjectiveFamily::Kind::Logistic,
                                                 data, part, 1e-2);

    for (const ObjectiveFamily* fam : {&quad, &logi}) {
        const int points = fam->kind == ObjectiveFamily::Kind::Quadratic ? 100 : 25;
        for (int p = 0; p < points; ++p) {
            Vector theta(fam->dim);
            for (int j = 0; j < fam->dim; ++j)
                theta[j] = 2.0 * rng::uniform01(17, rng::Stream::Test, p, j) - 1.0;
            const int i = p % fam->m;
            const Vector g = full_gradient(*fam, i, theta);
            const double h = 1e-6;
            for (int j = 0; j < fam->dim; ++j) {
                Vector up = theta, dn = theta;
                up[j] += h;
                dn[j] -= h;
                const double fd = (local_value(*fam, i, up) - local_value(*fam, i, dn))
                                  / (2.0 * h);
                CHECK(std::fabs(g[j] - fd)
                      <= 1e-6 * std::max(1.0, std::fabs(g[j])) + 1e-8);
            }
        }
    }
}

TEST_CASE("logistic at zero model with identical features and balanced labels")
{
    // one sample per class with the same features: the data term cancels at
    // theta = 0 and only the (zero) regularization gradient remains
    auto data = std::make_shared<Dataset>();
    data->num_classes = 2;
    data->features = Matrix(2, 3);
    for (int j = 0; j < 3; ++j) {
        data->features(0, j) = 0.3 + 0.1 * j;
        data->features(1, j) = 0.3 + 0.1 * j;
    }
    data->labels = {0, 1};
    DataPartition part;
    part.assignment = {{0, 1}};
    const ObjectiveFamily fam = make_classifier(ObjectiveFamily::Kind::Logistic,
                                                data, part, 0.5);
    const Vector g = full_gradient(fam, 0, Vector(fam.dim, 0.0));
    CHECK(norm2(g) < 1e-15);
}

TEST_CASE("assumption 1(c) holds with equality machinery for exact constants")
{
    QuadraticSpec spec;
    spec.m = 5;
    spec.n = 4;
    spec.lambda_min = 0.5;
    spec.lambda_max = 2.0;
    spec.hessian_spread = 0.5;
    spec.linear_spread = 1.0;
    spec.seed = 29;
    const ObjectiveFamily fam = make_quadratic(spec);
    const OptimumInfo opt = global_optimum(fam);

    Matrix h_bar(spec.n, spec.n);
    for (int i = 0; i < fam.m; ++i) h_bar = add(h_bar, fam.hessians[i]);
    h_bar = scale(h_bar, 1.0 / fam.m);

    for (int i = 0; i < fam.m; ++i) {
        const double delta_i = norm2(full_gradient(fam, i, opt.theta_star));
        const double zeta_i = spectral_radius_symmetric(sub(h_bar, fam.hessians[i]));
        for (int p = 0; p < 10000; ++p) {
            Vector theta(spec.n);
            for (int j = 0; j < spec.n; ++j)
                theta[j] = 4.0 * rng::uniform01(31, rng::Stream::Test, p, i * 8 + j) - 2.0;
            Vector diff = global_gradient(fam, theta);
            const Vector gi = full_gradient(fam, i, theta);
            for (int j = 0; j < spec.n; ++j) diff[j] -= gi[j];
            Vector dev = theta;
            for (int j = 0; j < spec.n; ++j) dev[j] -= opt.theta_star[j];
            CHECK(norm2(diff) <= delta_i + zeta_i * norm2(dev) + 1e-9);
        }
    }
}

TEST_CASE("fitted diversity upper-bounds the observed diversity on the grid")
{
    QuadraticSpec spec;
    spec.m = 4;
    spec.n = 3;
    spec.lambda_min = 0.5;
    spec.lambda_max = 1.5;
    spec.hessian_spread = 0.4;
    spec.linear_spread = 1.0;
    spec.seed = 41;
    const ObjectiveFamily fam = make_quadratic(spec);
    const OptimumInfo opt = global_optimum(fam);
    const DiversityFit fit = estimate_diversity(fam, opt);

    for (const auto& theta : fit.grid) {
        Vector dev = theta;
        for (size_t j = 0; j < dev.size(); ++j) dev[j] -= opt.theta_star[j];
        const double budget = fit.delta + fit.zeta * norm2(dev);
        for (int i = 0; i < fam.m; ++i) {
            Vector diff = global_gradient(fam, theta);
            const Vector gi = full_gradient(fam, i, theta);
            for (size_t j = 0; j < diff.size(); ++j) diff[j] -= gi[j];
            CHECK(norm2(diff) <= budget + 1e-12);
        }
    }
}

TEST_CASE("stochastic gradient: full batch and zero-noise synthetic reduce exactly")
{
    auto data = std::make_shared<Dataset>(tiny_separable_dataset());
    const DataPartition part = partition(*data, 2, PartitionScheme::Iid, 0, 2);
    const ObjectiveFamily fam = make_classifier(ObjectiveFamily::Kind::Logistic,
                                                data, part, 1e-3);
    Vector theta(fam.dim);
    for (int j = 0; j < fam.dim; ++j)
        theta[j] = rng::gaussian(3, rng::Stream::Test, 0, j);

    const Vector exact = full_gradient(fam, 0, theta);
    const auto full_batch = stochastic_gradient(fam, 0, theta, 1000,
                                                NoiseMode::Minibatch, 0.0, 5, 0);
    CHECK(full_batch.g == exact);

    const auto noiseless = stochastic_gradient(fam, 0, theta, 16,
                                               NoiseMode::Synthetic, 0.0, 5, 0);
    CHECK(noiseless.g == exact);
}

TEST_CASE("synthetic noise: first and second moments match sigma2 exactly")
{
    const ObjectiveFamily fam = two_client_hand_family();
    const Vector theta(fam.dim, 0.25);
    const double sigma2 = 0.01;
    const int draws = 100000;
    Vector mean(fam.dim, 0.0);
    double second = 0.0, second_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
        const auto sg = stochastic_gradient(fam, 0, theta, 1, NoiseMode::Synthetic,
                                            sigma2, 9, k);
        REQUIRE(sg.epsilon_known.has_value());
        const Vector& eps = *sg.epsilon_known;
        axpy(1.0, eps, mean);
        const double e2 = dot(eps, eps);
        second += e2;
        second_sq += e2 * e2;
    }
    for (double& v : mean) v /= draws;
    // per-coordinate sd is sqrt(sigma2/n)
    const double coord_sd = std::sqrt(sigma2 / fam.dim);
    for (double v : mean) CHECK(std::fabs(v) < 3.0 * coord_sd / std::sqrt(double(draws)));
    const double m2 = second / draws;
    const double se2 = std::sqrt(std::max(second_sq / draws - m2 * m2, 0.0) / draws);
    CHECK(std::fabs(m2 - sigma2) < 3.0 * se2);
}

TEST_CASE("minibatch on quadratic and empty shards are rejected")
{
    const ObjectiveFamily fam = two_client_hand_family();
    CHECK_THROWS(stochastic_gradient(fam, 0, Vector(fam.dim, 0.0), 16,
                                     NoiseMode::Minibatch, 0.0, 1, 0));
    CHECK_THROWS(make_quadratic_explicit({}, {}));
}

TEST_CASE("non-PD quadratic construction is rejected")
{
    Matrix bad = Matrix::identity(2);
    bad(1, 1) = -0.5;
    CHECK_THROWS(make_quadratic_explicit({bad}, {Vector(2, 0.0)}));
}

TEST_CASE("hinge family is barred from theory paths")
{
    auto data = std::make_shared<Dataset>(tiny_separable_dataset());
    const DataPartition part = partition(*data, 2, PartitionScheme::Iid, 0, 3);
    const ObjectiveFamily fam = make_classifier(ObjectiveFamily::Kind::HingeSvm,
                                                data, part, 1e-3);
    CHECK_FALSE(fam.smooth());
    CHECK_THROWS(global_optimum(fam));
    OptimumInfo dummy;
    dummy.theta_star = Vector(fam.dim, 0.0);
    CHECK_THROWS(compute_constants(fam, dummy));
}

TEST_CASE("logistic optimum reaches the 1e-8 residual certificate")
{
    auto data = std::make_shared<Dataset>(tiny_separable_dataset());
    const DataPartition part = partition(*data, 2, PartitionScheme::Iid, 0, 4);
    const ObjectiveFamily fam = make_classifier(ObjectiveFamily::Kind::Logistic,
                                                data, part, 1e-2);
    const OptimumInfo opt = global_optimum(fam);
    CHECK(opt.method == "high-precision-solve");
    CHECK(opt.residual <= 1e-8);
    const TheoryConstants c = compute_constants(fam, opt);
    CHECK_FALSE(c.exact);
    CHECK(c.mu == doctest::Approx(1e-2));
    CHECK(c.mu <= c.beta);
    CHECK(c.zeta <= 2.0 * c.beta);
}

TEST_CASE("partition: iid split covers the dataset exactly once")
{
    Dataset data;
    data.num_classes = 4;
    data.features = Matrix(103, 2);
    for (int s = 0; s < 103; ++s) data.labels.push_back(s % 4);
    const DataPartition p = partition(data, 5, PartitionScheme::Iid, 0, 77);
    std::vector<int> seen(103, 0);
    for (const auto& shard : p.assignment)
        for (int s : shard) ++seen[s];
    for (int s = 0; s < 103; ++s) CHECK(seen[s] == 1);
    for (const auto& shard : p.assignment)
        CHECK(std::abs(static_cast<int>(shard.size()) - 103 / 5) <= 1);
}

TEST_CASE("partition: label-skew with 1 label per client")
{
    Dataset data;
    data.num_classes = 10;
    data.features = Matrix(200, 2);
    for (int s = 0; s < 200; ++s) data.labels.push_back(s % 10);
    const DataPartition p = partition(data, 10, PartitionScheme::LabelSkew, 1, 5);
    std::vector<int> seen(200, 0);
    for (int i = 0; i < 10; ++i) {
        std::set<int> labels;
        for (int s : p.assignment[i]) {
            labels.insert(data.labels[s]);
            ++seen[s];
        }
        CHECK(labels.size() == 1);
    }
    for (int s = 0; s < 200; ++s) CHECK(seen[s] == 1);
}

TEST_CASE("partition: labels_per_client = class count gives every client all classes")
{
    Dataset data;
    data.num_classes = 10;
    data.features = Matrix(400, 2);
    for (int s = 0; s < 400; ++s) data.labels.push_back(s % 10);
    const DataPartition p = partition(data, 10, PartitionScheme::LabelSkew, 10, 5);
    for (int i = 0; i < 10; ++i) {
        std::set<int> labels;
        for (int s : p.assignment[i]) labels.insert(data.labels[s]);
        CHECK(labels.size() == 10);
    }
}

TEST_CASE("partition: infeasible label assignment is rejected")
{
    Dataset data;
    data.num_classes = 10;
    data.features = Matrix(50, 2);
    for (int s = 0; s < 50; ++s) data.labels.push_back(s % 10);
    CHECK_THROWS(partition(data, 3, PartitionScheme::LabelSkew, 1, 5));
}

TEST_CASE("idx loader: crafted fixture recovers exact pixels")
{
    const std::string dir = write_idx_fixture("idx_fixture_tmp");
    const Dataset d = load_idx(dir + "/images.idx", dir + "/labels.idx");
    CHECK(d.size() == 2);
    CHECK(d.feature_dim() == 4);
    CHECK(d.labels[0] == 7);
    CHECK(d.labels[1] == 3);
    CHECK(d.features(0, 0) == doctest::Approx(10.0 / 255.0));
    CHECK(d.features(0, 3) == doctest::Approx(40.0 / 255.0));
    CHECK(d.features(1, 0) == doctest::Approx(250.0 / 255.0));

    const Dataset limited = load_idx(dir + "/images.idx", dir + "/labels.idx", 1);
    CHECK(limited.size() == 1);

    CHECK_THROWS_WITH_AS(load_idx(dir + "/images.idx", dir + "/labels3.idx"),
                         doctest::Contains("mismatch"), std::runtime_error);
    // wrong magic (labels file offered as images)
    CHECK_THROWS(load_idx(dir + "/labels.idx", dir + "/labels.idx"));
    std::filesystem::remove_all(dir);
}
