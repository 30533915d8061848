#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspodfl/linalg.hpp"

namespace dspodfl {

struct Dataset {
    Matrix features;          // N x p, values scaled to [0, 1]
    std::vector<int> labels;  // size N
    int num_classes = 0;

    int size() const { return features.rows(); }
    int feature_dim() const { return features.cols(); }
};

// Reads IDX-format image/label files (big-endian, magics 0x803 / 0x801).
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 int limit = 0);

enum class PartitionScheme { Iid, LabelSkew };

struct DataPartition {
    std::vector<std::vector<int>> assignment;  // per-client sample indices
    int labels_per_client = 0;
    PartitionScheme scheme = PartitionScheme::Iid;
};

// IID: uniform random equal-size split. Label-skew: client i is dealt labels
// (i*L + j) mod C for j < L, and each label's samples are split evenly among
// the clients holding it.
DataPartition partition(const Dataset& data, int m, PartitionScheme scheme,
                        int labels_per_client, uint64_t seed);

struct TheoryConstants {
    double mu = 0.0;      // strong-convexity modulus
    double beta = 0.0;    // smoothness modulus
    double delta = 0.0;   // gradient-diversity offset
    double zeta = 0.0;    // gradient-diversity slope
    double sigma2 = 0.0;  // SGD noise variance bound
    bool exact = false;
};

struct OptimumInfo {
    Vector theta_star;
    double f_star = 0.0;
    std::string method;   // "closed-form" | "high-precision-solve"
    double residual = 0.0;
};

struct QuadraticSpec {
    int m = 1;
    int n = 1;
    double lambda_min = 1.0;       // conditioning: eigenvalue range of the base spectrum
    double lambda_max = 1.0;
    double hessian_spread = 0.0;   // heterogeneity of H_i across clients, in [0, 1)
    double linear_spread = 0.0;    // heterogeneity of c_i across clients
    double linear_scale = 1.0;     // magnitude of the shared component of c_i
    uint64_t seed = 0;
};

struct ObjectiveFamily {
    enum class Kind { Quadratic, Logistic, HingeSvm };

    Kind kind = Kind::Quadratic;
    int m = 0;
    int dim = 0;                    // model dimension (flattened p * C for classifiers)
    double lambda = 0.0;            // ridge coefficient for classifier families

    // quadratic family: F_i(theta) = 1/2 theta^T H_i theta - c_i^T theta
    std::vector<Matrix> hessians;
    std::vector<Vector> linear;

    // classifier families
    std::shared_ptr<const Dataset> dataset;
    DataPartition shards;
    int num_classes = 0;
    int feature_dim = 0;

    bool is_classifier() const { return kind != Kind::Quadratic; }
    bool smooth() const { return kind != Kind::HingeSvm; }
    int shard_size(int i) const { return static_cast<int>(shards.assignment[i].size()); }
};

ObjectiveFamily make_quadratic(const QuadraticSpec& spec);
ObjectiveFamily make_quadratic_explicit(std::vector<Matrix> hessians,
                                        std::vector<Vector> linear);
ObjectiveFamily make_classifier(ObjectiveFamily::Kind kind,
                                std::shared_ptr<const Dataset> data,
                                DataPartition shards, double lambda);

double local_value(const ObjectiveFamily& fam, int i, const Vector& theta);
double global_value(const ObjectiveFamily& fam, const Vector& theta);

// Exact gradient of F_i (subgradient for hinge with the 0-at-kink convention).
Vector full_gradient(const ObjectiveFamily& fam, int i, const Vector& theta);
Vector global_gradient(const ObjectiveFamily& fam, const Vector& theta);

enum class NoiseMode { Minibatch, Synthetic };

struct StochasticGradient {
    Vector g;
    std::optional<Vector> epsilon_known;  // populated in synthetic mode
};

// Minibatch mode samples a uniform batch from client i's shard (no
// replacement). Synthetic mode returns the full gradient plus isotropic
// zero-mean noise with E||eps||^2 = sigma2 exactly.
StochasticGradient stochastic_gradient(const ObjectiveFamily& fam, int i,
                                       const Vector& theta, int batch_size,
                                       NoiseMode mode, double sigma2,
                                       uint64_t run_seed, uint64_t iteration);

OptimumInfo global_optimum(const ObjectiveFamily& fam, int max_iters = 200000,
                           double tol = 1e-8);

// Quadratic: closed form, exact = true. Logistic: data-dependent beta bound,
// mu = lambda, (delta, zeta) fitted over a theta grid with a 10% safety
// margin, exact = false. Hinge is rejected (non-smooth).
TheoryConstants compute_constants(const ObjectiveFamily& fam, const OptimumInfo& opt,
                                  double sigma2 = 0.0);

// Least-squares fit of ||grad F - grad F_i|| against ||theta - theta*|| over a
// sampled grid, shifted to cover every grid point and inflated by 10%. This is
// the estimation path behind compute_constants for non-exact families.
struct DiversityFit {
    double delta = 0.0;
    double zeta = 0.0;
    std::vector<Vector> grid;
};
DiversityFit estimate_diversity(const ObjectiveFamily& fam, const OptimumInfo& opt);

// Classifier accuracy; argmax over class scores, ties to the lowest class.
enum class EvalMode { AverageModel, PerClientMean };

nlohmann::json quadratic_spec_to_json(const QuadraticSpec& s);
QuadraticSpec quadratic_spec_from_json(const nlohmann::json& j);

}  // namespace dspodfl
