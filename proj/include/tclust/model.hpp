#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class InvalidInputError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A symmetric factorization failed (matrix not positive definite).
class DecompositionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal contract between modules was broken (e.g. a retained point
/// assigned to a zero-weight cluster).
class ContractViolationError : public std::logic_error {
    using std::logic_error::logic_error;
};

class GenerationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Observations as rows of an n x p matrix.
struct Dataset {
    Matrix points;

    Dataset() = default;
    explicit Dataset(Matrix pts);

    [[nodiscard]] Index n() const { return points.rows(); }
    [[nodiscard]] Index p() const { return points.cols(); }
    [[nodiscard]] Index distinct_points() const;
};

enum class RestrictionMode {
    EigenRatio,        // ratio of covariance eigenvalues across all groups and coordinates
    DeterminantRatio,  // ratio of |Sigma_j|^(1/p) across groups
    SphericalEqual,    // common sigma^2 * I
    CommonCovariance,  // common full covariance
    Unrestricted,
};

/// Which covariance restriction to enforce and how strongly. `c` is the
/// ratio bound (>= 1, may be +inf); it is ignored by the closed-form modes.
struct ConstraintSpec {
    RestrictionMode mode = RestrictionMode::EigenRatio;
    double c = 1.0;

    void validate() const;
};

/// Weights, means and covariances of the k fitted components. A weight of
/// zero marks a dead cluster: it never claims points (its discriminant is
/// -inf on the log scale) but its parameters are still reported.
struct ModelParams {
    std::vector<double> weights;
    std::vector<Vector> means;
    std::vector<Matrix> covariances;

    [[nodiscard]] int k() const { return static_cast<int>(weights.size()); }
    [[nodiscard]] Index p() const { return means.empty() ? 0 : means.front().size(); }

    /// Throws InvalidInputError unless weights sum to 1 (1e-12), each weight
    /// lies in [0,1], and every covariance is symmetric (1e-10) and positive
    /// definite.
    void validate_structure() const;
};

/// Hard labels in {0,...,k}; 0 means trimmed. `counts[j]` holds the size of
/// cluster j+1.
struct Assignment {
    std::vector<int> labels;
    std::vector<Index> counts;

    [[nodiscard]] Index n() const { return static_cast<Index>(labels.size()); }
    [[nodiscard]] int k() const { return static_cast<int>(counts.size()); }
    [[nodiscard]] Index retained() const;
    [[nodiscard]] Index trimmed() const { return n() - retained(); }

    static Assignment from_labels(std::vector<int> labels, int k);
};

struct FitConfig {
    double alpha = 0.0;       // trimming proportion, in [0, 1)
    int n_starts = 50;        // random initializations
    int f_iters = 10;         // concentration steps per start before screening
    int max_iters = 200;      // additional iteration cap for surviving starts
    double tol = 1e-12;       // convergence tolerance on objective change
    std::uint64_t seed = 0;

    void validate() const;

    /// Non-fatal advisory when the retained sample is small relative to the
    /// number of free parameters; empty string when fine.
    [[nodiscard]] std::string small_sample_warning(Index n, Index p, int k) const;
};

struct FitResult {
    ModelParams params;
    Assignment assignment;
    double objective = 0.0;
    double threshold = 0.0;                // log-scale trimming threshold
    std::vector<double> discriminants;     // per-point best log-discriminant
    std::vector<double> bayes_factors;
    int iterations_used = 0;
    bool converged = false;
};

/// Number of retained observations: ceil(n * (1 - alpha)), evaluated with a
/// small guard so that integral products (e.g. 2000 * 0.9) are not pushed up
/// by floating-point noise.
[[nodiscard]] Index retained_count(Index n, double alpha);

/// True iff `params` satisfies the restriction described by `spec`. Ratio
/// checks allow a relative slack of 1e-8 to absorb projection residue.
/// Throws InvalidInputError on non-finite entries.
[[nodiscard]] bool validate_params(const ModelParams& params, const ConstraintSpec& spec);

}  // namespace tclust
