#pragma once

#include "tclust/model.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace tclust {

/// Log-discriminant values of one observation against every cluster. All
/// densities are kept on the log scale so that high-dimensional fits do not
/// underflow. `best_index` is 1-based (matching assignment labels); ties are
/// broken toward the smaller cluster index.
struct DiscriminantRow {
    std::vector<double> per_cluster;  // log(pi_j) + log f(x; mu_j, Sigma_j); -inf for dead clusters
    int best_index = 1;
    double best_value = 0.0;
};

/// Gaussian log-density with a cached Cholesky factorization. Instances are
/// cheap to evaluate repeatedly but hold a scratch buffer, so share one
/// instance per thread, not across threads.
class GaussianLogDensity {
public:
    GaussianLogDensity(Vector mu, const Matrix& sigma);

    [[nodiscard]] double operator()(const Eigen::Ref<const Vector>& x) const;

    /// Squared Mahalanobis distance (x - mu)' Sigma^-1 (x - mu).
    [[nodiscard]] double mahalanobis_sq(const Eigen::Ref<const Vector>& x) const;

private:
    Vector mu_;
    Eigen::LLT<Matrix> llt_;
    double log_norm_ = 0.0;  // -(p/2) log 2pi - 1/2 log|Sigma|
    mutable Vector scratch_;
};

double log_normal_pdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mu,
                      const Matrix& sigma);

DiscriminantRow discriminants(const Eigen::Ref<const Vector>& x, const ModelParams& params);

/// Rows for the whole dataset with each covariance factored once.
std::vector<DiscriminantRow> discriminant_rows(const Dataset& data, const ModelParams& params);

/// Per-point best log-discriminants d_i, in observation order.
std::vector<double> best_discriminants(const Dataset& data, const ModelParams& params);

/// Log-scale trimming threshold R: the m-th largest d_i with
/// m = ceil(n (1 - alpha)), i.e. the smallest retained discriminant.
double threshold(const ModelParams& params, const Dataset& data, double alpha);

/// Keeps the m observations with largest d_i (ties resolved by retaining
/// lower observation indices first), labels them with their best cluster and
/// labels the rest 0.
Assignment assign(const ModelParams& params, const Dataset& data, double alpha);

/// Trimmed log-likelihood: the sum over retained observations of
/// log(pi_label) + log f(x; mu_label, Sigma_label). Reported as a sum (the
/// empirical expectation scaled by n), accumulated in ascending observation
/// order so results are reproducible.
double objective(const ModelParams& params, const Dataset& data, const Assignment& assignment);

/// Cluster-confidence diagnostics. For a retained point, the log-ratio of the
/// second largest to the largest discriminant; for a trimmed point, the
/// log-ratio of its best discriminant to the threshold. Always <= 0 up to
/// ties. With k = 1 retained points get -inf.
std::vector<double> bayes_factors(const ModelParams& params, const Dataset& data,
                                  const Assignment& assignment);

}  // namespace tclust
