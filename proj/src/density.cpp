#include "tclust/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<GaussianLogDensity> component_densities(const ModelParams& params) {
    std::vector<GaussianLogDensity> out;
    out.reserve(params.covariances.size());
    for (size_t j = 0; j < params.covariances.size(); ++j) {
        out.emplace_back(params.means[j], params.covariances[j]);
    }
    return out;
}

DiscriminantRow row_from_logs(std::vector<double> per_cluster) {
    DiscriminantRow row;
    row.best_index = 1;
    row.best_value = per_cluster[0];
    for (size_t j = 1; j < per_cluster.size(); ++j) {
        if (per_cluster[j] > row.best_value) {
            row.best_value = per_cluster[j];
            row.best_index = static_cast<int>(j) + 1;
        }
    }
    row.per_cluster = std::move(per_cluster);
    return row;
}

/// Indices ordered by (d descending, index ascending); the retained set is
/// the first m entries.
std::vector<Index> retention_order(const std::vector<double>& d) {
    std::vector<Index> order(d.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double da = d[static_cast<size_t>(a)];
        const double db = d[static_cast<size_t>(b)];
        if (da != db) return da > db;
        return a < b;
    });
    return order;
}

}  // namespace

GaussianLogDensity::GaussianLogDensity(Vector mu, const Matrix& sigma) : mu_(std::move(mu)) {
    llt_.compute(sigma);
    if (llt_.info() != Eigen::Success) {
        throw DecompositionError("covariance is not positive definite");
    }
    const double half_logdet = llt_.matrixLLT().diagonal().array().log().sum();
    log_norm_ = -0.5 * static_cast<double>(mu_.size()) * kLog2Pi - half_logdet;
    scratch_.resize(mu_.size());
}

double GaussianLogDensity::mahalanobis_sq(const Eigen::Ref<const Vector>& x) const {
    scratch_ = x - mu_;
    llt_.matrixL().solveInPlace(scratch_);
    return scratch_.squaredNorm();
}

double GaussianLogDensity::operator()(const Eigen::Ref<const Vector>& x) const {
    return log_norm_ - 0.5 * mahalanobis_sq(x);
}

double log_normal_pdf(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& mu,
                      const Matrix& sigma) {
    return GaussianLogDensity(mu, sigma)(x);
}

DiscriminantRow discriminants(const Eigen::Ref<const Vector>& x, const ModelParams& params) {
    const int k = params.k();
    std::vector<double> logs(static_cast<size_t>(k), kNegInf);
    for (int j = 0; j < k; ++j) {
        const double w = params.weights[static_cast<size_t>(j)];
        if (w <= 0.0) continue;
        logs[static_cast<size_t>(j)] =
            std::log(w) + log_normal_pdf(x, params.means[static_cast<size_t>(j)],
                                         params.covariances[static_cast<size_t>(j)]);
    }
    return row_from_logs(std::move(logs));
}

std::vector<DiscriminantRow> discriminant_rows(const Dataset& data, const ModelParams& params) {
    const int k = params.k();
    const Index n = data.n();

    std::vector<int> alive;
    std::vector<double> log_weights(static_cast<size_t>(k), kNegInf);
    for (int j = 0; j < k; ++j) {
        if (params.weights[static_cast<size_t>(j)] > 0.0) {
            alive.push_back(j);
            log_weights[static_cast<size_t>(j)] = std::log(params.weights[static_cast<size_t>(j)]);
        }
    }
    std::vector<GaussianLogDensity> densities;
    densities.reserve(alive.size());
    for (int j : alive) {
        densities.emplace_back(params.means[static_cast<size_t>(j)],
                               params.covariances[static_cast<size_t>(j)]);
    }

    std::vector<DiscriminantRow> rows;
    rows.reserve(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
        std::vector<double> logs(static_cast<size_t>(k), kNegInf);
        for (size_t a = 0; a < alive.size(); ++a) {
            const int j = alive[a];
            logs[static_cast<size_t>(j)] =
                log_weights[static_cast<size_t>(j)] + densities[a](data.points.row(i).transpose());
        }
        rows.push_back(row_from_logs(std::move(logs)));
    }
    return rows;
}

std::vector<double> best_discriminants(const Dataset& data, const ModelParams& params) {
    const auto rows = discriminant_rows(data, params);
    std::vector<double> d;
    d.reserve(rows.size());
    for (const auto& row : rows) d.push_back(row.best_value);
    return d;
}

double threshold(const ModelParams& params, const Dataset& data, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InvalidInputError("alpha must lie in [0, 1)");
    }
    const auto d = best_discriminants(data, params);
    const Index m = retained_count(data.n(), alpha);
    std::vector<double> sorted(d);
    std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end(),
                     std::greater<double>());
    return sorted[static_cast<size_t>(m - 1)];
}

Assignment assign(const ModelParams& params, const Dataset& data, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InvalidInputError("alpha must lie in [0, 1)");
    }
    const auto rows = discriminant_rows(data, params);
    std::vector<double> d;
    d.reserve(rows.size());
    for (const auto& row : rows) d.push_back(row.best_value);

    const Index m = retained_count(data.n(), alpha);
    const auto order = retention_order(d);

    Assignment a;
    a.labels.assign(static_cast<size_t>(data.n()), 0);
    a.counts.assign(static_cast<size_t>(params.k()), 0);
    for (Index r = 0; r < m; ++r) {
        const Index i = order[static_cast<size_t>(r)];
        const int j = rows[static_cast<size_t>(i)].best_index;
        a.labels[static_cast<size_t>(i)] = j;
        ++a.counts[static_cast<size_t>(j - 1)];
    }
    return a;
}

double objective(const ModelParams& params, const Dataset& data, const Assignment& assignment) {
    if (assignment.n() != data.n()) {
        throw InvalidInputError("assignment size does not match dataset");
    }
    if (assignment.k() != params.k()) {
        throw InvalidInputError("assignment cluster count does not match params");
    }
    const auto densities = component_densities(params);
    double total = 0.0;
    for (Index i = 0; i < data.n(); ++i) {
        const int label = assignment.labels[static_cast<size_t>(i)];
        if (label == 0) continue;
        const double w = params.weights[static_cast<size_t>(label - 1)];
        if (w <= 0.0) {
            throw ContractViolationError("retained observation assigned to a zero-weight cluster");
        }
        total += std::log(w) + densities[static_cast<size_t>(label - 1)](data.points.row(i).transpose());
    }
    return total;
}

std::vector<double> bayes_factors(const ModelParams& params, const Dataset& data,
                                  const Assignment& assignment) {
    if (assignment.n() != data.n()) {
        throw InvalidInputError("assignment size does not match dataset");
    }
    const auto rows = discriminant_rows(data, params);
    std::vector<double> d;
    d.reserve(rows.size());
    for (const auto& row : rows) d.push_back(row.best_value);

    // Threshold consistent with the assignment's own retained count.
    const Index m = assignment.retained();
    std::vector<double> sorted(d);
    std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end(),
                     std::greater<double>());
    const double log_threshold = sorted[static_cast<size_t>(m - 1)];

    std::vector<double> bf(static_cast<size_t>(data.n()), 0.0);
    for (Index i = 0; i < data.n(); ++i) {
        const auto& row = rows[static_cast<size_t>(i)];
        if (assignment.labels[static_cast<size_t>(i)] == 0) {
            bf[static_cast<size_t>(i)] = row.best_value - log_threshold;
        } else if (params.k() == 1) {
            bf[static_cast<size_t>(i)] = kNegInf;
        } else {
            double second = kNegInf;
            for (size_t j = 0; j < row.per_cluster.size(); ++j) {
                if (static_cast<int>(j) + 1 == row.best_index) continue;
                second = std::max(second, row.per_cluster[j]);
            }
            bf[static_cast<size_t>(i)] = second - row.best_value;
        }
    }
    return bf;
}

}  // namespace tclust
