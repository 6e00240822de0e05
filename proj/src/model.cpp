#include "tclust/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace tclust {

namespace {

constexpr double kRatioSlack = 1e-8;

bool all_finite(const Matrix& m) { return m.allFinite(); }

Vector sorted_eigenvalues(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw DecompositionError("eigendecomposition failed");
    }
    return solver.eigenvalues();
}

}  // namespace

Dataset::Dataset(Matrix pts) : points(std::move(pts)) {
    if (points.rows() < 1 || points.cols() < 1) {
        throw InvalidInputError("dataset must have n >= 1 and p >= 1");
    }
    if (!all_finite(points)) {
        throw InvalidInputError("dataset contains non-finite entries");
    }
}

Index Dataset::distinct_points() const {
    std::set<std::vector<double>> seen;
    for (Index i = 0; i < n(); ++i) {
        std::vector<double> row(points.cols());
        for (Index j = 0; j < points.cols(); ++j) row[static_cast<size_t>(j)] = points(i, j);
        seen.insert(std::move(row));
    }
    return static_cast<Index>(seen.size());
}

void ConstraintSpec::validate() const {
    if (std::isnan(c) || c < 1.0) {
        throw InvalidInputError("constraint ratio bound c must be >= 1");
    }
}

void ModelParams::validate_structure() const {
    const int kk = k();
    if (kk < 1 || means.size() != weights.size() || covariances.size() != weights.size()) {
        throw InvalidInputError("model params must have k >= 1 consistent components");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
            throw InvalidInputError("weights must lie in [0, 1]");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidInputError("weights must sum to 1 within 1e-12");
    }
    const Index dim = p();
    for (int j = 0; j < kk; ++j) {
        const auto& mu = means[static_cast<size_t>(j)];
        const auto& sigma = covariances[static_cast<size_t>(j)];
        if (mu.size() != dim || !mu.allFinite()) {
            throw InvalidInputError("means must be finite p-vectors");
        }
        if (sigma.rows() != dim || sigma.cols() != dim || !all_finite(sigma)) {
            throw InvalidInputError("covariances must be finite p x p matrices");
        }
        const double scale = 1.0 + sigma.cwiseAbs().maxCoeff();
        if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw InvalidInputError("covariances must be symmetric within 1e-10");
        }
        if (sorted_eigenvalues(sigma).minCoeff() <= 0.0) {
            throw InvalidInputError("covariances must be positive definite");
        }
    }
}

Index Assignment::retained() const {
    Index r = 0;
    for (int l : labels) {
        if (l != 0) ++r;
    }
    return r;
}

Assignment Assignment::from_labels(std::vector<int> labels, int k) {
    Assignment a;
    a.counts.assign(static_cast<size_t>(k), 0);
    for (int l : labels) {
        if (l < 0 || l > k) throw InvalidInputError("labels must lie in {0,...,k}");
        if (l > 0) ++a.counts[static_cast<size_t>(l - 1)];
    }
    a.labels = std::move(labels);
    return a;
}

void FitConfig::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw InvalidInputError("alpha must lie in [0, 1)");
    }
    if (n_starts < 1 || f_iters < 1 || max_iters < 1) {
        throw InvalidInputError("n_starts, f_iters and max_iters must be positive");
    }
    if (!(tol >= 0.0)) {
        throw InvalidInputError("tol must be non-negative");
    }
}

std::string FitConfig::small_sample_warning(Index n, Index p, int k) const {
    const Index m = retained_count(n, alpha);
    const Index needed = static_cast<Index>(k) * (p + 1);
    if (m >= needed) return {};
    std::ostringstream os;
    os << "retained sample size " << m << " is below the recommended k*(p+1) = " << needed;
    return os.str();
}

Index retained_count(Index n, double alpha) {
    const double x = static_cast<double>(n) * (1.0 - alpha);
    auto m = static_cast<Index>(std::ceil(x - 1e-9));
    if (m < 1) m = 1;
    if (m > n) m = n;
    return m;
}

bool validate_params(const ModelParams& params, const ConstraintSpec& spec) {
    spec.validate();
    const int k = params.k();
    const Index p = params.p();
    for (const auto& sigma : params.covariances) {
        if (!all_finite(sigma)) {
            throw InvalidInputError("covariance contains non-finite entries");
        }
    }
    for (const auto& mu : params.means) {
        if (!mu.allFinite()) {
            throw InvalidInputError("mean contains non-finite entries");
        }
    }

    switch (spec.mode) {
        case RestrictionMode::EigenRatio: {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& sigma : params.covariances) {
                const Vector ev = sorted_eigenvalues(sigma);
                lo = std::min(lo, ev.minCoeff());
                hi = std::max(hi, ev.maxCoeff());
            }
            if (lo <= 0.0) return false;
            if (!std::isfinite(spec.c)) return true;
            return hi <= spec.c * lo * (1.0 + kRatioSlack);
        }
        case RestrictionMode::DeterminantRatio: {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& sigma : params.covariances) {
                const Vector ev = sorted_eigenvalues(sigma);
                if (ev.minCoeff() <= 0.0) return false;
                const double scale = std::exp(ev.array().log().mean());  // |Sigma|^(1/p)
                lo = std::min(lo, scale);
                hi = std::max(hi, scale);
            }
            if (!std::isfinite(spec.c)) return true;
            return hi <= spec.c * lo * (1.0 + kRatioSlack);
        }
        case RestrictionMode::SphericalEqual: {
            double trace_sum = 0.0;
            for (const auto& sigma : params.covariances) trace_sum += sigma.trace();
            const double sigma2 = trace_sum / (static_cast<double>(k) * static_cast<double>(p));
            if (sigma2 <= 0.0) return false;
            const Matrix target = sigma2 * Matrix::Identity(p, p);
            for (const auto& sigma : params.covariances) {
                if ((sigma - target).cwiseAbs().maxCoeff() > 1e-8 * sigma2) return false;
            }
            return true;
        }
        case RestrictionMode::CommonCovariance: {
            const Matrix& ref = params.covariances.front();
            const double scale = 1.0 + ref.cwiseAbs().maxCoeff();
            for (const auto& sigma : params.covariances) {
                if ((sigma - ref).cwiseAbs().maxCoeff() > 1e-8 * scale) return false;
            }
            return true;
        }
        case RestrictionMode::Unrestricted: {
            for (const auto& sigma : params.covariances) {
                if (sorted_eigenvalues(sigma).minCoeff() <= 0.0) return false;
            }
            return true;
        }
    }
    return false;
}

}  // namespace tclust
