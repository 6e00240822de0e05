#include "tclust/constraints.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tclust {

namespace {

constexpr double kRatioSlack = 1e-8;

double cone_floor_for(const Vector& v) { return 1e-10 * (1.0 + v.maxCoeff()); }

Matrix recompose(const EigenStructure& es, const Vector& eigenvalues) {
    Matrix m = es.eigenvectors * eigenvalues.asDiagonal() * es.eigenvectors.transpose();
    return 0.5 * (m + m.transpose());
}

/// Flattened group-major eigenvalue vector; negatives from degenerate
/// samples are clamped to zero before any restriction logic runs.
Vector flatten_clamped(const std::vector<EigenStructure>& structs) {
    const Index p = structs.front().eigenvalues.size();
    Vector out(static_cast<Index>(structs.size()) * p);
    Index at = 0;
    for (const auto& es : structs) {
        for (Index l = 0; l < p; ++l) out[at++] = std::max(es.eigenvalues[l], 0.0);
    }
    return out;
}

Matrix weighted_pooled(const std::vector<Matrix>& covs, const std::vector<Index>& counts) {
    const Index p = covs.front().rows();
    Matrix pooled = Matrix::Zero(p, p);
    double total = 0.0;
    for (size_t j = 0; j < covs.size(); ++j) {
        const auto w = static_cast<double>(counts[j]);
        pooled += w * covs[j];
        total += w;
    }
    if (total > 0.0) {
        pooled /= total;
    } else {
        // No counts supplied: fall back to the unweighted average.
        pooled.setZero();
        for (const auto& s : covs) pooled += s;
        pooled /= static_cast<double>(covs.size());
    }
    return 0.5 * (pooled + pooled.transpose());
}

/// Lifts eigenvalues to at least `floor`; returns whether anything moved.
bool lift_eigenvalues(Vector& ev, double floor) {
    bool changed = false;
    for (Index l = 0; l < ev.size(); ++l) {
        if (ev[l] < floor) {
            ev[l] = floor;
            changed = true;
        }
    }
    return changed;
}

}  // namespace

bool ConeConstraint::ratio_feasible(const Vector& v) const {
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (lo < 0.0) return false;
    if (!std::isfinite(c)) return true;
    return hi <= c * lo * (1.0 + kRatioSlack);
}

bool ConeConstraint::contains(const Vector& v) const {
    if (v.size() == 0) return true;
    if (v.minCoeff() < floor * (1.0 - kRatioSlack)) return false;
    return ratio_feasible(v);
}

EigenStructure sym_eigen(const Matrix& s) {
    if (s.rows() != s.cols()) {
        throw InvalidInputError("sym_eigen requires a square matrix");
    }
    const double scale = 1.0 + s.cwiseAbs().maxCoeff();
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
        throw InvalidInputError("sym_eigen requires a symmetric matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
    if (solver.info() != Eigen::Success) {
        throw DecompositionError("eigendecomposition failed");
    }
    // Eigen returns ascending order; flip to descending.
    EigenStructure es;
    es.eigenvalues = solver.eigenvalues().reverse();
    es.eigenvectors = solver.eigenvectors().rowwise().reverse();
    return es;
}

Vector halfspace_project(Vector v, Index u_idx, Index r_idx, double c) {
    if (u_idx == r_idx) {
        throw InvalidInputError("halfspace indices must be distinct");
    }
    if (!std::isfinite(c)) return v;
    const double excess = v[u_idx] - c * v[r_idx];
    if (excess <= 0.0) return v;
    const double step = excess / (1.0 + c * c);
    v[u_idx] -= step;
    v[r_idx] += c * step;
    return v;
}

DykstraResult dykstra_project(const Vector& v, const ConeConstraint& cone, int max_cycles,
                              double tol) {
    if (!v.allFinite()) {
        throw InvalidInputError("dykstra_project requires finite input");
    }
    const Index m = v.size();
    DykstraResult result;
    if (m < 2 || !std::isfinite(cone.c)) {
        result.point = v.cwiseMax(cone.floor);
        return result;
    }

    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(static_cast<size_t>(m) * static_cast<size_t>(m - 1));
    for (Index u = 0; u < m; ++u) {
        for (Index r = 0; r < m; ++r) {
            if (u != r) pairs.emplace_back(u, r);
        }
    }

    Vector x = v;
    std::vector<Vector> increments(pairs.size(), Vector::Zero(m));

    Vector best_feasible;
    double best_dist = std::numeric_limits<double>::infinity();

    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        const Vector before = x;
        for (size_t h = 0; h < pairs.size(); ++h) {
            const Vector y = x + increments[h];
            x = halfspace_project(y, pairs[h].first, pairs[h].second, cone.c);
            increments[h] = y - x;
        }
        const double moved = (x - before).cwiseAbs().maxCoeff();
        const bool feasible = cone.ratio_feasible(x);
        if (feasible) {
            const double dist = (x - v).squaredNorm();
            if (dist < best_dist) {
                best_dist = dist;
                best_feasible = x;
            }
        }
        if (moved < tol && feasible) {
            result.point = x.cwiseMax(cone.floor);
            result.cycles = cycle;
            return result;
        }
    }

    result.converged = false;
    result.cycles = max_cycles;
    if (best_feasible.size() == m) {
        result.point = best_feasible.cwiseMax(cone.floor);
    } else {
        // All-equal point: feasible for every c >= 1.
        result.point = Vector::Constant(m, std::max(v.mean(), cone.floor));
    }
    return result;
}

RestrictionResult restrict_covariances(const std::vector<Matrix>& sample_covs,
                                       const ConstraintSpec& spec,
                                       const std::vector<Index>& counts) {
    if (sample_covs.empty()) {
        throw InvalidInputError("restrict_covariances requires at least one matrix");
    }
    if (counts.size() != sample_covs.size()) {
        throw InvalidInputError("counts must match the number of matrices");
    }
    spec.validate();
    const Index p = sample_covs.front().rows();
    const auto k = static_cast<Index>(sample_covs.size());

    RestrictionResult result;

    switch (spec.mode) {
        case RestrictionMode::Unrestricted:
        case RestrictionMode::EigenRatio: {
            std::vector<EigenStructure> structs;
            structs.reserve(sample_covs.size());
            for (const auto& s : sample_covs) structs.push_back(sym_eigen(s));
            const Vector lambda = flatten_clamped(structs);
            const double max_eig = lambda.maxCoeff();
            if (max_eig <= 0.0) {
                result.degenerate = true;
                result.covariances.assign(sample_covs.size(), 1e-10 * Matrix::Identity(p, p));
                return result;
            }
            const double floor = 1e-10 * (1.0 + max_eig);
            const double c = spec.mode == RestrictionMode::Unrestricted
                                 ? std::numeric_limits<double>::infinity()
                                 : spec.c;
            const ConeConstraint cone{c, floor};
            if (cone.contains(lambda)) {
                result.covariances = sample_covs;
                return result;
            }
            // Project in precision space; the ratio constraints are the same
            // for a vector and its elementwise inverse.
            const Vector precisions = lambda.cwiseMax(floor).cwiseInverse();
            const ConeConstraint precision_cone{c, cone_floor_for(precisions)};
            const DykstraResult proj = dykstra_project(precisions, precision_cone);
            result.projection_converged = proj.converged;
            const Vector restricted = proj.point.cwiseInverse();
            result.covariances.reserve(sample_covs.size());
            for (Index j = 0; j < k; ++j) {
                result.covariances.push_back(
                    recompose(structs[static_cast<size_t>(j)], restricted.segment(j * p, p)));
            }
            return result;
        }
        case RestrictionMode::DeterminantRatio: {
            std::vector<EigenStructure> structs;
            structs.reserve(sample_covs.size());
            double max_eig = 0.0;
            for (const auto& s : sample_covs) {
                structs.push_back(sym_eigen(s));
                max_eig = std::max(max_eig, std::max(structs.back().eigenvalues.maxCoeff(), 0.0));
            }
            if (max_eig <= 0.0) {
                result.degenerate = true;
                result.covariances.assign(sample_covs.size(), 1e-10 * Matrix::Identity(p, p));
                return result;
            }
            const double floor = 1e-10 * (1.0 + max_eig);
            Vector scales(k);           // sigma_j = |S_j|^(1/p)
            std::vector<Matrix> shapes;  // unit-determinant factors
            shapes.reserve(sample_covs.size());
            bool lifted_any = false;
            for (Index j = 0; j < k; ++j) {
                Vector ev = structs[static_cast<size_t>(j)].eigenvalues.cwiseMax(0.0);
                lifted_any |= lift_eigenvalues(ev, floor);
                const double sigma = std::exp(ev.array().log().mean());
                scales[j] = sigma;
                shapes.push_back(recompose(structs[static_cast<size_t>(j)], ev) / sigma);
            }
            const ConeConstraint cone{spec.c, 1e-10 * (1.0 + scales.maxCoeff())};
            if (!lifted_any && cone.contains(scales)) {
                result.covariances = sample_covs;
                return result;
            }
            const Vector inv_scales = scales.cwiseInverse();
            const ConeConstraint inv_cone{spec.c, cone_floor_for(inv_scales)};
            const DykstraResult proj = dykstra_project(inv_scales, inv_cone);
            result.projection_converged = proj.converged;
            result.covariances.reserve(sample_covs.size());
            for (Index j = 0; j < k; ++j) {
                result.covariances.push_back(shapes[static_cast<size_t>(j)] / proj.point[j]);
            }
            return result;
        }
        case RestrictionMode::CommonCovariance: {
            Matrix pooled = weighted_pooled(sample_covs, counts);
            EigenStructure es = sym_eigen(pooled);
            Vector ev = es.eigenvalues.cwiseMax(0.0);
            const double max_eig = ev.maxCoeff();
            if (max_eig <= 0.0) {
                result.degenerate = true;
                result.covariances.assign(sample_covs.size(), 1e-10 * Matrix::Identity(p, p));
                return result;
            }
            if (lift_eigenvalues(ev, 1e-10 * (1.0 + max_eig))) {
                pooled = recompose(es, ev);
            }
            result.covariances.assign(sample_covs.size(), pooled);
            return result;
        }
        case RestrictionMode::SphericalEqual: {
            const Matrix pooled = weighted_pooled(sample_covs, counts);
            double sigma2 = pooled.trace() / static_cast<double>(p);
            if (sigma2 <= 0.0) {
                result.degenerate = true;
                sigma2 = 1e-10;
            } else {
                sigma2 = std::max(sigma2, 1e-10 * (1.0 + sigma2));
            }
            result.covariances.assign(sample_covs.size(), sigma2 * Matrix::Identity(p, p));
            return result;
        }
    }
    throw InvalidInputError("unknown restriction mode");
}

}  // namespace tclust
