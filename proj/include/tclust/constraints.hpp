#pragma once

#include "tclust/model.hpp"

#include <vector>

namespace tclust {

/// Eigendecomposition of one symmetric matrix: eigenvalues in descending
/// order, eigenvectors as columns of an orthogonal matrix.
struct EigenStructure {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// The feasible set for a flattened vector of group eigenvalues: every entry
/// at most c times every other entry, all entries at least `floor`. `c` may
/// be +inf, in which case only the floor applies.
struct ConeConstraint {
    double c = 1.0;
    double floor = 0.0;

    [[nodiscard]] bool ratio_feasible(const Vector& v) const;
    [[nodiscard]] bool contains(const Vector& v) const;
};

struct DykstraResult {
    Vector point;
    bool converged = true;
    int cycles = 0;
};

struct RestrictionResult {
    std::vector<Matrix> covariances;
    bool degenerate = false;           // all eigenvalues zero in every group
    bool projection_converged = true;  // Dykstra hit its feasibility test
};

/// Throws InvalidInputError unless S is symmetric within 1e-8 (relative).
EigenStructure sym_eigen(const Matrix& s);

/// Euclidean projection onto the half-space { v : v[u] <= c * v[r] }.
Vector halfspace_project(Vector v, Index u_idx, Index r_idx, double c);

/// Dykstra's cyclic projection onto the intersection of the pairwise
/// half-spaces, sweeping ordered pairs (u, r) lexicographically with
/// per-constraint correction increments. Convergence is declared when a full
/// cycle moves the iterate by less than `tol` in sup-norm and the iterate
/// satisfies the ratio constraints; entries are then clamped to the cone
/// floor. If max_cycles is exhausted, the best ratio-feasible iterate seen is
/// returned (falling back to the all-equal point) and `converged` is false.
DykstraResult dykstra_project(const Vector& v, const ConeConstraint& cone, int max_cycles = 500,
                              double tol = 1e-10);

/// Enforces the covariance restriction of `spec` on the per-group scatter
/// matrices. EigenRatio projects the inverse eigenvalues of all groups
/// jointly onto the cone (the ratio constraints are invariant under
/// inversion) and recomposes with the original eigenvectors; DeterminantRatio
/// does the same for the k-vector of inverse scales |S_j|^(1/p), preserving
/// the unit-determinant shape factors; CommonCovariance and SphericalEqual
/// use the count-weighted closed forms. Counts are ignored by the two ratio
/// modes.
RestrictionResult restrict_covariances(const std::vector<Matrix>& sample_covs,
                                       const ConstraintSpec& spec,
                                       const std::vector<Index>& counts);

}  // namespace tclust
