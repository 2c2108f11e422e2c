#pragma once

#include <Eigen/Dense>

namespace fiberparc {

/// Orthonormal eigenbasis of a normalized graph Laplacian.
/// Eigenvalues are sorted ascending (stable on ties); every eigenvector has
/// its largest-magnitude component positive (ties resolved to the lowest
/// index), so the basis is reproducible across runs.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
};

/// Full eigendecomposition of a symmetric matrix whose underlying graph is a
/// disjoint union of paths (each component reorders to symmetric tridiagonal
/// form). Components are solved independently with an implicit-shift QL
/// iteration and merged.
///
/// Throws std::invalid_argument for non-symmetric or non-path input and
/// std::runtime_error when the iteration cap is exceeded.
SpectralBasis eigendecompose(const Eigen::MatrixXd& laplacian);

namespace detail {

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
/// d: diagonal; e: e[i] couples nodes i and i+1 (e[size-1] is ignored);
/// z: matrix whose columns accumulate the rotations (typically an embedding
/// of the component into the full graph). On return d holds eigenvalues in
/// QL output order and the columns of z the matching eigenvectors.
/// Caps at 30 sweeps per eigenvalue.
void ql_implicit_shift(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& z);

}  // namespace detail

}  // namespace fiberparc
