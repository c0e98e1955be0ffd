#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "ppqkd/errors.hpp"

namespace ppqkd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Numerical tolerances used by the state/operator invariants.
inline constexpr double kDensityHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kEigenHermitianTol = 1e-10;
inline constexpr double kEntropyEigenvalueClamp = 1e-12;
inline constexpr double kProbabilityTol = 1e-12;
inline constexpr double kRowSumTol = 1e-10;

/// Kronecker product a ⊗ b. Row-major factor convention: entry
/// (i*rows(b)+k, j*cols(b)+l) = a(i,j)*b(k,l).
template <typename DerivedA, typename DerivedB>
auto tensor(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return Eigen::kroneckerProduct(a.derived(), b.derived());
}

/// Largest entrywise deviation from m == m†.
template <typename Derived>
double hermiticity_error(const Eigen::MatrixBase<Derived>& m) {
  return (m.derived() - m.derived().adjoint()).cwiseAbs().maxCoeff();
}

/// |v><v| for a (possibly subnormalized) state vector.
template <typename Derived>
ComplexMatrix projector(const Eigen::MatrixBase<Derived>& v) {
  return v.derived() * v.derived().adjoint();
}

/// Hermitian, unit-trace, positive-semidefinite matrix together with an
/// explicit tensor-factor layout. Row-major factor convention: flat index
/// i = i_0 * (d_1 * ... * d_{m-1}) + i_1 * (d_2 * ...) + ... + i_{m-1}.
/// Immutable after construction; the constructor enforces the invariants
/// and throws std::invalid_argument on violation.
class DensityOperator {
 public:
  DensityOperator(ComplexMatrix matrix, std::vector<Eigen::Index> factor_dims);

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<Eigen::Index>& factor_dims() const { return factor_dims_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
  std::vector<Eigen::Index> factor_dims_;
};

/// Partial trace keeping the listed factors (order preserved ascending).
/// Trace is preserved; invalid or empty factor sets are rejected.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep);

/// Eigenvalues of a Hermitian matrix, descending. Rejects inputs whose
/// hermiticity error exceeds 1e-10.
RealVector eigenvalues_hermitian(const ComplexMatrix& m);

/// Von Neumann entropy −Σ λ log2 λ in bits. Eigenvalues at or below the
/// clamp threshold contribute nothing.
double von_neumann_entropy(const DensityOperator& rho);

/// Shannon binary entropy in bits, with 0·log 0 = 0. Inputs outside [0,1]
/// by more than 1e-12 are rejected; within tolerance they are clamped.
double binary_entropy(double p);

}  // namespace ppqkd
