#include "ppqkd/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ppqkd {

namespace {

std::vector<Eigen::Index> factor_strides(const std::vector<Eigen::Index>& dims) {
  std::vector<Eigen::Index> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) {
    strides[k - 1] = strides[k] * dims[k];
  }
  return strides;
}

}  // namespace

DensityOperator::DensityOperator(ComplexMatrix matrix, std::vector<Eigen::Index> factor_dims)
    : matrix_(std::move(matrix)), factor_dims_(std::move(factor_dims)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("DensityOperator: matrix must be square");
  }
  if (factor_dims_.empty()) {
    throw std::invalid_argument("DensityOperator: factor_dims must be non-empty");
  }
  Eigen::Index prod = 1;
  for (Eigen::Index d : factor_dims_) {
    if (d < 1) throw std::invalid_argument("DensityOperator: factor dims must be positive");
    prod *= d;
  }
  if (prod != matrix_.rows()) {
    throw std::invalid_argument("DensityOperator: factor_dims product must match dimension");
  }
  if (hermiticity_error(matrix_) > kDensityHermitianTol) {
    throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kDensityHermitianTol) {
    throw std::invalid_argument("DensityOperator: trace must be 1, got " +
                                std::to_string(tr.real()));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPositivityTol) {
    throw std::invalid_argument("DensityOperator: matrix is not positive semidefinite");
  }
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
  const auto& dims = rho.factor_dims();
  if (keep.empty()) {
    throw std::invalid_argument("partial_trace: keep set must be non-empty");
  }
  std::vector<std::size_t> kept = keep;
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw std::invalid_argument("partial_trace: duplicate factor index");
  }
  if (kept.back() >= dims.size()) {
    throw std::invalid_argument("partial_trace: factor index " + std::to_string(kept.back()) +
                                " out of range");
  }

  std::vector<bool> is_kept(dims.size(), false);
  for (std::size_t k : kept) is_kept[k] = true;

  const auto strides = factor_strides(dims);
  std::vector<Eigen::Index> out_dims;
  out_dims.reserve(kept.size());
  for (std::size_t k : kept) out_dims.push_back(dims[k]);
  const auto out_strides = factor_strides(out_dims);

  const Eigen::Index dim = rho.dim();
  const Eigen::Index out_dim =
      std::accumulate(out_dims.begin(), out_dims.end(), Eigen::Index{1}, std::multiplies<>());
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);

  std::vector<Eigen::Index> mi(dims.size()), mj(dims.size());
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < dims.size(); ++k) mi[k] = (i / strides[k]) % dims[k];
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (std::size_t k = 0; k < dims.size(); ++k) mj[k] = (j / strides[k]) % dims[k];
      bool diagonal_on_traced = true;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (!is_kept[k] && mi[k] != mj[k]) {
          diagonal_on_traced = false;
          break;
        }
      }
      if (!diagonal_on_traced) continue;
      Eigen::Index oi = 0, oj = 0;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        oi += mi[kept[k]] * out_strides[k];
        oj += mj[kept[k]] * out_strides[k];
      }
      out(oi, oj) += rho.matrix()(i, j);
    }
  }
  return DensityOperator(std::move(out), std::move(out_dims));
}

RealVector eigenvalues_hermitian(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("eigenvalues_hermitian: matrix must be square");
  }
  if (hermiticity_error(m) > kEigenHermitianTol) {
    throw std::invalid_argument("eigenvalues_hermitian: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  RealVector evals = solver.eigenvalues();
  return evals.reverse();
}

double von_neumann_entropy(const DensityOperator& rho) {
  const RealVector evals = eigenvalues_hermitian(rho.matrix());
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    const double lambda = evals[i];
    if (lambda > kEntropyEigenvalueClamp) entropy -= lambda * std::log2(lambda);
  }
  return entropy;
}

double binary_entropy(double p) {
  if (!(p >= -kProbabilityTol && p <= 1.0 + kProbabilityTol)) {
    throw std::invalid_argument("binary_entropy: probability out of [0,1]: " + std::to_string(p));
  }
  p = std::clamp(p, 0.0, 1.0);
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace ppqkd
