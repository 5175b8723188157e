#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "jch/mode_algebra.hpp"

namespace jch {

/// Validation tolerances for a density matrix.  Positivity is only checked to
/// -1e-6: the first-order stepper does not preserve it exactly.
struct StateTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double min_eigenvalue = -1e-6;
};

class DensityMatrix {
 public:
  DensityMatrix(BasisPtr basis, CMatrix elements) : basis_(std::move(basis)), rho_(std::move(elements)) {
    if (!basis_) throw BasisError("density matrix without basis");
    if (rho_.rows() != basis_->dim() || rho_.cols() != basis_->dim())
      throw BasisError("density matrix dimension does not match basis");
  }

  /// |j⟩⟨j| for basis state j.
  static DensityMatrix pure(BasisPtr basis, std::size_t j) {
    const auto d = basis->dim();
    if (static_cast<Eigen::Index>(j) >= d) throw std::out_of_range("basis index out of range");
    CMatrix m = CMatrix::Zero(d, d);
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
    return DensityMatrix(std::move(basis), std::move(m));
  }

  const ProjectedBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const CMatrix& matrix() const { return rho_; }
  CMatrix& matrix() { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }

  cplx trace() const { return rho_.trace(); }
  double trace_error() const { return std::abs(rho_.trace() - cplx(1.0, 0.0)); }
  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    // Eigenvalues of the hermitian part; the anti-hermitian remainder is
    // tracked separately by hermiticity_error().
    const CMatrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  bool is_valid(const StateTolerances& tol = {}) const {
    return hermiticity_error() <= tol.hermiticity && trace_error() <= tol.trace &&
           min_eigenvalue() >= tol.min_eigenvalue;
  }

 private:
  BasisPtr basis_;
  CMatrix rho_;
};

}  // namespace jch
