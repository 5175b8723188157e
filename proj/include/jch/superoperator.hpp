#pragma once

// Reference solution of the continuous master equation
//
//   dρ/dt = −i[H, ρ] + Σ_i ( L_i ρ L_i† − ½ {L_i† L_i, ρ} )
//
// as an explicit Liouvillian acting on column-stacked vec(ρ), exponentiated
// by scaling and squaring with a Taylor series.  Cost grows as dim⁴, so it is
// limited to small bases; it exists to check the stepper, not to replace it.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "jch/chain_model.hpp"
#include "jch/density_matrix.hpp"

namespace jch {

inline constexpr Eigen::Index kOracleMaxDim = 16;

namespace detail {

// vec(A X B) = (Bᵀ ⊗ A) vec(X) for column-stacked vec.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double one_norm(const CMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace detail

inline CMatrix liouvillian(const Operator& h, const std::vector<LindbladTerm>& terms) {
  const auto d = h.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  const cplx i(0.0, 1.0);
  CMatrix l = -i * (detail::kron(id, h.matrix()) - detail::kron(h.matrix().transpose(), id));
  for (const auto& t : terms) {
    const CMatrix& a = t.op.matrix();
    const CMatrix ada = a.adjoint() * a;
    l += detail::kron(a.conjugate(), a);
    l -= 0.5 * (detail::kron(id, ada) + detail::kron(ada.transpose(), id));
  }
  return l;
}

/// exp(A) by scaling and squaring: A/2^s has 1-norm ≤ 1/2, Taylor terms are
/// summed until they drop below 1e-16 of the partial sum (well under the
/// 1e-12 target after squaring), then squared s times.
inline CMatrix expm_taylor(const CMatrix& a) {
  const auto n = a.rows();
  const double norm = detail::one_norm(a);
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const CMatrix scaled = a / std::ldexp(1.0, s);
  CMatrix sum = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int k = 1; k < 64; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    if (detail::one_norm(term) <= 1e-16 * detail::one_norm(sum)) break;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

inline DensityMatrix superoperator_evolve(const Operator& h, const std::vector<LindbladTerm>& terms,
                                          const DensityMatrix& rho0, double t) {
  const auto d = rho0.dim();
  if (d > kOracleMaxDim) throw std::invalid_argument("superoperator oracle limited to dimension 16");
  if (h.dim() != d) throw BasisError("hamiltonian dimension does not match the state");
  const CMatrix prop = expm_taylor(liouvillian(h, terms) * t);
  const Eigen::Map<const Eigen::VectorXcd> v0(rho0.matrix().data(), d * d);
  Eigen::VectorXcd v = prop * v0;
  return DensityMatrix(rho0.basis_ptr(), Eigen::Map<CMatrix>(v.data(), d, d));
}

inline DensityMatrix superoperator_oracle(const ChainConfig& config, double t) {
  const ChainModel model(config);
  return superoperator_evolve(model.hamiltonian, model.terms, initial_density_matrix(config, model.basis), t);
}

}  // namespace jch
