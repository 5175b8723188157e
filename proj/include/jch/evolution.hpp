#pragma once

// First-order discrete Lindblad scheme:
//
//   ρ(t+δt) = U ρ(t) U† + δt Σ_i ( L_i ρ(t) L_i† − ½ {L_i† L_i, ρ(t)} ),
//   U = exp(−i δt H),  ħ = 1.
//
// U comes from the eigendecomposition of H and is computed once per (H, δt).
// The dissipator is exactly traceless, so the trace is preserved to roundoff;
// positivity is not exact and is monitored at sample points.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "jch/chain_model.hpp"
#include "jch/density_matrix.hpp"
#include "jch/mode_algebra.hpp"

namespace jch {

class Propagator {
 public:
  Propagator(Eigen::VectorXd eigenvalues, CMatrix eigenvectors)
      : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {}

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const CMatrix& eigenvectors() const { return eigenvectors_; }
  Eigen::Index dim() const { return eigenvalues_.size(); }

  std::optional<double> dt() const { return dt_; }

  /// U = V diag(exp(−i λ δt)) V†; requires with_step().
  const CMatrix& unitary() const {
    if (!dt_) throw std::logic_error("propagator has no time step; call with_step(dt)");
    return unitary_;
  }

  /// Copy with U cached for the given step.
  Propagator with_step(double dt) const {
    if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
    Propagator p = *this;
    p.dt_ = dt;
    Eigen::VectorXcd phases(dim());
    for (Eigen::Index j = 0; j < dim(); ++j) phases(j) = std::exp(cplx(0.0, -eigenvalues_(j) * dt));
    p.unitary_ = eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
    return p;
  }

  CMatrix reconstruct() const { return eigenvectors_ * eigenvalues_.cast<cplx>().asDiagonal() * eigenvectors_.adjoint(); }

 private:
  Eigen::VectorXd eigenvalues_;
  CMatrix eigenvectors_;
  std::optional<double> dt_;
  CMatrix unitary_;
};

inline Propagator diagonalize(const Operator& h) {
  if (!h.hermitian()) throw std::invalid_argument("diagonalize: operator is not flagged hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
  return Propagator(es.eigenvalues(), es.eigenvectors());
}

/// Precomputed step for one propagator and one set of jump operators.
///
/// Each jump is kept as its list of nonzeros, L = Σ_k v_k |r_k⟩⟨c_k|.  The
/// step runs in whichever frame needs fewer operations:
///  - occupation basis: U ρ U† as two dense products; L ρ L† by scattering
///    ρ(c_a, c_b) into (r_a, r_b); L†L is diagonal for monomials, so the
///    anticommutator is elementwise;
///  - eigenbasis of H: U ρ U† is an elementwise phase, and stacking the
///    jumps' nonzeros into d × M factors A, B gives L ρ L† = A (B† ρ B) A†
///    restricted to each jump's block, and L†L ρ = B (A†A) B† ρ.
/// The eigenbasis wins when the jumps have few nonzeros (no pump).
class LindbladStepper {
 public:
  LindbladStepper(std::shared_ptr<const Propagator> prop, const std::vector<LindbladTerm>& terms)
      : prop_(std::move(prop)) {
    if (!prop_ || !prop_->dt()) throw std::invalid_argument("stepper needs a propagator with a time step");
    dt_ = *prop_->dt();
    const auto d = prop_->dim();
    CMatrix k = CMatrix::Zero(d, d);
    for (const auto& t : terms) {
      if (t.op.dim() != d) throw BasisError("jump operator dimension does not match the propagator");
      const auto& op = t.op.matrix();
      Jump j;
      for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r)
          if (op(r, c) != cplx(0.0, 0.0)) j.push_back({r, c, op(r, c)});
      jumps_.push_back(std::move(j));
      k.noalias() += op.adjoint() * op;
    }
    const CMatrix off = k - CMatrix(k.diagonal().asDiagonal());
    diagonal_decay_ = off.cwiseAbs().maxCoeff() == 0.0;
    kr_.resize(d, d);

    const double dd = static_cast<double>(d);
    double scatter = 0.0, m = 0.0;
    for (const auto& j : jumps_) {
      scatter += static_cast<double>(j.size() * j.size());
      m += static_cast<double>(j.size());
    }
    const double occupation_cost = 2 * dd * dd * dd + scatter + (diagonal_decay_ ? dd * dd : 2 * dd * dd * dd);
    const double eigen_cost = dd * dd + 3 * m * dd * dd + 3 * m * m * dd;
    eigen_frame_ = jumps_.empty() || eigen_cost < occupation_cost;
    if (eigen_frame_)
      init_eigen_frame();
    else
      init_occupation_frame(k);
  }

  double dt() const { return dt_; }
  bool eigen_frame() const { return eigen_frame_; }

  /// Occupation-basis matrix to the frame the step works in, and back.
  CMatrix to_frame(const CMatrix& m) const {
    if (!eigen_frame_) return m;
    const auto& v = prop_->eigenvectors();
    return v.adjoint() * m * v;
  }
  CMatrix from_frame(const CMatrix& m) const {
    if (!eigen_frame_) return m;
    const auto& v = prop_->eigenvectors();
    return v * m * v.adjoint();
  }

  /// out = one step applied to a hermitian rho, both in the stepper's frame.
  /// out must not alias rho.
  void step(const CMatrix& rho, CMatrix& out) {
    if (eigen_frame_)
      step_eigen(rho, out);
    else
      step_occupation(rho, out);
  }

 private:
  struct Entry {
    Eigen::Index row, col;
    cplx value;
  };
  using Jump = std::vector<Entry>;

  void init_occupation_frame(const CMatrix& k) {
    u_ = prop_->unitary();
    u_adj_ = u_.adjoint();
    tmp_.resize(u_.rows(), u_.cols());
    if (diagonal_decay_) {
      const Eigen::VectorXd kd = k.diagonal().real();
      decay_ = (0.5 * dt_) * (kd.replicate(1, kd.size()) + kd.transpose().replicate(kd.size(), 1)).cast<cplx>();
    } else {
      decay_ = k;
    }
  }

  void init_eigen_frame() {
    const auto d = prop_->dim();
    const auto& v = prop_->eigenvectors();
    Eigen::VectorXcd phases(d);
    for (Eigen::Index j = 0; j < d; ++j) phases(j) = std::exp(cplx(0.0, -prop_->eigenvalues()(j) * dt_));
    phase_ = phases * phases.adjoint();
    Eigen::Index m = 0;
    for (const auto& j : jumps_) m += static_cast<Eigen::Index>(j.size());
    a_.resize(d, m);
    b_.resize(d, m);
    block_mask_ = CMatrix::Zero(m, m);
    Eigen::Index start = 0;
    for (const auto& j : jumps_) {
      const auto n = static_cast<Eigen::Index>(j.size());
      for (Eigen::Index k = 0; k < n; ++k) {
        a_.col(start + k) = j[k].value * v.row(j[k].row).adjoint();
        b_.col(start + k) = v.row(j[k].col).adjoint();
      }
      block_mask_.block(start, start, n, n).setOnes();
      start += n;
    }
    gram_ = block_mask_.cwiseProduct(a_.adjoint() * a_);
    c_.resize(m, d);
    x_.resize(m, m);
    ax_.resize(d, m);
    gc_.resize(m, d);
  }

  void step_occupation(const CMatrix& rho, CMatrix& out) {
    tmp_.noalias() = u_ * rho;
    out.noalias() = tmp_ * u_adj_;
    if (jumps_.empty()) return;
    for (const auto& j : jumps_)
      for (const auto& p : j)
        for (const auto& q : j) out(p.row, q.row) += dt_ * p.value * std::conj(q.value) * rho(p.col, q.col);
    if (diagonal_decay_) {
      out -= decay_.cwiseProduct(rho);
    } else {
      kr_.noalias() = decay_ * rho;
      out.noalias() -= (0.5 * dt_) * (kr_ + kr_.adjoint());
    }
  }

  // The factors are thin (M is a handful), where coefficient-based products
  // beat blocked ones.
  void step_eigen(const CMatrix& rho, CMatrix& out) {
    out = phase_.cwiseProduct(rho);
    if (jumps_.empty()) return;
    c_ = b_.adjoint().lazyProduct(rho);
    x_ = c_.lazyProduct(b_).cwiseProduct(block_mask_);
    ax_ = a_.lazyProduct(x_);
    gc_ = gram_.lazyProduct(c_);
    out += dt_ * ax_.lazyProduct(a_.adjoint());
    kr_ = b_.lazyProduct(gc_);
    out -= (0.5 * dt_) * (kr_ + kr_.adjoint());
  }

  std::shared_ptr<const Propagator> prop_;
  double dt_ = 0.0;
  std::vector<Jump> jumps_;
  bool diagonal_decay_ = false;
  bool eigen_frame_ = false;
  CMatrix kr_;
  // occupation frame
  CMatrix u_, u_adj_, tmp_;
  CMatrix decay_;  // ½δt (k_i + k_j) when L†L is diagonal, else Σ L†L
  // eigen frame
  CMatrix phase_;                       // φ_i φ_j*
  CMatrix a_, b_, block_mask_, gram_;   // stacked factors, M = total nonzeros
  CMatrix c_, x_, ax_, gc_;
};

inline DensityMatrix lindblad_step(const DensityMatrix& rho, const Propagator& prop,
                                   const std::vector<LindbladTerm>& terms, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  if (!prop.dt() || *prop.dt() != dt) throw std::invalid_argument("propagator was built for a different dt");
  if (prop.dim() != rho.dim()) throw BasisError("propagator dimension does not match the state");
  for (const auto& t : terms)
    if (!same_basis(t.op.basis(), rho.basis())) throw BasisError("jump operator on a different basis");
  LindbladStepper stepper(std::make_shared<const Propagator>(prop), terms);
  CMatrix out(rho.dim(), rho.dim());
  stepper.step(stepper.to_frame(rho.matrix()), out);
  return DensityMatrix(rho.basis_ptr(), stepper.from_frame(out));
}

/// Re tr(op ρ).  For a hermitian op the imaginary part must vanish to 1e-9.
inline double observable(const DensityMatrix& rho, const Operator& op) {
  if (!same_basis(rho.basis(), op.basis())) throw BasisError("observable on a different basis");
  const cplx v = op.matrix().cwiseProduct(rho.matrix().transpose()).sum();
  if (op.hermitian() && std::abs(v.imag()) > 1e-9)
    throw std::logic_error("hermitian observable has imaginary expectation " + std::to_string(v.imag()));
  return v.real();
}

/// Expectation of a diagonal observable given by per-state weights.
inline double diagonal_expectation(const CMatrix& rho, const Eigen::VectorXd& weights) {
  return (rho.diagonal().real().array() * weights.array()).sum();
}

inline Eigen::VectorXd occupation_weights(const ProjectedBasis& basis, std::size_t mode) {
  Eigen::VectorXd w(basis.dim());
  for (Eigen::Index j = 0; j < basis.dim(); ++j) w(j) = basis.state(static_cast<std::size_t>(j))[mode];
  return w;
}

/// Steps a chain model forward from a given state, tracking the sink
/// population and the trace after every step.
class Integrator {
 public:
  Integrator(const ChainModel& model, std::shared_ptr<const Propagator> prop, DensityMatrix rho0)
      : basis_(model.basis), stepper_(std::move(prop), model.terms) {
    if (!same_basis(rho0.basis(), *basis_)) throw BasisError("initial state on a different basis");
    rho_ = stepper_.to_frame(rho0.matrix());
    next_.resize(rho_.rows(), rho_.cols());
    sink_ = stepper_.to_frame(occupation_weights(*basis_, basis_->layout().sink()).cast<cplx>().asDiagonal());
  }

  Integrator(const ChainModel& model, double dt)
      : Integrator(model, std::make_shared<const Propagator>(diagonalize(model.hamiltonian).with_step(dt)),
                   initial_density_matrix(model.config, model.basis)) {}

  void step() {
    stepper_.step(rho_, next_);
    rho_.swap(next_);
    ++steps_;
  }

  std::size_t steps() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * stepper_.dt(); }
  double dt() const { return stepper_.dt(); }
  cplx trace() const { return rho_.trace(); }
  /// ρ in the occupation basis.
  CMatrix rho() const { return stepper_.from_frame(rho_); }
  DensityMatrix state() const { return DensityMatrix(basis_, rho()); }
  double sink_population() const { return sink_.cwiseProduct(rho_.transpose()).sum().real(); }

 private:
  BasisPtr basis_;
  LindbladStepper stepper_;
  CMatrix rho_, next_;  // in the stepper's frame
  CMatrix sink_;
  std::size_t steps_ = 0;
};

struct TrajectoryColumn {
  std::string name;
  std::vector<double> values;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<TrajectoryColumn> columns;  // sink, photon_i…, exciton_i…, trace, min_eig_flag
  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 1.0;
  bool positivity_violated = false;

  const std::vector<double>& column(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return c.values;
    throw std::out_of_range("no trajectory column " + name);
  }
  std::size_t rows() const { return times.size(); }
};

inline std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  if (t_end < 0) throw std::invalid_argument("t_end must be >= 0");
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

/// Runs ⌈t_end/dt⌉ steps and records observables at step 0, every
/// sample_every steps, and at the final step.
inline TrajectoryRecord evolve(const ChainModel& model, std::shared_ptr<const Propagator> prop, DensityMatrix rho0,
                               double t_end, std::size_t sample_every, const StateTolerances& tol = {}) {
  if (sample_every == 0) throw std::invalid_argument("sample_every must be >= 1");
  Integrator integ(model, std::move(prop), std::move(rho0));
  const std::size_t n_steps = step_count(t_end, integ.dt());
  const auto& basis = *model.basis;
  const auto& layout = basis.layout();
  const int n = model.config.n_atoms;

  TrajectoryRecord rec;
  std::vector<Eigen::VectorXd> weights;
  rec.columns.push_back({"sink", {}});
  weights.push_back(occupation_weights(basis, layout.sink()));
  for (int i = 1; i <= n; ++i) {
    rec.columns.push_back({"photon_" + std::to_string(i), {}});
    weights.push_back(occupation_weights(basis, layout.index_of(ModeKind::Photon, i)));
  }
  for (int i = 1; i <= n; ++i) {
    rec.columns.push_back({"exciton_" + std::to_string(i), {}});
    weights.push_back(occupation_weights(basis, layout.index_of(ModeKind::Exciton, i)));
  }
  rec.columns.push_back({"trace", {}});
  rec.columns.push_back({"min_eig_flag", {}});
  const std::size_t trace_col = weights.size();

  auto sample = [&] {
    const auto st = integ.state();
    rec.times.push_back(integ.time());
    for (std::size_t c = 0; c < weights.size(); ++c)
      rec.columns[c].values.push_back(diagonal_expectation(st.matrix(), weights[c]));
    const double tr = st.trace().real();
    rec.columns[trace_col].values.push_back(tr);
    const double lam = st.min_eigenvalue();
    const bool bad = lam < tol.min_eigenvalue;
    rec.columns[trace_col + 1].values.push_back(bad ? 1.0 : 0.0);
    rec.min_eigenvalue = std::min(rec.min_eigenvalue, lam);
    rec.positivity_violated = rec.positivity_violated || bad;
    rec.max_hermiticity_error = std::max(rec.max_hermiticity_error, st.hermiticity_error());
  };

  sample();
  for (std::size_t s = 1; s <= n_steps; ++s) {
    integ.step();
    rec.max_trace_drift = std::max(rec.max_trace_drift, std::abs(integ.trace() - cplx(1.0, 0.0)));
    if (s % sample_every == 0 || s == n_steps) sample();
  }
  return rec;
}

inline TrajectoryRecord evolve(const ChainConfig& config, double t_end, double dt, std::size_t sample_every) {
  const ChainModel model(config);
  auto prop = std::make_shared<const Propagator>(diagonalize(model.hamiltonian).with_step(dt));
  return evolve(model, std::move(prop), initial_density_matrix(config, model.basis), t_end, sample_every);
}

}  // namespace jch
