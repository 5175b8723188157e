#pragma once

// Jaynes–Cummings–Hubbard chain with an attached sink.
//
//   H = Σ ω_p p⁺p⁻ + Σ ω_a a⁺a⁻ + Σ ω_g b⁺b⁻
//     + Σ (k p⁺_{i+1}p⁻_i + k p⁺_i p⁻_{i+1})
//     + Σ (μ p⁻_i a⁺_i + μ p⁺_i a⁻_i)
//     + (g + g*) Σ (b⁻_i + b⁺_i) a⁺_i a⁻_i        (phonon model only)
//
// With real g the phonon coupling in H is 2g.  Jump operators carry their rate
// as a plain prefactor, L = rate·A, so the dissipator scales with rate².

#include <string>
#include <vector>

#include "jch/density_matrix.hpp"
#include "jch/mode_algebra.hpp"

namespace jch {

enum class Dephasing { None, LindbladLike, UnitaryPhonon };
enum class SinkCoupling { PhotonOfLastCavity, ExcitonOfLastAtom };
enum class DephasingTarget { PhotonNumber, ExcitonNumber };
enum class InitialState { Vacuum, PhotonInFirstCavity };

struct ChainConfig {
  int n_atoms = 2;
  double k = 0.0;
  double mu = 0.0;
  double g = 0.0;
  double omega_a = 0.1;
  double omega_p = 0.1;
  double omega_g = 0.01;
  double rate_in = 0.0;
  double rate_out = 0.0;
  Dephasing dephasing = Dephasing::None;
  SinkCoupling sink_coupling = SinkCoupling::ExcitonOfLastAtom;
  DephasingTarget dephasing_target = DephasingTarget::PhotonNumber;
  double cavity_loss = 0.0;
  QuantaWindow window{};
  InitialState initial_state = InitialState::PhotonInFirstCavity;

  bool operator==(const ChainConfig&) const = default;
};

/// Largest quanta count any state of an n-site chain can hold (two-level
/// photons and excitons plus the sink).
inline int natural_max_quanta(int n_atoms) { return 2 * n_atoms + 1; }

inline void validate(const ChainConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (c.n_atoms < 1) fail("n_atoms must be >= 1");
  if (c.g < 0) fail("g must be >= 0");
  if (c.rate_in < 0) fail("rate_in must be >= 0");
  if (c.rate_out < 0) fail("rate_out must be >= 0");
  if (c.cavity_loss < 0) fail("cavity_loss must be >= 0");
  if (c.window.min_quanta < 0) fail("min_quanta must be >= 0");
  if (c.window.max_quanta < c.window.min_quanta) fail("max_quanta must be >= min_quanta");
  if (c.window.phonon_cap < 0) fail("phonon_cap must be >= 0");
  if (c.initial_state == InitialState::PhotonInFirstCavity && c.window.max_quanta < 1)
    fail("max_quanta must be >= 1 for initial_state=photon1");
  const int q0 = c.initial_state == InitialState::PhotonInFirstCavity ? 1 : 0;
  if (q0 < c.window.min_quanta || q0 > c.window.max_quanta)
    fail("initial state lies outside the quanta window");
}

/// Non-fatal configuration problems.
inline std::vector<std::string> config_warnings(const ChainConfig& c) {
  std::vector<std::string> w;
  const int q0 = c.initial_state == InitialState::PhotonInFirstCavity ? 1 : 0;
  if (c.rate_in > 0 && c.window.max_quanta <= q0)
    w.emplace_back("rate_in > 0 but max_quanta is saturated by the initial state; the pump projects to zero");
  if (c.dephasing == Dephasing::UnitaryPhonon && c.g == 0.0)
    w.emplace_back("dephasing=unitary with g=0: phonons are decoupled");
  if (c.dephasing == Dephasing::UnitaryPhonon && c.window.phonon_cap == 0)
    w.emplace_back("dephasing=unitary with phonon_cap=0: phonon coupling projects to zero");
  return w;
}

inline ModeLayout build_layout(const ChainConfig& c) {
  const bool phonons = c.dephasing == Dephasing::UnitaryPhonon;
  return ModeLayout::chain(c.n_atoms, phonons, std::max(2, c.window.phonon_cap + 1));
}

inline BasisPtr build_basis(const ChainConfig& c) {
  validate(c);
  return enumerate_basis(build_layout(c), c.window);
}

namespace detail {

inline void require_chain_basis(const ChainConfig& c, const ProjectedBasis& basis) {
  if (!(basis.layout() == build_layout(c))) throw BasisError("basis layout does not match the chain config");
}

inline void accumulate(CMatrix& acc, double coeff, const Operator& op) {
  if (coeff != 0.0) acc += coeff * op.matrix();
}

}  // namespace detail

inline Operator build_hamiltonian(const ChainConfig& c, const BasisPtr& basis) {
  detail::require_chain_basis(c, *basis);
  const auto& layout = basis->layout();
  const int n = c.n_atoms;
  const bool phonons = c.dephasing == Dephasing::UnitaryPhonon;
  auto photon = [&](int i) { return layout.index_of(ModeKind::Photon, i); };
  auto exciton = [&](int i) { return layout.index_of(ModeKind::Exciton, i); };
  auto phonon = [&](int i) { return layout.index_of(ModeKind::Phonon, i); };

  CMatrix h = CMatrix::Zero(basis->dim(), basis->dim());
  for (int i = 1; i <= n; ++i) {
    detail::accumulate(h, c.omega_p, number_op(basis, photon(i)));
    detail::accumulate(h, c.omega_a, number_op(basis, exciton(i)));
    if (phonons) detail::accumulate(h, c.omega_g, number_op(basis, phonon(i)));

    if (i < n) {
      detail::accumulate(h, c.k, ladder_product(basis, {{photon(i + 1), true}, {photon(i), false}}));
      detail::accumulate(h, c.k, ladder_product(basis, {{photon(i), true}, {photon(i + 1), false}}));
    }

    detail::accumulate(h, c.mu, ladder_product(basis, {{photon(i), false}, {exciton(i), true}}));
    detail::accumulate(h, c.mu, ladder_product(basis, {{photon(i), true}, {exciton(i), false}}));

    if (phonons) {
      const double coupling = c.g + c.g;  // (g + g*)
      detail::accumulate(h, coupling,
                         ladder_product(basis, {{phonon(i), false}, {exciton(i), true}, {exciton(i), false}}));
      detail::accumulate(h, coupling,
                         ladder_product(basis, {{phonon(i), true}, {exciton(i), true}, {exciton(i), false}}));
    }
  }
  return Operator(basis, std::move(h), true);
}

struct LindbladTerm {
  std::string label;
  Operator op;  // rate already folded in
};

inline std::vector<LindbladTerm> build_lindblad_terms(const ChainConfig& c, const BasisPtr& basis) {
  detail::require_chain_basis(c, *basis);
  const auto& layout = basis->layout();
  const int n = c.n_atoms;
  std::vector<LindbladTerm> terms;

  if (c.rate_in > 0)
    terms.push_back({"in", op_scale(ladder_raise(basis, layout.index_of(ModeKind::Photon, 1)), c.rate_in)});

  if (c.rate_out > 0) {
    const auto source = c.sink_coupling == SinkCoupling::PhotonOfLastCavity ? layout.index_of(ModeKind::Photon, n)
                                                                            : layout.index_of(ModeKind::Exciton, n);
    terms.push_back({"out", op_scale(ladder_product(basis, {{layout.sink(), true}, {source, false}}), c.rate_out)});
  }

  if (c.dephasing == Dephasing::LindbladLike && c.g > 0) {
    const auto kind = c.dephasing_target == DephasingTarget::PhotonNumber ? ModeKind::Photon : ModeKind::Exciton;
    for (int i = 1; i <= n; ++i)
      terms.push_back({"dephasing_" + std::to_string(i), op_scale(number_op(basis, layout.index_of(kind, i)), c.g)});
  }

  if (c.cavity_loss > 0)
    for (int i = 1; i <= n; ++i)
      terms.push_back(
          {"loss_" + std::to_string(i), op_scale(ladder_lower(basis, layout.index_of(ModeKind::Photon, i)), c.cavity_loss)});

  return terms;
}

inline std::size_t initial_state_index(const ChainConfig& c, const ProjectedBasis& basis) {
  Occupation occ(basis.layout().size(), 0);
  if (c.initial_state == InitialState::PhotonInFirstCavity) occ[basis.layout().index_of(ModeKind::Photon, 1)] = 1;
  return basis.index_of(occ);
}

inline DensityMatrix initial_density_matrix(const ChainConfig& c, const BasisPtr& basis) {
  detail::require_chain_basis(c, *basis);
  return DensityMatrix::pure(basis, initial_state_index(c, *basis));
}

/// Everything the integrator needs for one configuration.
struct ChainModel {
  ChainConfig config;
  BasisPtr basis;
  Operator hamiltonian;
  std::vector<LindbladTerm> terms;

  explicit ChainModel(const ChainConfig& c)
      : config(c),
        basis(build_basis(c)),
        hamiltonian(build_hamiltonian(c, basis)),
        terms(build_lindblad_terms(c, basis)) {}
};

}  // namespace jch
