#pragma once

// Truncated many-mode occupation basis and ladder operators projected onto it.
//
// A layout is an ordered list of modes (photon, exciton, phonon per site plus
// a single sink).  The basis keeps only occupation vectors whose conserved
// quanta count (photons + excitons + sink) lies inside a window; phonons are
// bounded separately per site.  Operators are dense complex matrices over that
// basis.  Products of ladder operators are built as monomials: the sequence is
// applied to the unprojected occupation vector and only the final state is
// projected, so e.g. p⁻a⁺ and a⁺p⁻ give the same matrix even when the
// intermediate state leaves the window.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jch {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

class BasisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ModeKind { Photon, Exciton, Phonon, Sink };

inline const char* to_string(ModeKind kind) {
  switch (kind) {
    case ModeKind::Photon: return "photon";
    case ModeKind::Exciton: return "exciton";
    case ModeKind::Phonon: return "phonon";
    case ModeKind::Sink: return "sink";
  }
  return "?";
}

struct ModeSpec {
  ModeKind kind;
  int site;    // 1-based; the sink carries the index of the last site
  int levels;  // local Hilbert-space dimension

  bool operator==(const ModeSpec&) const = default;
};

/// Photon, exciton and sink occupations count toward the conserved quanta.
inline bool counts_as_quanta(ModeKind kind) { return kind != ModeKind::Phonon; }

class ModeLayout {
 public:
  ModeLayout() = default;

  /// Validates the structural invariants: exactly one sink, one photon and one
  /// exciton per site, phonons either on every site or none, two-level
  /// excitons and sink, and the canonical (photon, exciton[, phonon])* sink
  /// ordering.
  explicit ModeLayout(std::vector<ModeSpec> modes) : modes_(std::move(modes)) { validate(); }

  /// Generic layout without the chain structure checks.  Used for operator
  /// algebra on arbitrary small mode sets.
  static ModeLayout unchecked(std::vector<ModeSpec> modes) {
    for (const auto& m : modes)
      if (m.levels < 2) throw BasisError("mode levels must be >= 2");
    ModeLayout layout;
    layout.modes_ = std::move(modes);
    return layout;
  }

  static ModeLayout chain(int n_sites, bool with_phonons, int phonon_levels = 2, int photon_levels = 2) {
    if (n_sites < 1) throw BasisError("chain needs at least one site");
    std::vector<ModeSpec> modes;
    for (int i = 1; i <= n_sites; ++i) {
      modes.push_back({ModeKind::Photon, i, photon_levels});
      modes.push_back({ModeKind::Exciton, i, 2});
      if (with_phonons) modes.push_back({ModeKind::Phonon, i, phonon_levels});
    }
    modes.push_back({ModeKind::Sink, n_sites, 2});
    return ModeLayout(std::move(modes));
  }

  std::size_t size() const { return modes_.size(); }
  const ModeSpec& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<ModeSpec>& modes() const { return modes_; }
  auto begin() const { return modes_.begin(); }
  auto end() const { return modes_.end(); }

  int n_sites() const {
    int n = 0;
    for (const auto& m : modes_) n = std::max(n, m.site);
    return n;
  }

  bool has_phonons() const {
    return std::any_of(modes_.begin(), modes_.end(),
                       [](const ModeSpec& m) { return m.kind == ModeKind::Phonon; });
  }

  /// Index of the mode of the given kind at a site; throws if absent.
  std::size_t index_of(ModeKind kind, int site) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
      if (modes_[i].kind == kind && (kind == ModeKind::Sink || modes_[i].site == site)) return i;
    throw BasisError(std::string("no ") + to_string(kind) + " mode at site " + std::to_string(site));
  }

  std::size_t sink() const { return index_of(ModeKind::Sink, 0); }

  bool operator==(const ModeLayout&) const = default;

 private:
  void validate() const {
    if (modes_.empty()) throw BasisError("empty mode layout");
    const int n = n_sites();
    if (n < 1) throw BasisError("mode sites are 1-based");
    const bool phonons = has_phonons();
    const std::size_t per_site = phonons ? 3 : 2;
    if (modes_.size() != per_site * static_cast<std::size_t>(n) + 1)
      throw BasisError("layout must hold photon+exciton" + std::string(phonons ? "+phonon" : "") +
                       " per site plus one sink");
    std::size_t pos = 0;
    auto expect = [&](ModeKind kind, int site) {
      const auto& m = modes_[pos++];
      if (m.kind != kind || m.site != site)
        throw BasisError("layout out of canonical order at position " + std::to_string(pos - 1));
      if (m.levels < 2) throw BasisError("mode levels must be >= 2");
      if ((kind == ModeKind::Exciton || kind == ModeKind::Sink) && m.levels != 2)
        throw BasisError("exciton and sink modes are two-level");
    };
    for (int i = 1; i <= n; ++i) {
      expect(ModeKind::Photon, i);
      expect(ModeKind::Exciton, i);
      if (phonons) expect(ModeKind::Phonon, i);
    }
    expect(ModeKind::Sink, n);
  }

  std::vector<ModeSpec> modes_;
};

struct QuantaWindow {
  int min_quanta = 0;
  int max_quanta = 1;
  int phonon_cap = 1;

  bool operator==(const QuantaWindow&) const = default;
};

using Occupation = std::vector<int>;

class ProjectedBasis {
 public:
  ProjectedBasis(ModeLayout layout, QuantaWindow window, std::vector<Occupation> states)
      : layout_(std::move(layout)), window_(window), states_(std::move(states)) {
    for (std::size_t j = 0; j < states_.size(); ++j) index_.emplace(states_[j], j);
  }

  const ModeLayout& layout() const { return layout_; }
  const QuantaWindow& window() const { return window_; }
  const std::vector<Occupation>& states() const { return states_; }
  const Occupation& state(std::size_t j) const { return states_[j]; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(states_.size()); }

  std::optional<std::size_t> find(const Occupation& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const Occupation& occ) const {
    if (auto j = find(occ)) return *j;
    throw BasisError("occupation vector not in basis");
  }

  int quanta(std::size_t j) const {
    int q = 0;
    for (std::size_t m = 0; m < layout_.size(); ++m)
      if (counts_as_quanta(layout_[m].kind)) q += states_[j][m];
    return q;
  }

  bool operator==(const ProjectedBasis& other) const {
    return layout_ == other.layout_ && states_ == other.states_;
  }

 private:
  ModeLayout layout_;
  QuantaWindow window_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const ProjectedBasis>;

/// All occupation vectors inside the window, in lexicographic order.
inline BasisPtr enumerate_basis(const ModeLayout& layout, const QuantaWindow& window) {
  if (window.min_quanta < 0 || window.max_quanta < window.min_quanta || window.phonon_cap < 0)
    throw BasisError("invalid quanta window");
  std::vector<Occupation> states;
  Occupation occ(layout.size(), 0);
  // Odometer with the last mode fastest visits vectors in lexicographic order.
  const std::size_t n = layout.size();
  while (true) {
    int q = 0;
    bool phonons_ok = true;
    for (std::size_t m = 0; m < n; ++m) {
      if (counts_as_quanta(layout[m].kind))
        q += occ[m];
      else if (occ[m] > window.phonon_cap)
        phonons_ok = false;
    }
    if (phonons_ok && q >= window.min_quanta && q <= window.max_quanta) states.push_back(occ);

    bool wrapped = true;
    for (std::size_t m = n; m-- > 0;) {
      if (++occ[m] < layout[m].levels) {
        wrapped = false;
        break;
      }
      occ[m] = 0;
    }
    if (wrapped) break;
  }
  if (states.empty())
    throw BasisError("quanta window [" + std::to_string(window.min_quanta) + ", " +
                     std::to_string(window.max_quanta) + "] admits no states");
  return std::make_shared<const ProjectedBasis>(layout, window, std::move(states));
}

class Operator {
 public:
  static constexpr double kHermitianTol = 1e-12;

  Operator(BasisPtr basis, CMatrix elements, bool hermitian = false)
      : basis_(std::move(basis)), elements_(std::move(elements)), hermitian_(hermitian) {
    if (!basis_) throw BasisError("operator without basis");
    if (elements_.rows() != basis_->dim() || elements_.cols() != basis_->dim())
      throw BasisError("operator dimension does not match basis");
    if (hermitian_ && hermiticity_error() > kHermitianTol)
      throw std::invalid_argument("operator flagged hermitian but |A - A†| = " +
                                  std::to_string(hermiticity_error()));
  }

  static Operator zero(BasisPtr basis) {
    const auto d = basis->dim();
    return Operator(std::move(basis), CMatrix::Zero(d, d), true);
  }

  static Operator identity(BasisPtr basis) {
    const auto d = basis->dim();
    return Operator(std::move(basis), CMatrix::Identity(d, d), true);
  }

  const ProjectedBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const CMatrix& matrix() const { return elements_; }
  bool hermitian() const { return hermitian_; }
  Eigen::Index dim() const { return elements_.rows(); }

  double hermiticity_error() const {
    return (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
  }

  /// Sets the hermitian flag after checking it.
  Operator as_hermitian() const { return Operator(basis_, elements_, true); }

 private:
  BasisPtr basis_;
  CMatrix elements_;
  bool hermitian_;
};

inline bool same_basis(const ProjectedBasis& a, const ProjectedBasis& b) { return &a == &b || a == b; }

inline void require_same_basis(const Operator& a, const Operator& b) {
  if (!same_basis(a.basis(), b.basis())) throw BasisError("operators live on different bases");
}

/// One factor of a ladder monomial.
struct Ladder {
  std::size_t mode;
  bool raise;
};

/// Product f[0]·f[1]·…·f[n-1] of ladder operators (rightmost acts first),
/// evaluated on unprojected occupation vectors and projected once at the end.
inline Operator ladder_product(const BasisPtr& basis, std::span<const Ladder> factors) {
  const auto& layout = basis->layout();
  for (const auto& f : factors)
    if (f.mode >= layout.size()) throw std::out_of_range("mode index out of range");
  const auto d = basis->dim();
  CMatrix m = CMatrix::Zero(d, d);
  Occupation occ;
  for (Eigen::Index j = 0; j < d; ++j) {
    occ = basis->state(static_cast<std::size_t>(j));
    double amp = 1.0;
    for (auto it = factors.rbegin(); it != factors.rend() && amp != 0.0; ++it) {
      int& n = occ[it->mode];
      if (it->raise) {
        if (n + 1 >= layout[it->mode].levels) amp = 0.0;
        else amp *= std::sqrt(static_cast<double>(++n));
      } else {
        if (n == 0) amp = 0.0;
        else amp *= std::sqrt(static_cast<double>(n--));
      }
    }
    if (amp == 0.0) continue;
    if (auto i = basis->find(occ)) m(static_cast<Eigen::Index>(*i), j) = amp;
  }
  return Operator(basis, std::move(m));
}

inline Operator ladder_product(const BasisPtr& basis, std::initializer_list<Ladder> factors) {
  return ladder_product(basis, std::span<const Ladder>(factors.begin(), factors.size()));
}

inline Operator ladder_raise(const BasisPtr& basis, std::size_t mode) {
  return ladder_product(basis, {Ladder{mode, true}});
}

inline Operator ladder_lower(const BasisPtr& basis, std::size_t mode) {
  return ladder_product(basis, {Ladder{mode, false}});
}

inline Operator number_op(const BasisPtr& basis, std::size_t mode) {
  if (mode >= basis->layout().size()) throw std::out_of_range("mode index out of range");
  const auto d = basis->dim();
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) m(j, j) = basis->state(static_cast<std::size_t>(j))[mode];
  return Operator(basis, std::move(m), true);
}

/// Photons + excitons + sink.
inline Operator quanta_number_op(const BasisPtr& basis) {
  const auto d = basis->dim();
  CMatrix m = CMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) m(j, j) = basis->quanta(static_cast<std::size_t>(j));
  return Operator(basis, std::move(m), true);
}

inline Operator op_add(const Operator& a, const Operator& b) {
  require_same_basis(a, b);
  return Operator(a.basis_ptr(), a.matrix() + b.matrix(), a.hermitian() && b.hermitian());
}

inline Operator op_scale(const Operator& a, cplx s) {
  return Operator(a.basis_ptr(), a.matrix() * s, a.hermitian() && s.imag() == 0.0);
}

inline Operator op_mul(const Operator& a, const Operator& b) {
  require_same_basis(a, b);
  return Operator(a.basis_ptr(), a.matrix() * b.matrix());
}

inline Operator op_adjoint(const Operator& a) {
  return Operator(a.basis_ptr(), a.matrix().adjoint(), a.hermitian());
}

inline Operator operator+(const Operator& a, const Operator& b) { return op_add(a, b); }
inline Operator operator*(const Operator& a, const Operator& b) { return op_mul(a, b); }
inline Operator operator*(cplx s, const Operator& a) { return op_scale(a, s); }

}  // namespace jch
