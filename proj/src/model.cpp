#include "nvzeno/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nvzeno/error.hpp"

namespace nvzeno {

HilbertSpace build_space(std::size_t n_nuclei) {
  if (n_nuclei == 0 || n_nuclei > kMaxNuclei) {
    throw Error(ErrorCode::TooManyNuclei,
                "n_nuclei must be in [1, " + std::to_string(kMaxNuclei) + "], got " +
                    std::to_string(n_nuclei));
  }
  return HilbertSpace(n_nuclei);
}

std::size_t HilbertSpace::index(std::span<const Nuclear> nuclei, NvLevel nv) const {
  if (nuclei.size() != n_nuclei_) {
    throw Error(ErrorCode::BadLabel, "expected " + std::to_string(n_nuclei_) +
                                         " nuclear labels, got " + std::to_string(nuclei.size()));
  }
  std::size_t nuclear = 0;
  for (const auto n : nuclei) {
    if (static_cast<unsigned>(n) > 1) throw Error(ErrorCode::BadLabel, "nuclear label");
    nuclear = (nuclear << 1) | static_cast<std::size_t>(n);
  }
  if (static_cast<unsigned>(nv) >= kNvLevels) throw Error(ErrorCode::BadLabel, "NV label");
  return nuclear * kNvLevels + static_cast<std::size_t>(nv);
}

std::vector<Nuclear> HilbertSpace::nuclear_labels(std::size_t index) const {
  if (index >= dim()) throw Error(ErrorCode::BadLabel, "basis index out of range");
  const std::size_t nuclear = index / kNvLevels;
  std::vector<Nuclear> labels(n_nuclei_);
  for (std::size_t i = 0; i < n_nuclei_; ++i) {
    labels[i] = static_cast<Nuclear>((nuclear >> (n_nuclei_ - 1 - i)) & 1U);
  }
  return labels;
}

NvLevel HilbertSpace::nv_label(std::size_t index) const {
  if (index >= dim()) throw Error(ErrorCode::BadLabel, "basis index out of range");
  return static_cast<NvLevel>(index % kNvLevels);
}

ComplexVector basis_state(const HilbertSpace& space, std::span<const Nuclear> nuclei, NvLevel nv) {
  ComplexVector v(space.dim());
  v[space.index(nuclei, nv)] = 1.0;
  return v;
}

ComplexVector basis_state(const HilbertSpace& space, std::initializer_list<Nuclear> nuclei,
                          NvLevel nv) {
  return basis_state(space, std::span<const Nuclear>(nuclei.begin(), nuclei.size()), nv);
}

ComplexMatrix nv_operator(const HilbertSpace& space, const ComplexMatrix& local) {
  if (local.rows() != kNvLevels || local.cols() != kNvLevels) {
    throw Error(ErrorCode::DimensionMismatch, "NV operator must be 3x3");
  }
  return kron(ComplexMatrix::identity(space.nuclear_dim()), local);
}

ComplexMatrix nuclear_operator(const HilbertSpace& space, std::size_t which,
                               const ComplexMatrix& local) {
  if (local.rows() != 2 || local.cols() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "nuclear operator must be 2x2");
  }
  if (which >= space.n_nuclei()) throw Error(ErrorCode::BadLabel, "nucleus index out of range");
  const std::size_t before = std::size_t{1} << which;
  const std::size_t after = std::size_t{1} << (space.n_nuclei() - 1 - which);
  return kron(kron(ComplexMatrix::identity(before), local),
              ComplexMatrix::identity(after * kNvLevels));
}

ComplexMatrix nv_transition(NvLevel to, NvLevel from) {
  ComplexMatrix m(kNvLevels, kNvLevels);
  m(static_cast<std::size_t>(to), static_cast<std::size_t>(from)) = 1.0;
  return m;
}

ComplexMatrix nuclear_transition(Nuclear to, Nuclear from) {
  ComplexMatrix m(2, 2);
  m(static_cast<std::size_t>(to), static_cast<std::size_t>(from)) = 1.0;
  return m;
}

std::string_view frame_name(Frame frame) noexcept {
  return frame == Frame::Rotating ? "rotating" : "explicit-time";
}

void SystemParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::OutOfRange, std::string(name) + " must be finite and nonnegative");
    }
  };
  if (g_list.empty()) throw Error(ErrorCode::LengthMismatch, "g_list is empty");
  for (double g : g_list) check(g, "g_list entry");
  check(omega, "omega");
  check(gamma_nv, "gamma_nv");
  check(gamma_n, "gamma_n");
  check(gamma_nv_aux, "gamma_nv_aux");
  check(gamma_nv_dephasing, "gamma_nv_dephasing");
  if (!std::isfinite(delta)) throw Error(ErrorCode::OutOfRange, "delta must be finite");
}

ComplexMatrix HamiltonianTerm::at(double t) const {
  ComplexMatrix h = static_;
  for (const auto& m : modulated_) {
    const Complex phase = std::polar(1.0, -m.frequency * t);
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < h.cols(); ++j) {
        h(i, j) += phase * m.op(i, j) + std::conj(phase * m.op(j, i));
      }
  }
  return h;
}

void HamiltonianTerm::add_modulated(ComplexMatrix op, double frequency) {
  if (static_.rows() == 0) static_ = ComplexMatrix(op.rows(), op.cols());
  if (op.rows() != static_.rows() || op.cols() != static_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "modulated term dimension");
  }
  modulated_.push_back({std::move(op), frequency});
}

HamiltonianTerm& HamiltonianTerm::operator+=(const ComplexMatrix& m) {
  if (static_.rows() == 0) {
    static_ = m;
  } else {
    static_ += m;
  }
  return *this;
}

HamiltonianTerm& HamiltonianTerm::operator+=(const HamiltonianTerm& other) {
  *this += other.static_;
  for (const auto& m : other.modulated_) add_modulated(m.op, m.frequency);
  return *this;
}

HamiltonianTerm operator+(HamiltonianTerm a, const ComplexMatrix& b) { return a += b; }
HamiltonianTerm operator+(HamiltonianTerm a, const HamiltonianTerm& b) { return a += b; }

HamiltonianTerm build_h_drive(const HilbertSpace& space, double omega, double delta, Frame frame) {
  if (!(omega >= 0.0)) throw Error(ErrorCode::NegativeRabi, "omega must be nonnegative");
  const ComplexMatrix raise = nv_operator(space, nv_transition(NvLevel::Aux, NvLevel::Up));
  if (frame == Frame::Rotating) {
    ComplexMatrix h = omega * (raise + raise.adjoint());
    h += delta * nv_operator(space, nv_transition(NvLevel::Aux, NvLevel::Aux));
    return HamiltonianTerm(std::move(h));
  }
  HamiltonianTerm term(ComplexMatrix(space.dim(), space.dim()));
  term.add_modulated(omega * raise, delta);
  return term;
}

ComplexMatrix build_h_dd(const HilbertSpace& space, std::span<const double> g_list) {
  if (g_list.size() != space.n_nuclei()) {
    throw Error(ErrorCode::LengthMismatch, "g_list has " + std::to_string(g_list.size()) +
                                               " entries for " +
                                               std::to_string(space.n_nuclei()) + " nuclei");
  }
  const ComplexMatrix nv_lower = nv_operator(space, nv_transition(NvLevel::Down, NvLevel::Up));
  ComplexMatrix h(space.dim(), space.dim());
  for (std::size_t i = 0; i < g_list.size(); ++i) {
    const ComplexMatrix raise_i =
        nuclear_operator(space, i, nuclear_transition(Nuclear::Up, Nuclear::Down));
    const ComplexMatrix flip = nv_lower * raise_i;
    h += g_list[i] * (flip + flip.adjoint());
  }
  return h;
}

HamiltonianTerm system_hamiltonian(const HilbertSpace& space, const SystemParams& params) {
  return build_h_drive(space, params.omega, params.delta, params.frame) +
         build_h_dd(space, params.g_list);
}

ComplexMatrix excitation_operator(const HilbertSpace& space) {
  ComplexMatrix n = nv_operator(space, nv_transition(NvLevel::Up, NvLevel::Up) +
                                           nv_transition(NvLevel::Aux, NvLevel::Aux));
  for (std::size_t i = 0; i < space.n_nuclei(); ++i) {
    n += nuclear_operator(space, i, nuclear_transition(Nuclear::Up, Nuclear::Up));
  }
  return n;
}

std::vector<CollapseChannel> collapse_channels(const HilbertSpace& space, double gamma_nv,
                                               double gamma_n) {
  SystemParams p;
  p.g_list.assign(space.n_nuclei(), 1.0);
  p.gamma_nv = gamma_nv;
  p.gamma_n = gamma_n;
  return collapse_channels(space, p);
}

std::vector<CollapseChannel> collapse_channels(const HilbertSpace& space,
                                               const SystemParams& params) {
  for (double r : {params.gamma_nv, params.gamma_n, params.gamma_nv_aux, params.gamma_nv_dephasing})
    if (!(r >= 0.0) || !std::isfinite(r))
      throw Error(ErrorCode::OutOfRange, "decay rates must be finite and nonnegative");

  std::vector<CollapseChannel> out;
  if (params.gamma_nv > 0.0) {
    out.push_back({nv_operator(space, nv_transition(NvLevel::Down, NvLevel::Up)), params.gamma_nv,
                   "nv_up_to_down"});
  }
  if (params.gamma_n > 0.0) {
    for (std::size_t i = 0; i < space.n_nuclei(); ++i) {
      out.push_back({nuclear_operator(space, i, nuclear_transition(Nuclear::Down, Nuclear::Up)),
                     params.gamma_n, "nuclear_" + std::to_string(i + 1) + "_up_to_down"});
    }
  }
  if (params.gamma_nv_aux > 0.0) {
    out.push_back({nv_operator(space, nv_transition(NvLevel::Down, NvLevel::Aux)),
                   params.gamma_nv_aux, "nv_aux_to_down"});
  }
  if (params.gamma_nv_dephasing > 0.0) {
    out.push_back({nv_operator(space, nv_transition(NvLevel::Up, NvLevel::Up) -
                                          nv_transition(NvLevel::Down, NvLevel::Down)),
                   params.gamma_nv_dephasing, "nv_dephasing"});
  }
  return out;
}

double dipolar_coupling_constant(double r, const PhysicalConstants& c) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveSeparation, "separation must be positive");
  const double angular = c.mu0 * c.gamma_e * c.gamma_N * c.hbar / (4.0 * std::numbers::pi * r * r * r);
  return angular / (2.0 * std::numbers::pi);
}

double separation_for_coupling(double coupling_hz, const PhysicalConstants& c) {
  if (!(coupling_hz > 0.0)) throw Error(ErrorCode::OutOfRange, "coupling must be positive");
  const double angular = 2.0 * std::numbers::pi * coupling_hz;
  return std::cbrt(c.mu0 * c.gamma_e * c.gamma_N * c.hbar / (4.0 * std::numbers::pi * angular));
}

double dipolar_angular_factor(double theta) {
  const double c = std::cos(theta);
  return 1.0 - 3.0 * c * c;
}

double magic_angle() { return std::acos(1.0 / std::sqrt(3.0)); }

ComplexMatrix spin1_x() {
  const double s = 1.0 / std::numbers::sqrt2;
  return {{0, s, 0}, {s, 0, s}, {0, s, 0}};
}

ComplexMatrix spin1_y() {
  const Complex s(0.0, 1.0 / std::numbers::sqrt2);
  // Basis (-1, 0, +1): S_y = (S+ - S-)/(2i); S+ raises -1 -> 0 -> +1.
  return {{0, s, 0}, {-s, 0, s}, {0, -s, 0}};
}

ComplexMatrix spin1_z() { return {{-1, 0, 0}, {0, 0, 0}, {0, 0, 1}}; }

ComplexMatrix build_stress_hamiltonian(double eps_par, double eps_perp, double sigma_par,
                                       double sigma_x, double sigma_y) {
  const ComplexMatrix sx = spin1_x();
  const ComplexMatrix sy = spin1_y();
  const ComplexMatrix sz = spin1_z();
  ComplexMatrix h = (eps_par * sigma_par) * (sz * sz);
  h -= (eps_perp * sigma_x) * (sx * sx - sy * sy);
  h += (eps_perp * sigma_y) * (sx * sy + sy * sx);
  return h;
}

double rabi_from_stress(double eps_perp, double sigma_perp) {
  if (eps_perp < 0.0 || sigma_perp < 0.0)
    throw Error(ErrorCode::OutOfRange, "stress coupling and stress must be nonnegative");
  return eps_perp * sigma_perp;
}

double UnitSystem::seconds(double t) const { return t / (2.0 * std::numbers::pi * g_hz); }
double UnitSystem::inverse_g(double seconds) const {
  return seconds * 2.0 * std::numbers::pi * g_hz;
}

}  // namespace nvzeno
