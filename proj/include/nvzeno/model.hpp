#pragma once

// Spin system of N nuclear spin-1/2 coupled to one NV spin-1.
//
// Basis ordering: nucleus 1 is the slowest index, the NV level the fastest,
//   index = (sum_i n_i * 2^(N-i)) * 3 + nv.
// NV levels: Down = m_s 0, Up = m_s -1, Aux = m_s +1 (the driven ancilla
// level the protocols start and end in).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvzeno/linalg.hpp"

namespace nvzeno {

enum class Nuclear : std::uint8_t { Down = 0, Up = 1 };
enum class NvLevel : std::uint8_t { Down = 0, Up = 1, Aux = 2 };

inline constexpr std::size_t kNvLevels = 3;
inline constexpr std::size_t kMaxNuclei = 6;

class HilbertSpace {
 public:
  std::size_t n_nuclei() const noexcept { return n_nuclei_; }
  std::size_t dim() const noexcept { return (std::size_t{1} << n_nuclei_) * kNvLevels; }
  std::size_t nuclear_dim() const noexcept { return std::size_t{1} << n_nuclei_; }

  std::size_t index(std::span<const Nuclear> nuclei, NvLevel nv) const;
  // Inverse of index(); nuclear labels in nucleus order.
  std::vector<Nuclear> nuclear_labels(std::size_t index) const;
  NvLevel nv_label(std::size_t index) const;

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  friend HilbertSpace build_space(std::size_t);
  explicit HilbertSpace(std::size_t n) : n_nuclei_(n) {}
  std::size_t n_nuclei_ = 2;
};

// 1 <= n_nuclei <= 6, TooManyNuclei otherwise.
HilbertSpace build_space(std::size_t n_nuclei = 2);

ComplexVector basis_state(const HilbertSpace& space, std::span<const Nuclear> nuclei, NvLevel nv);
ComplexVector basis_state(const HilbertSpace& space, std::initializer_list<Nuclear> nuclei,
                          NvLevel nv);

// Embeds a 3x3 NV operator or a 2x2 operator on nucleus `which` (0-based).
ComplexMatrix nv_operator(const HilbertSpace& space, const ComplexMatrix& local);
ComplexMatrix nuclear_operator(const HilbertSpace& space, std::size_t which,
                               const ComplexMatrix& local);

// |to><from| on the NV or on a single nucleus.
ComplexMatrix nv_transition(NvLevel to, NvLevel from);
ComplexMatrix nuclear_transition(Nuclear to, Nuclear from);

enum class Frame { Rotating, ExplicitTime };

std::string_view frame_name(Frame frame) noexcept;

// All frequencies and rates are in units of the reference coupling g.
struct SystemParams {
  std::vector<double> g_list{1.0, 1.0};
  double omega = 0.105;
  double delta = 0.0;
  double gamma_nv = 0.0;
  double gamma_n = 0.0;
  Frame frame = Frame::Rotating;
  // Optional channels, off unless set: extra NV relaxation Aux -> Down and
  // NV dephasing with jump operator |Up><Up| - |Down><Down|.
  double gamma_nv_aux = 0.0;
  double gamma_nv_dephasing = 0.0;

  std::size_t n_nuclei() const noexcept { return g_list.size(); }
  bool is_dissipative() const noexcept {
    return gamma_nv > 0.0 || gamma_n > 0.0 || gamma_nv_aux > 0.0 || gamma_nv_dephasing > 0.0;
  }
  // Throws OutOfRange for negative or non-finite entries.
  void validate() const;
};

// H(t) = H_static + sum_k (e^{-i w_k t} A_k + e^{+i w_k t} A_k^dagger).
class HamiltonianTerm {
 public:
  struct Modulated {
    ComplexMatrix op;
    double frequency = 0.0;
  };

  HamiltonianTerm() = default;
  explicit HamiltonianTerm(ComplexMatrix static_part) : static_(std::move(static_part)) {}

  std::size_t dim() const noexcept { return static_.rows(); }
  bool is_static() const noexcept { return modulated_.empty(); }
  const ComplexMatrix& static_part() const noexcept { return static_; }
  const std::vector<Modulated>& modulated() const noexcept { return modulated_; }

  ComplexMatrix at(double t) const;
  void add_modulated(ComplexMatrix op, double frequency);

  HamiltonianTerm& operator+=(const ComplexMatrix& m);
  HamiltonianTerm& operator+=(const HamiltonianTerm& other);

 private:
  ComplexMatrix static_;
  std::vector<Modulated> modulated_;
};

HamiltonianTerm operator+(HamiltonianTerm a, const ComplexMatrix& b);
HamiltonianTerm operator+(HamiltonianTerm a, const HamiltonianTerm& b);

// Rotating: Omega(|Aux><Up| + h.c.) + Delta |Aux><Aux|.
// ExplicitTime: Omega e^{-i Delta t} |Aux><Up| + h.c.
HamiltonianTerm build_h_drive(const HilbertSpace& space, double omega, double delta, Frame frame);

// sum_i g_i (|Down><Up|_NV (x) |up><down|_i + h.c.)
ComplexMatrix build_h_dd(const HilbertSpace& space, std::span<const double> g_list);

HamiltonianTerm system_hamiltonian(const HilbertSpace& space, const SystemParams& params);

// N_exc = sum_i |up><up|_i + (|Up><Up| + |Aux><Aux|)_NV, conserved by H.
ComplexMatrix excitation_operator(const HilbertSpace& space);

struct CollapseChannel {
  ComplexMatrix op;
  double rate = 0.0;
  std::string label;
};

// NV Up->Down at gamma_nv, every nucleus up->down at gamma_n, plus the optional
// channels of `params`. Zero-rate channels are omitted.
std::vector<CollapseChannel> collapse_channels(const HilbertSpace& space, double gamma_nv,
                                               double gamma_n);
std::vector<CollapseChannel> collapse_channels(const HilbertSpace& space,
                                               const SystemParams& params);

// Physical plumbing ---------------------------------------------------------

struct PhysicalConstants {
  double mu0 = 1.25663706212e-6;          // N / A^2
  double gamma_e = 1.76085963023e11;      // rad / (s T)
  double gamma_N = 6.728284e7;            // rad / (s T), 13C
  double hbar = 1.054571817e-34;          // J s
  double eps_perp = 0.03;                 // MHz / MPa
  double eps_par = 0.0;                   // MHz / MPa, no effect on the +-1 drive
};

// mu0 gamma_e gamma_N hbar / (4 pi r^3), returned as an ordinary frequency in
// Hz (the coupling is 2 pi times this value in rad/s).
double dipolar_coupling_constant(double r_meters, const PhysicalConstants& c = {});
// Separation giving the requested coupling (Hz, same convention).
double separation_for_coupling(double coupling_hz, const PhysicalConstants& c = {});

// Secular angular coefficient 1 - 3 cos^2(theta).
double dipolar_angular_factor(double theta_radians);
// Root of the angular factor, acos(1/sqrt 3).
double magic_angle();

// Spin-1 matrices in the m_s = (-1, 0, +1) basis.
ComplexMatrix spin1_x();
ComplexMatrix spin1_y();
ComplexMatrix spin1_z();

ComplexMatrix build_stress_hamiltonian(double eps_par, double eps_perp, double sigma_par,
                                       double sigma_x, double sigma_y);

// Omega = eps_perp * sigma_perp in MHz.
double rabi_from_stress(double eps_perp_mhz_per_mpa, double sigma_perp_mpa);

// Conversion between units of g and physical units, g = 2 pi * g_hz rad/s.
struct UnitSystem {
  double g_hz = 2.0e6;

  double seconds(double t_in_inverse_g) const;
  double inverse_g(double seconds) const;
  // Ordinary frequency in Hz of a quantity given in units of g.
  double hertz(double in_units_of_g) const { return in_units_of_g * g_hz; }
  double in_units_of_g(double hertz) const { return hertz / g_hz; }
};

}  // namespace nvzeno
