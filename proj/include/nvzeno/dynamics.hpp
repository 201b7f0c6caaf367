#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nvzeno/linalg.hpp"
#include "nvzeno/model.hpp"

namespace nvzeno {

class PureState {
 public:
  // Throws NotNormalized when | ||v|| - 1 | > 1e-9.
  explicit PureState(ComplexVector amplitudes);

  std::size_t dim() const noexcept { return amps_.size(); }
  const ComplexVector& amplitudes() const noexcept { return amps_; }
  Complex operator[](std::size_t i) const noexcept { return amps_[i]; }

 private:
  ComplexVector amps_;
};

class DensityMatrix {
 public:
  // Validates Hermiticity (1e-9), unit trace (1e-9) and min eigenvalue >= -1e-7.
  explicit DensityMatrix(ComplexMatrix rho);
  static DensityMatrix from_pure(const PureState& psi);

  std::size_t dim() const noexcept { return rho_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return rho_; }

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix rho, Unchecked) : rho_(std::move(rho)) {}
  friend struct LindbladStepper;
  ComplexMatrix rho_;
};

// Worst values seen at the output points of a trajectory.
struct IntegratorDiagnostics {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  double max_norm_error = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::variant<std::vector<PureState>, std::vector<DensityMatrix>> states;
  std::map<std::string, std::vector<double>> observables;
  IntegratorDiagnostics diagnostics;

  std::size_t size() const noexcept { return times.size(); }
  bool is_pure() const noexcept { return states.index() == 0; }
  const std::vector<PureState>& pure_states() const { return std::get<0>(states); }
  const std::vector<DensityMatrix>& mixed_states() const { return std::get<1>(states); }
  // Density matrix at output point k (built from the ket for pure runs).
  ComplexMatrix rho_at(std::size_t k) const;
};

// Uniform grid of `points` values on [from, to] (points >= 1).
std::vector<double> linspace(double from, double to, std::size_t points);

// psi(t) = exp(-i h t) psi0 on every requested time.
Trajectory evolve_unitary(const ComplexMatrix& h, const PureState& psi0,
                          std::span<const double> times);

struct LindbladOptions {
  // 0 selects 0.005 / max(||H||, 1).
  double dt = 0.0;
  bool check_positivity = true;
};

// Largest step accepted for the generator: 0.02 / max(||H||, sum of rates).
double max_lindblad_step(const HamiltonianTerm& h, std::span<const CollapseChannel> channels);
double default_lindblad_step(const HamiltonianTerm& h);

// Fixed-step classical RK4 on
//   d rho/dt = -i[H(t), rho] + sum_k g_k (L rho L^dag - {L^dag L, rho}/2).
// Output times must be ascending; each interval is split into equal steps no
// longer than dt.
Trajectory evolve_lindblad(const HamiltonianTerm& h, std::span<const CollapseChannel> channels,
                           const DensityMatrix& rho0, std::span<const double> times,
                           const LindbladOptions& options = {});

// <target| rho |target>
double fidelity(const PureState& target, const DensityMatrix& rho);
double fidelity(const PureState& target, const ComplexMatrix& rho);

// Tr(P rho), |<e|psi>|^2 and friends.
double population(const DensityMatrix& rho, const ComplexMatrix& projector);
double population(const ComplexMatrix& rho, const ComplexMatrix& projector);
double population(const DensityMatrix& rho, std::span<const Complex> state);
double population(const PureState& psi, std::span<const Complex> state);
double population(const PureState& psi, const ComplexMatrix& projector);

// Appends Tr(P rho(t)) for every output point under `name`.
void record_population(Trajectory& traj, const std::string& name, const ComplexMatrix& projector);

// Partial traces for the nucleus/NV split of `space`.
ComplexMatrix reduced_nv_state(const HilbertSpace& space, const ComplexMatrix& rho);
ComplexMatrix reduced_nuclear_state(const HilbertSpace& space, const ComplexMatrix& rho);

}  // namespace nvzeno
