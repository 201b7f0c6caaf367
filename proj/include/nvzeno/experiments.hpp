#pragma once

// Protocol drivers (entangling gate, state transfer) and the named parameter
// sweeps that regenerate every figure's data.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvzeno/dynamics.hpp"
#include "nvzeno/model.hpp"

namespace nvzeno {

// Two-nucleus computational inputs in the order uu, ud, du, dd (nucleus 1 first).
inline constexpr std::size_t kGateInputs = 4;
std::string_view gate_input_name(std::size_t input);

// pi / Omega; OutOfRange when omega <= 0.
double gate_duration(const SystemParams& params);

// Closed static problems use the exact propagator, everything else the
// Lindblad integrator. psi0 and times as for evolve_unitary.
Trajectory simulate(const SystemParams& params, const PureState& psi0,
                    std::span<const double> times, const LindbladOptions& options = {});

struct GateOptions {
  bool superposition = true;  // also run (uu + ud + du + dd)/2
  LindbladOptions lindblad;
};

struct GateResult {
  std::array<double, kGateInputs> fidelities{};
  // arg <ideal|actual>; NaN when the final state is mixed.
  std::array<double, kGateInputs> phases{};
  double fidelity_superposition = 0.0;  // NaN when not requested
  double fidelity_avg = 0.0;
  double duration = 0.0;
  bool used_lindblad = false;
  IntegratorDiagnostics diagnostics;
};

// Runs every basis input for T = pi/Omega from the NV Aux level and compares
// against uu -> -uu, ud -> du, du -> ud, dd -> dd (NV back in Aux).
GateResult run_gate(const SystemParams& params, const GateOptions& options = {});

struct TruthRow {
  std::size_t input = 0;
  std::size_t output = 0;    // dominant nuclear configuration with NV in Aux
  double population = 0.0;
  double phase = 0.0;        // arg <output, Aux|psi(T)>, NaN for mixed states
  double nv_purity = 0.0;    // Tr(rho_NV^2)
};

std::vector<TruthRow> gate_truth_table(const SystemParams& params,
                                       const LindbladOptions& options = {});

// Average basis-input gate fidelity; requires delta / omega <= 0.5.
double gate_detuning_fidelity(const SystemParams& params, const LindbladOptions& options = {});

enum class QstDirection { OneToTwo, TwoToOne };

struct QstOptions {
  QstDirection direction = QstDirection::OneToTwo;
  // Fixed relative offsets applied to the simulated g, Omega and duration.
  double dg_over_g = 0.0;
  double domega_over_omega = 0.0;
  double dt_over_t = 0.0;
  std::size_t time_points = 201;
  LindbladOptions lindblad;
};

struct QstResult {
  Complex alpha, beta;
  double fidelity = 0.0;
  double z0_survival_min = 0.0;  // min_t Tr(P0 rho(t)), P0 the dark space of H_DD
  double duration = 0.0;         // actual (offset) duration
  Trajectory trajectory;
};

// Moves alpha|d> + beta|u> from the source nucleus to the other one (which
// starts in |d>) and scores rho(T') against the nominal target with NV in Aux.
// NotNormalized unless |alpha|^2 + |beta|^2 = 1 to 1e-9.
QstResult run_qst(Complex alpha, Complex beta, const SystemParams& params,
                  const QstOptions& options = {});

// D(K) = max_t || P0 U_full(t) phi1 - U_Z(t) phi1 || over t in [0, pi/Omega]
// with Omega = 1 and g = K. K >= 1.
std::vector<double> zeno_convergence_report(std::span<const double> k_values,
                                            std::size_t time_points = 201);

// Sweeps ---------------------------------------------------------------------

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  std::string experiment;
  std::vector<SweepAxis> axes;  // overrides; missing axes take their defaults
  SystemParams params;
  Complex alpha{1.0 / 1.4142135623730951, 0.0};
  Complex beta{1.0 / 1.4142135623730951, 0.0};
  QstDirection direction = QstDirection::OneToTwo;
  LindbladOptions lindblad;
  std::size_t threads = 1;
};

struct SweepResult {
  std::string experiment;
  std::vector<SweepAxis> axes;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  IntegratorDiagnostics diagnostics;  // worst case over all integrated points
};

struct ExperimentInfo {
  std::string name;
  std::string figure;
  std::string description;
  std::vector<SweepAxis> default_axes;
  std::vector<std::string> columns;
};

const std::vector<ExperimentInfo>& list_experiments();
// UnknownExperiment when absent.
const ExperimentInfo& experiment_info(std::string_view name);

// Runs a named experiment. Rows follow the grid in axis order (first axis
// slowest) regardless of the thread count.
SweepResult sweep(const SweepSpec& spec);

}  // namespace nvzeno
