#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include "nvzeno/error.hpp"
#include "nvzeno/experiments.hpp"
#include "nvzeno/zeno.hpp"
#include "oracles.hpp"

using namespace nvzeno;
using nvzeno::testing::taylor_propagator;

namespace {

constexpr double kPi = std::numbers::pi;

// Index written out by hand: nucleus 1 slowest, NV level fastest.
std::size_t idx(int n1, int n2, int nv) { return static_cast<std::size_t>((n1 * 2 + n2) * 3 + nv); }

// Rotating-frame Hamiltonian built entry by entry, independent of the model code.
// NV: 0 = Down, 1 = Up, 2 = Aux. Nuclear: 0 = down, 1 = up.
ComplexMatrix hand_hamiltonian(double omega, double delta, double g1, double g2) {
  ComplexMatrix h(12, 12);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      h(idx(a, b, 2), idx(a, b, 1)) = omega;
      h(idx(a, b, 1), idx(a, b, 2)) = omega;
      h(idx(a, b, 2), idx(a, b, 2)) = delta;
    }
  // NV Up -> Down while nucleus i flips down -> up.
  for (int other = 0; other < 2; ++other) {
    h(idx(1, other, 0), idx(0, other, 1)) = g1;
    h(idx(0, other, 1), idx(1, other, 0)) = g1;
    h(idx(other, 1, 0), idx(other, 0, 1)) = g2;
    h(idx(other, 0, 1), idx(other, 1, 0)) = g2;
  }
  return h;
}

ComplexVector unit(std::size_t i) {
  ComplexVector v(12);
  v[i] = 1.0;
  return v;
}

ComplexVector act(const ComplexMatrix& u, const ComplexVector& v) {
  ComplexVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += u(i, j) * v[j];
  return out;
}

Complex overlap(const ComplexVector& a, const ComplexVector& b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// Gate inputs uu, ud, du, dd and their ideal images.
const std::array<std::size_t, 4> kIn{idx(1, 1, 2), idx(1, 0, 2), idx(0, 1, 2), idx(0, 0, 2)};
const std::array<std::size_t, 4> kOut{idx(1, 1, 2), idx(0, 1, 2), idx(1, 0, 2), idx(0, 0, 2)};
const std::array<double, 4> kSign{-1.0, 1.0, 1.0, 1.0};

SystemParams params_at(double omega, double delta = 0.0) {
  SystemParams p;
  p.omega = omega;
  p.delta = delta;
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nvzeno::Error thrown";
  return ErrorCode::Io;
}

std::size_t column(const SweepResult& r, const std::string& name) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), name);
  EXPECT_NE(it, r.columns.end()) << name;
  return static_cast<std::size_t>(it - r.columns.begin());
}

}  // namespace

TEST(Gate, InputNamesAndDuration) {
  EXPECT_EQ(gate_input_name(0), "uu");
  EXPECT_EQ(gate_input_name(3), "dd");
  EXPECT_EQ(code_of([] { gate_input_name(4); }), ErrorCode::BadLabel);
  EXPECT_NEAR(gate_duration(params_at(0.105)), kPi / 0.105, 1e-12);
  EXPECT_EQ(code_of([] { gate_duration(params_at(0.0)); }), ErrorCode::OutOfRange);
}

TEST(Gate, MatchesHandBuiltOracle) {
  for (double omega : {0.05, 0.105, 0.2}) {
    for (double delta : {0.0, 0.01}) {
      const double t = kPi / omega;
      const ComplexMatrix u = taylor_propagator(hand_hamiltonian(omega, delta, 1.0, 1.0), t);
      const GateResult r = run_gate(params_at(omega, delta));
      EXPECT_FALSE(r.used_lindblad);
      double avg = 0.0;
      ComplexVector in(12), target(12);
      for (std::size_t k = 0; k < 4; ++k) {
        const Complex amp = kSign[k] * act(u, unit(kIn[k]))[kOut[k]];
        EXPECT_NEAR(r.fidelities[k], std::norm(amp), 1e-9) << omega << " " << k;
        EXPECT_NEAR(std::remainder(r.phases[k] - std::arg(amp), 2 * kPi), 0.0, 1e-7);
        avg += std::norm(amp) / 4.0;
        in[kIn[k]] += 0.5;
        target[kOut[k]] += 0.5 * kSign[k];
      }
      EXPECT_NEAR(r.fidelity_avg, avg, 1e-9);
      EXPECT_NEAR(r.fidelity_superposition, std::norm(overlap(target, act(u, in))), 1e-9);
      EXPECT_NEAR(r.duration, t, 1e-12);
    }
  }
}

TEST(Gate, UpUpIsExactAndDownDownFollowsClosedForm) {
  for (double omega : {0.03, 0.1, 0.105, 0.25}) {
    const GateResult r = run_gate(params_at(omega));
    EXPECT_NEAR(r.fidelities[0], 1.0, 1e-10);
    EXPECT_NEAR(std::abs(r.phases[0]), 0.0, 1e-6);  // phase relative to the -uu target
    EXPECT_NEAR(r.fidelities[3], survival_probability(std::numbers::sqrt2, omega, kPi / omega), 1e-10);
  }
}

TEST(Gate, SmallRatioApproachesIdeal) {
  const GateResult r = run_gate(params_at(0.01));
  for (double f : r.fidelities) EXPECT_GT(f, 0.999);
  EXPECT_GT(r.fidelity_superposition, 0.999);
}

TEST(Gate, FidelitiesBounded) {
  for (double omega : {0.02, 0.13, 0.25}) {
    const GateResult r = run_gate(params_at(omega, 0.02));
    for (double f : r.fidelities) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0 + 1e-12);
    }
  }
}

TEST(Gate, ExplicitFrameUsesIntegratorAndAgrees) {
  // Basis populations do not depend on the frame; amplitudes differ by a phase.
  SystemParams p = params_at(0.105, 0.01);
  p.frame = Frame::ExplicitTime;
  GateOptions o;
  o.superposition = false;
  const GateResult a = run_gate(p, o);
  const GateResult b = run_gate(params_at(0.105, 0.01), o);
  EXPECT_TRUE(a.used_lindblad);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(a.fidelities[k], b.fidelities[k], 1e-6);
  EXPECT_TRUE(std::isnan(a.phases[0]));
  EXPECT_TRUE(std::isnan(a.fidelity_superposition));
}

TEST(Gate, DecayLowersFidelityMonotonically) {
  double prev = 1.0;
  for (double gamma : {0.0, 0.001, 0.002}) {
    SystemParams p = params_at(0.105);
    p.gamma_nv = gamma;
    p.gamma_n = gamma;
    GateOptions o;
    o.superposition = false;
    const GateResult r = run_gate(p, o);
    EXPECT_LT(r.fidelity_avg, prev + 1e-12);
    prev = r.fidelity_avg;
    if (gamma > 0.0) {
      EXPECT_LT(r.diagnostics.max_trace_error, 1e-7);
      EXPECT_GE(r.diagnostics.min_eigenvalue, -1e-7);
    }
  }
}

TEST(TruthTable, SwapWithPhaseOnUpUp) {
  const auto rows = gate_truth_table(params_at(0.105));
  ASSERT_EQ(rows.size(), 4u);
  const std::array<std::size_t, 4> out{0, 2, 1, 3};
  const std::array<double, 4> phase{kPi, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(rows[k].input, k);
    EXPECT_EQ(rows[k].output, out[k]);
    EXPECT_GT(rows[k].population, 0.97);
    EXPECT_NEAR(std::abs(std::remainder(rows[k].phase - phase[k], 2 * kPi)), 0.0, 0.05) << k;
  }
}

TEST(TruthTable, IdealParams) {
  const auto rows = gate_truth_table(params_at(0.005));
  const std::array<std::size_t, 4> out{0, 2, 1, 3};
  const std::array<double, 4> phase{kPi, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(rows[k].output, out[k]);
    EXPECT_GE(rows[k].population, 0.999);
    EXPECT_LT(std::abs(std::remainder(rows[k].phase - phase[k], 2 * kPi)), 0.05) << k;
  }
  for (double f : run_gate(params_at(0.005)).fidelities) EXPECT_GE(f, 0.999);
}

TEST(TruthTable, NvDisentangledAtSmallRatio) {
  for (double omega : {0.01, 0.05}) {
    for (const auto& row : gate_truth_table(params_at(omega))) EXPECT_GE(row.nv_purity, 0.99);
  }
}

TEST(Detuning, ZeroMatchesGateAndLargeDegrades) {
  const double omega = 0.105;
  GateOptions o;
  o.superposition = false;
  EXPECT_NEAR(gate_detuning_fidelity(params_at(omega)), run_gate(params_at(omega), o).fidelity_avg,
              1e-14);
  const double f0 = gate_detuning_fidelity(params_at(omega));
  const double f5 = gate_detuning_fidelity(params_at(omega, 0.5 * omega));
  EXPECT_LT(f5, f0 - 0.005);
  // Populations are symmetric in the sign of the detuning.
  EXPECT_NEAR(gate_detuning_fidelity(params_at(omega, -0.2 * omega)),
              gate_detuning_fidelity(params_at(omega, 0.2 * omega)), 1e-10);
  EXPECT_EQ(code_of([&] { gate_detuning_fidelity(params_at(omega, 0.6 * omega)); }),
            ErrorCode::OutOfRange);
}

TEST(Qst, MatchesHandBuiltOracle) {
  const double omega = 0.105;
  const Complex alpha(0.6, 0.0), beta(0.0, 0.8);
  const QstResult r = run_qst(alpha, beta, params_at(omega));
  const ComplexMatrix u = taylor_propagator(hand_hamiltonian(omega, 0.0, 1.0, 1.0), kPi / omega);
  ComplexVector in(12), target(12);
  in[idx(0, 0, 2)] = alpha;
  in[idx(1, 0, 2)] = beta;
  target[idx(0, 0, 2)] = alpha;
  target[idx(0, 1, 2)] = beta;
  EXPECT_NEAR(r.fidelity, std::norm(overlap(target, act(u, in))), 1e-9);
  EXPECT_EQ(r.trajectory.size(), 201u);
  EXPECT_NEAR(r.trajectory.observables.at("fidelity").back(), r.fidelity, 0.0);
}

TEST(Qst, OffsetsMatchOracle) {
  const double omega = 0.105;
  QstOptions o;
  o.dg_over_g = 0.07;
  o.domega_over_omega = -0.05;
  o.dt_over_t = 0.03;
  o.time_points = 3;
  const Complex a(std::sqrt(0.5), 0.0);
  const QstResult r = run_qst(a, a, params_at(omega), o);
  const double t = kPi / omega * 1.03;
  const ComplexMatrix u = taylor_propagator(hand_hamiltonian(omega * 0.95, 0.0, 1.07, 1.07), t);
  ComplexVector in(12), target(12);
  in[idx(0, 0, 2)] = a;
  in[idx(1, 0, 2)] = a;
  target[idx(0, 0, 2)] = a;
  target[idx(0, 1, 2)] = a;
  EXPECT_NEAR(r.duration, t, 1e-12);
  EXPECT_NEAR(r.fidelity, std::norm(overlap(target, act(u, in))), 1e-9);
}

TEST(Qst, EndpointsAndDirections) {
  const SystemParams p = params_at(0.105);
  // alpha = 1 leaves |dd> frozen, so its fidelity is the sqrt2 g survival.
  const QstResult frozen = run_qst(1.0, 0.0, p);
  EXPECT_NEAR(frozen.fidelity, survival_probability(std::numbers::sqrt2, 0.105, kPi / 0.105), 1e-10);
  EXPECT_GE(run_qst(1.0, 0.0, params_at(0.005)).fidelity, 0.999);
  const Complex a(std::sqrt(0.5), 0.0);
  QstOptions back;
  back.direction = QstDirection::TwoToOne;
  const QstResult fwd = run_qst(a, a, p);
  const QstResult rev = run_qst(a, a, p, back);
  EXPECT_NEAR(fwd.fidelity, rev.fidelity, 1e-9);
  EXPECT_NEAR(fwd.z0_survival_min, rev.z0_survival_min, 1e-9);
}

TEST(Qst, SmallRatioIsNearPerfect) {
  const Complex a(std::sqrt(0.5), 0.0);
  const QstResult r = run_qst(a, a, params_at(0.005));
  EXPECT_GE(r.fidelity, 0.995);
  EXPECT_GE(r.z0_survival_min, 0.995);
}

TEST(Qst, StaysInDarkSpace) {
  // The Zeno dark space of H_DD holds the transfer path; leakage is O((Omega/g)^2).
  const QstResult r = run_qst(0.0, 1.0, params_at(0.05));
  for (double z : r.trajectory.observables.at("z0_population")) EXPECT_GE(z, 0.99);
  // The transfer passes through psi1 at mid-protocol: c_psi1 peaks near T/2.
  const auto& fid = r.trajectory.observables.at("fidelity");
  EXPECT_LT(fid.front(), 1e-12);
  EXPECT_GT(fid.back(), 0.99);
}

TEST(Qst, Validation) {
  EXPECT_EQ(code_of([] { run_qst(1.0, 1.0, params_at(0.1)); }), ErrorCode::NotNormalized);
  QstOptions o;
  o.dt_over_t = -1.0;
  EXPECT_EQ(code_of([&] { run_qst(1.0, 0.0, params_at(0.1), o); }), ErrorCode::OutOfRange);
}

TEST(Zeno, ConvergenceShrinksLikeOneOverK) {
  const std::array<double, 3> ks{10.0, 100.0, 1000.0};
  const auto d = zeno_convergence_report(ks);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_GT(d[0], d[1]);
  EXPECT_GT(d[1], d[2]);
  EXPECT_LT(d[2], 2e-3);
  // The bright pair sits at +-sqrt2 g, so second-order shifts cancel and the
  // residual falls faster than 1/K.
  EXPECT_GT(d[1] / d[2], 5.0);
  const std::array<double, 1> bad{0.5};
  EXPECT_EQ(code_of([&] { zeno_convergence_report(bad); }), ErrorCode::OutOfRange);
}

TEST(Registry, ListsEveryExperiment) {
  std::set<std::string> names;
  for (const auto& e : list_experiments()) {
    names.insert(e.name);
    EXPECT_FALSE(e.description.empty());
    EXPECT_FALSE(e.figure.empty());
  }
  for (const char* n : {"ratio_sweep", "detuning_population", "decay_trajectory", "decay_surface",
                        "systematic_omega_g", "systematic_t_g", "survival_map", "survival_map_full",
                        "qst_decoherence_n", "qst_decoherence_nv", "zeno_convergence",
                        "gate_truth_table"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  EXPECT_EQ(code_of([] { experiment_info("nope"); }), ErrorCode::UnknownExperiment);
}

TEST(Sweep, RatioSweepRowsMatchRunGate) {
  SweepSpec s;
  s.experiment = "ratio_sweep";
  s.axes = {{"omega_over_g", {0.05, 0.105, 0.2}}};
  const SweepResult r = sweep(s);
  ASSERT_EQ(r.rows.size(), 3u);
  const std::size_t f = column(r, "fidelity_avg");
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.rows[i][f], run_gate(params_at(s.axes[0].values[i])).fidelity_avg, 1e-14);
  }
}

TEST(Sweep, GridOrderAndShape) {
  SweepSpec s;
  s.experiment = "survival_map";
  s.axes = {{"t_over_T", {0.0, 0.5, 1.0}}, {"omega_over_g", {0.1, 0.2}}};
  const SweepResult r = sweep(s);
  ASSERT_EQ(r.rows.size(), 6u);
  const std::size_t ct = column(r, "t_over_T"), cr = column(r, "omega_over_g"), cp = column(r, "p0");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& row = r.rows[i * 2 + j];
      EXPECT_EQ(row[ct], s.axes[0].values[i]);
      EXPECT_EQ(row[cr], s.axes[1].values[j]);
      const double omega = row[cr];
      EXPECT_NEAR(row[cp], survival_probability(1.0, omega, row[ct] * kPi / omega), 1e-14);
    }
}

TEST(Sweep, FullSurvivalMapUsesSqrt2Coupling) {
  SweepSpec s;
  s.experiment = "survival_map_full";
  s.axes = {{"t_over_T", {0.25, 0.7}}, {"omega_over_g", {0.1, 0.25}}};
  const SweepResult r = sweep(s);
  for (const auto& row : r.rows) {
    const double omega = row[1];
    EXPECT_NEAR(row[2], survival_probability(std::numbers::sqrt2, omega, row[0] * kPi / omega), 1e-10);
  }
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  SweepSpec s;
  s.experiment = "systematic_omega_g";
  s.axes = {{"dg_over_g", {-0.1, 0.0, 0.1}}, {"domega_over_omega", {-0.05, 0.05}}};
  const SweepResult serial = sweep(s);
  s.threads = 3;
  const SweepResult parallel = sweep(s);
  EXPECT_EQ(serial.rows, parallel.rows);
  EXPECT_EQ(serial.metadata, parallel.metadata);
  for (const auto& row : serial.rows) {
    EXPECT_GE(row.back(), 0.0);
    EXPECT_LE(row.back(), 1.0);
  }
}

TEST(Sweep, DecaySurfaceCornerIsWorst) {
  SweepSpec s;
  s.experiment = "decay_surface";
  s.axes = {{"gamma_nv_over_g", {0.0, 0.002}}, {"gamma_n_over_g", {0.0, 0.002}}};
  const SweepResult r = sweep(s);
  ASSERT_EQ(r.rows.size(), 4u);
  const std::size_t f = column(r, "fidelity_avg");
  EXPECT_GT(r.rows[0][f], r.rows[3][f]);
  EXPECT_GT(r.rows[1][f], r.rows[3][f]);
  EXPECT_GT(r.rows[2][f], r.rows[3][f]);
  EXPECT_GE(r.diagnostics.min_eigenvalue, -1e-7);
}

TEST(Sweep, TruthTableAndZenoHaveNoAxes) {
  SweepSpec s;
  s.experiment = "gate_truth_table";
  EXPECT_EQ(sweep(s).rows.size(), 4u);
  s.experiment = "zeno_convergence";
  s.axes = {{"k", {20.0}}};
  EXPECT_EQ(sweep(s).rows.size(), 1u);
}

TEST(Sweep, MetadataReportsProvenance) {
  SweepSpec s;
  s.experiment = "ratio_sweep";
  s.axes = {{"omega_over_g", {0.1}}};
  const SweepResult r = sweep(s);
  std::set<std::string> keys;
  for (const auto& [k, v] : r.metadata) keys.insert(k);
  for (const char* k : {"experiment", "version", "omega_over_g", "frame", "integrator", "note"}) {
    EXPECT_TRUE(keys.count(k)) << k;
  }
}

TEST(Sweep, Errors) {
  SweepSpec s;
  s.experiment = "missing";
  EXPECT_EQ(code_of([&] { sweep(s); }), ErrorCode::UnknownExperiment);
  s.experiment = "ratio_sweep";
  s.axes = {{"gamma_nv_over_g", {0.1}}};
  EXPECT_EQ(code_of([&] { sweep(s); }), ErrorCode::UnknownKey);
}
