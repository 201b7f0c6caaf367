#include "nvzeno/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nvzeno/error.hpp"

namespace nvzeno {

namespace {

constexpr double kNormTol = 1e-9;
constexpr double kTraceTol = 1e-9;
constexpr double kHermTol = 1e-9;
constexpr double kMinEigenvalue = -1e-7;
constexpr double kPositivityAbort = -1e-5;

void require_times(std::span<const double> times) {
  if (times.empty()) throw Error(ErrorCode::OutOfRange, "time grid is empty");
  if (!(times.front() >= 0.0)) throw Error(ErrorCode::OutOfRange, "times must be >= 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw Error(ErrorCode::OutOfRange, "times must be finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw Error(ErrorCode::OutOfRange, "times must be strictly increasing");
  }
}

double hermiticity_error(const ComplexMatrix& m) {
  double e = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      e = std::max(e, std::abs(m(i, j) - std::conj(m(j, i))));
  return e;
}

struct SparseEntry {
  std::size_t row;
  std::size_t col;
  Complex value;
};

struct SparseChannel {
  std::vector<SparseEntry> entries;
  double rate;
};

}  // namespace

// Builds density matrices produced by the integrator, whose invariants are
// tracked in the diagnostics instead of being enforced by the constructor.
struct LindbladStepper {
  static DensityMatrix wrap(ComplexMatrix rho) {
    return DensityMatrix(std::move(rho), DensityMatrix::Unchecked{});
  }
};

PureState::PureState(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
  if (std::abs(norm(amps_) - 1.0) > kNormTol) {
    throw Error(ErrorCode::NotNormalized, "state norm is " + std::to_string(norm(amps_)));
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (!rho_.is_square()) throw Error(ErrorCode::DimensionMismatch, "density matrix not square");
  if (hermiticity_error(rho_) > kHermTol) throw Error(ErrorCode::NotHermitian, "density matrix");
  if (std::abs(rho_.trace() - 1.0) > kTraceTol)
    throw Error(ErrorCode::NotNormalized, "density matrix trace is not 1");
  const auto eig = eig_hermitian(rho_);
  if (!eig.eigenvalues.empty() && eig.eigenvalues.front() < kMinEigenvalue)
    throw Error(ErrorCode::PositivityViolation, "density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()), Unchecked{});
}

ComplexMatrix Trajectory::rho_at(std::size_t k) const {
  if (is_pure()) {
    const auto& a = pure_states().at(k).amplitudes();
    return ComplexMatrix::outer(a, a);
  }
  return mixed_states().at(k).matrix();
}

std::vector<double> linspace(double from, double to, std::size_t points) {
  if (points == 0) throw Error(ErrorCode::OutOfRange, "grid needs at least one point");
  if (points == 1) return {from};
  std::vector<double> out(points);
  const double step = (to - from) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = from + step * static_cast<double>(i);
  out.back() = to;
  return out;
}

Trajectory evolve_unitary(const ComplexMatrix& h, const PureState& psi0,
                          std::span<const double> times) {
  require_times(times);
  if (h.rows() != psi0.dim()) throw Error(ErrorCode::DimensionMismatch, "state vs Hamiltonian");
  const HermitianEig eig = eig_hermitian(h);
  const std::size_t n = psi0.dim();

  // Coefficients in the eigenbasis.
  ComplexVector c(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::conj(eig.eigenvectors(i, k)) * psi0[i];
    c[k] = s;
  }

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  std::vector<PureState> states;
  states.reserve(times.size());
  double worst = 0.0;
  for (double t : times) {
    ComplexVector psi(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex ck = c[k] * std::polar(1.0, -eig.eigenvalues[k] * t);
      for (std::size_t i = 0; i < n; ++i) psi[i] += eig.eigenvectors(i, k) * ck;
    }
    worst = std::max(worst, std::abs(norm(psi) - 1.0));
    states.emplace_back(std::move(psi));
  }
  traj.states = std::move(states);
  traj.diagnostics.max_norm_error = worst;
  return traj;
}

double default_lindblad_step(const HamiltonianTerm& h) {
  return 0.005 / std::max(h.at(0.0).spectral_norm_hermitian(), 1.0);
}

double max_lindblad_step(const HamiltonianTerm& h, std::span<const CollapseChannel> channels) {
  double rates = 0.0;
  for (const auto& c : channels) rates += c.rate;
  const double scale = std::max(h.at(0.0).spectral_norm_hermitian(), rates);
  return scale > 0.0 ? 0.02 / scale : std::numeric_limits<double>::infinity();
}

Trajectory evolve_lindblad(const HamiltonianTerm& h, std::span<const CollapseChannel> channels,
                           const DensityMatrix& rho0, std::span<const double> times,
                           const LindbladOptions& options) {
  require_times(times);
  const std::size_t n = rho0.dim();
  if (h.dim() != n) throw Error(ErrorCode::DimensionMismatch, "rho0 vs Hamiltonian");
  for (const auto& c : channels) {
    if (c.op.rows() != n || c.op.cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "collapse operator dimension");
    if (!(c.rate >= 0.0)) throw Error(ErrorCode::OutOfRange, "negative decay rate");
  }

  const double limit = max_lindblad_step(h, channels);
  const double dt = options.dt > 0.0 ? options.dt : default_lindblad_step(h);
  if (dt > limit) {
    throw Error(ErrorCode::StepTooLarge,
                "dt = " + std::to_string(dt) + " exceeds " + std::to_string(limit));
  }

  // -i/2 sum_k g_k L^dag L
  ComplexMatrix damping(n, n);
  std::vector<SparseChannel> sparse;
  for (const auto& c : channels) {
    if (c.rate == 0.0) continue;
    damping += Complex(0.0, -0.5 * c.rate) * (c.op.adjoint() * c.op);
    SparseChannel s{{}, c.rate};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (c.op(i, j) != Complex{}) s.entries.push_back({i, j, c.op(i, j)});
    sparse.push_back(std::move(s));
  }

  ComplexMatrix heff = h.static_part() + damping;
  const bool is_static = h.is_static();

  // rhs = Y + Y^dag + jumps with Y = -i H_eff rho (rho Hermitian).
  ComplexMatrix y(n, n);
  auto rhs = [&](double t, const ComplexMatrix& rho, ComplexMatrix& out) {
    if (!is_static) heff = h.at(t) + damping;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Complex s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += heff(i, k) * rho(k, j);
        y(i, j) = Complex(s.imag(), -s.real());
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) = y(i, j) + std::conj(y(j, i));
    for (const auto& ch : sparse) {
      for (const auto& a : ch.entries)
        for (const auto& b : ch.entries)
          out(a.row, b.row) += ch.rate * a.value * rho(a.col, b.col) * std::conj(b.value);
    }
  };

  ComplexMatrix rho = rho0.matrix();
  ComplexMatrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);
  auto axpy = [n](ComplexMatrix& dst, const ComplexMatrix& x, double a, const ComplexMatrix& k) {
    for (std::size_t i = 0; i < n * n; ++i) dst.entries()[i] = x.entries()[i] + a * k.entries()[i];
  };

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  std::vector<DensityMatrix> states;
  states.reserve(times.size());
  IntegratorDiagnostics diag;
  diag.dt = dt;
  diag.min_eigenvalue = std::numeric_limits<double>::infinity();

  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
      const double step = span / static_cast<double>(steps);
      for (std::size_t s = 0; s < steps; ++s) {
        const double t0 = t + step * static_cast<double>(s);
        rhs(t0, rho, k1);
        axpy(tmp, rho, 0.5 * step, k1);
        rhs(t0 + 0.5 * step, tmp, k2);
        axpy(tmp, rho, 0.5 * step, k2);
        rhs(t0 + 0.5 * step, tmp, k3);
        axpy(tmp, rho, step, k3);
        rhs(t0 + step, tmp, k4);
        for (std::size_t i = 0; i < n * n; ++i) {
          rho.entries()[i] += (step / 6.0) * (k1.entries()[i] + 2.0 * k2.entries()[i] +
                                              2.0 * k3.entries()[i] + k4.entries()[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
          rho(i, i) = rho(i, i).real();
          for (std::size_t j = i + 1; j < n; ++j) {
            const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
            rho(i, j) = avg;
            rho(j, i) = std::conj(avg);
          }
        }
      }
      diag.steps += steps;
      t = target;
    }

    diag.max_trace_error = std::max(diag.max_trace_error, std::abs(rho.trace() - 1.0));
    diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, hermiticity_error(rho));
    if (options.check_positivity) {
      const double lo = eig_hermitian(rho).eigenvalues.front();
      diag.min_eigenvalue = std::min(diag.min_eigenvalue, lo);
      if (lo < kPositivityAbort) {
        throw Error(ErrorCode::PositivityViolation,
                    "min eigenvalue " + std::to_string(lo) + " at t = " + std::to_string(t));
      }
    }
    states.push_back(LindbladStepper::wrap(rho));
  }
  if (!options.check_positivity) diag.min_eigenvalue = 0.0;
  traj.states = std::move(states);
  traj.diagnostics = diag;
  return traj;
}

double fidelity(const PureState& target, const ComplexMatrix& rho) {
  if (rho.rows() != target.dim() || !rho.is_square())
    throw Error(ErrorCode::DimensionMismatch, "fidelity target vs rho");
  const ComplexVector r = rho * std::span<const Complex>(target.amplitudes());
  return inner(target.amplitudes(), r).real();
}

double fidelity(const PureState& target, const DensityMatrix& rho) {
  return fidelity(target, rho.matrix());
}

double population(const ComplexMatrix& rho, const ComplexMatrix& projector) {
  if (rho.rows() != projector.rows() || rho.cols() != projector.cols())
    throw Error(ErrorCode::DimensionMismatch, "projector vs rho");
  Complex s = 0.0;
  for (std::size_t i = 0; i < rho.rows(); ++i)
    for (std::size_t k = 0; k < rho.cols(); ++k) s += projector(i, k) * rho(k, i);
  return s.real();
}

double population(const DensityMatrix& rho, const ComplexMatrix& projector) {
  return population(rho.matrix(), projector);
}

double population(const DensityMatrix& rho, std::span<const Complex> state) {
  if (state.size() != rho.dim()) throw Error(ErrorCode::DimensionMismatch, "state vs rho");
  const ComplexVector r = rho.matrix() * state;
  return inner(state, r).real();
}

double population(const PureState& psi, std::span<const Complex> state) {
  if (state.size() != psi.dim()) throw Error(ErrorCode::DimensionMismatch, "state vs psi");
  return std::norm(inner(state, psi.amplitudes()));
}

double population(const PureState& psi, const ComplexMatrix& projector) {
  if (projector.rows() != psi.dim()) throw Error(ErrorCode::DimensionMismatch, "projector vs psi");
  const ComplexVector p = projector * std::span<const Complex>(psi.amplitudes());
  return inner(psi.amplitudes(), p).real();
}

void record_population(Trajectory& traj, const std::string& name, const ComplexMatrix& projector) {
  std::vector<double> series;
  series.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    series.push_back(traj.is_pure() ? population(traj.pure_states()[k], projector)
                                    : population(traj.mixed_states()[k], projector));
  }
  traj.observables[name] = std::move(series);
}

ComplexMatrix reduced_nv_state(const HilbertSpace& space, const ComplexMatrix& rho) {
  if (rho.rows() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "rho vs space");
  ComplexMatrix out(kNvLevels, kNvLevels);
  for (std::size_t nuc = 0; nuc < space.nuclear_dim(); ++nuc)
    for (std::size_t a = 0; a < kNvLevels; ++a)
      for (std::size_t b = 0; b < kNvLevels; ++b)
        out(a, b) += rho(nuc * kNvLevels + a, nuc * kNvLevels + b);
  return out;
}

ComplexMatrix reduced_nuclear_state(const HilbertSpace& space, const ComplexMatrix& rho) {
  if (rho.rows() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "rho vs space");
  const std::size_t m = space.nuclear_dim();
  ComplexMatrix out(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t v = 0; v < kNvLevels; ++v) out(a, b) += rho(a * kNvLevels + v, b * kNvLevels + v);
  return out;
}

}  // namespace nvzeno
