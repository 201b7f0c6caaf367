#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "nvzeno/dynamics.hpp"
#include "nvzeno/error.hpp"
#include "nvzeno/model.hpp"
#include "nvzeno/zeno.hpp"
#include "oracles.hpp"

using namespace nvzeno;
using nvzeno::testing::max_diff;
using N = Nuclear;
using V = NvLevel;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no nvzeno::Error thrown";
  return ErrorCode::Io;
}

const std::array<double, 2> kUnit{1.0, 1.0};

}  // namespace

TEST(Space, Dimensions) {
  EXPECT_EQ(build_space(2).dim(), 12u);
  EXPECT_EQ(build_space(1).dim(), 6u);
  EXPECT_EQ(build_space(6).dim(), 192u);
  EXPECT_EQ(code_of([] { build_space(7); }), ErrorCode::TooManyNuclei);
  EXPECT_EQ(code_of([] { build_space(0); }), ErrorCode::TooManyNuclei);
}

TEST(Space, IndexOrdering) {
  const HilbertSpace s = build_space(2);
  const std::array<N, 2> ud{N::Up, N::Down};
  EXPECT_EQ(s.index(ud, V::Aux), 8u);
  const std::array<N, 2> dd{N::Down, N::Down};
  EXPECT_EQ(s.index(dd, V::Aux), 2u);
  for (std::size_t i = 0; i < s.dim(); ++i) {
    EXPECT_EQ(s.index(s.nuclear_labels(i), s.nv_label(i)), i);
  }
}

TEST(Space, BadLabels) {
  const HilbertSpace s = build_space(2);
  const std::array<N, 1> one{N::Up};
  EXPECT_EQ(code_of([&] { s.index(one, V::Aux); }), ErrorCode::BadLabel);
  const std::array<N, 2> bad{N::Up, static_cast<N>(5)};
  EXPECT_EQ(code_of([&] { s.index(bad, V::Aux); }), ErrorCode::BadLabel);
  const std::array<N, 2> ok{N::Up, N::Up};
  EXPECT_EQ(code_of([&] { s.index(ok, static_cast<V>(3)); }), ErrorCode::BadLabel);
}

TEST(BasisState, UnitVectors) {
  const HilbertSpace s = build_space(2);
  const ComplexVector dd = basis_state(s, {N::Down, N::Down}, V::Aux);
  EXPECT_EQ(dd[2], Complex(1.0));
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const ComplexVector v = basis_state(s, s.nuclear_labels(i), s.nv_label(i));
    EXPECT_DOUBLE_EQ(norm(v), 1.0);
  }
  EXPECT_EQ(basis_state(s, {N::Up, N::Down}, V::Aux), subspace_catalog(s).phi[1]);
}

TEST(Drive, FramesAgreeAtZeroDetuning) {
  const HilbertSpace s = build_space(2);
  const HamiltonianTerm rot = build_h_drive(s, 0.3, 0.0, Frame::Rotating);
  const HamiltonianTerm lab = build_h_drive(s, 0.3, 0.0, Frame::ExplicitTime);
  for (double t : {0.0, 1.3, 17.0}) EXPECT_LT(max_diff(rot.at(t), lab.at(t)), 1e-15);
}

TEST(Drive, MatrixElementsPerSector) {
  const HilbertSpace s = build_space(2);
  const ComplexMatrix h = build_h_drive(s, 0.105, 0.0, Frame::Rotating).at(0.0);
  for (std::size_t n = 0; n < s.nuclear_dim(); ++n) {
    EXPECT_NEAR(h(3 * n + 2, 3 * n + 1).real(), 0.105, 1e-15);
    EXPECT_NEAR(h(3 * n + 1, 3 * n + 2).real(), 0.105, 1e-15);
  }
  EXPECT_TRUE(h.is_hermitian(1e-15));
  EXPECT_EQ(code_of([&] { build_h_drive(s, -0.1, 0.0, Frame::Rotating); }), ErrorCode::NegativeRabi);
}

TEST(Drive, DetuningOnAuxLevel) {
  const HilbertSpace s = build_space(1);
  const ComplexMatrix h = build_h_drive(s, 0.2, 0.05, Frame::Rotating).at(0.0);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_NEAR(h(3 * n + 2, 3 * n + 2).real(), 0.05, 1e-15);
    EXPECT_EQ(h(3 * n + 1, 3 * n + 1), Complex(0.0));
  }
}

TEST(Drive, ExplicitFrameIsHermitianAtAllTimes) {
  const HilbertSpace s = build_space(2);
  const HamiltonianTerm lab = build_h_drive(s, 0.1, 0.02, Frame::ExplicitTime);
  for (double t : linspace(0.0, 100.0, 17)) EXPECT_TRUE(lab.at(t).is_hermitian(1e-14));
  EXPECT_FALSE(lab.is_static());
}

TEST(Drive, FramesGiveSamePopulationsWithDetuning) {
  // Rotating frame (exact) against the explicit-time drive (integrated).
  const HilbertSpace s = build_space(2);
  SystemParams p;
  p.omega = 0.1;
  p.delta = 0.01;
  const double t_end = std::numbers::pi / p.omega;
  const std::vector<double> times = linspace(0.0, t_end, 5);
  for (std::size_t input : {2u, 8u, 11u}) {
    const PureState psi0(basis_state(s, s.nuclear_labels(input), s.nv_label(input)));
    const Trajectory rot = evolve_unitary(system_hamiltonian(s, p).static_part(), psi0, times);
    SystemParams q = p;
    q.frame = Frame::ExplicitTime;
    const Trajectory lab =
        evolve_lindblad(system_hamiltonian(s, q), {}, DensityMatrix::from_pure(psi0), times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const ComplexMatrix a = rot.rho_at(k), b = lab.rho_at(k);
      for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(a(i, i).real(), b(i, i).real(), 1e-6);
    }
  }
}

TEST(DipoleDipole, S1Structure) {
  const HilbertSpace s = build_space(2);
  const SubspaceCatalog c = subspace_catalog(s);
  const ComplexMatrix h = restrict_to(build_h_dd(s, kUnit), c.s1_basis());
  // Basis order phi1..phi5: only phi2<->phi3 and phi4<->phi3 couple, each g.
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const bool coupled = (i == 1 && j == 2) || (i == 2 && j == 1) || (i == 3 && j == 2) ||
                           (i == 2 && j == 3);
      EXPECT_NEAR(std::abs(h(i, j)), coupled ? 1.0 : 0.0, 1e-15) << i << "," << j;
    }
  }
}

TEST(DipoleDipole, S2Spectrum) {
  const HilbertSpace s = build_space(2);
  const SubspaceCatalog c = subspace_catalog(s);
  const HermitianEig e = eig_hermitian(restrict_to(build_h_dd(s, kUnit), c.s2_basis()));
  const double r2 = std::numbers::sqrt2;
  const std::array<double, 4> expect{-r2, 0.0, 0.0, r2};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e.eigenvalues[i], expect[i], 1e-12);
}

TEST(DipoleDipole, AnnihilatesAuxStates) {
  const HilbertSpace s = build_space(2);
  const ComplexMatrix h = build_h_dd(s, kUnit);
  for (std::size_t n = 0; n < 4; ++n) {
    const ComplexVector v = basis_state(s, s.nuclear_labels(3 * n + 2), V::Aux);
    const ComplexVector hv = h * std::span<const Complex>(v);
    EXPECT_LT(norm(hv), 1e-15);
  }
  EXPECT_TRUE(h.is_hermitian(1e-15));
}

TEST(DipoleDipole, LengthMismatch) {
  const HilbertSpace s = build_space(2);
  const std::array<double, 3> g{1, 1, 1};
  EXPECT_EQ(code_of([&] { build_h_dd(s, g); }), ErrorCode::LengthMismatch);
}

TEST(Excitation, Eigenvalues) {
  const HilbertSpace s = build_space(2);
  const SubspaceCatalog c = subspace_catalog(s);
  const ComplexMatrix n = excitation_operator(s);
  for (int k = 1; k <= 9; ++k) {
    const ComplexVector nv = n * std::span<const Complex>(c.phi[k]);
    const double expect = k <= 5 ? 2.0 : 1.0;
    for (std::size_t i = 0; i < nv.size(); ++i) EXPECT_NEAR(std::abs(nv[i] - expect * c.phi[k][i]), 0.0, 1e-15);
  }
}

TEST(Excitation, ConservedByRandomHamiltonians) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (std::size_t n_nuc : {1u, 2u, 3u}) {
    const HilbertSpace s = build_space(n_nuc);
    const ComplexMatrix nexc = excitation_operator(s);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> g(n_nuc);
      for (auto& x : g) x = u(rng);
      const ComplexMatrix hdd = build_h_dd(s, g);
      EXPECT_LT(commutator(hdd, nexc).max_abs(), 1e-12);
      for (Frame f : {Frame::Rotating, Frame::ExplicitTime}) {
        const HamiltonianTerm hd = build_h_drive(s, u(rng), u(rng), f);
        for (double t : {0.0, 2.5, 11.0}) {
          EXPECT_LT(commutator(hd.at(t), nexc).max_abs(), 1e-12);
          EXPECT_TRUE(hd.at(t).is_hermitian(1e-12));
        }
      }
    }
  }
}

TEST(Channels, DefaultSet) {
  const HilbertSpace s = build_space(2);
  EXPECT_TRUE(collapse_channels(s, 0.0, 0.0).empty());
  const auto ch = collapse_channels(s, 0.01, 0.02);
  ASSERT_EQ(ch.size(), 3u);
  EXPECT_DOUBLE_EQ(ch[0].rate, 0.01);
  EXPECT_DOUBLE_EQ(ch[1].rate, 0.02);
  for (const auto& c : ch) EXPECT_LT((c.op * c.op).max_abs(), 1e-15);
  // NV channel lowers Up -> Down in every nuclear sector.
  const ComplexMatrix& l = ch[0].op;
  for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(l(3 * n + 0, 3 * n + 1), Complex(1.0));
  EXPECT_EQ(collapse_channels(s, 0.01, 0.0).size(), 1u);
}

TEST(Channels, OptionalChannels) {
  const HilbertSpace s = build_space(2);
  SystemParams p;
  p.gamma_nv_aux = 0.1;
  p.gamma_nv_dephasing = 0.2;
  const auto ch = collapse_channels(s, p);
  ASSERT_EQ(ch.size(), 2u);
}

TEST(Params, Validation) {
  SystemParams p;
  EXPECT_NO_THROW(p.validate());
  p.gamma_n = -1e-3;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::OutOfRange);
  p.gamma_n = 0.0;
  p.omega = std::nan("");
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::OutOfRange);
}

TEST(Physical, DipolarScaling) {
  const double g1 = dipolar_coupling_constant(1e-9);
  EXPECT_NEAR(dipolar_coupling_constant(2e-9), g1 / 8.0, 1e-12 * g1);
  for (double r : linspace(1e-10, 1e-9, 7)) {
    EXPECT_NEAR(dipolar_coupling_constant(r) * r * r * r, g1 * 1e-27, 1e-12 * g1 * 1e-27);
  }
  EXPECT_EQ(code_of([] { dipolar_coupling_constant(0.0); }), ErrorCode::NonpositiveSeparation);
}

TEST(Physical, DipolarOperatingPoint) {
  // Independent evaluation: mu0/(4 pi) ~ 1e-7 (exact before 2019, 5e-10 off now),
  // hbar gamma_e gamma_N / r^3, in Hz.
  const double r = separation_for_coupling(2.0e6);
  const double oracle = 1e-7 * 1.76085963023e11 * 6.728284e7 * 1.054571817e-34 /
                        (r * r * r) / (2.0 * std::numbers::pi);
  EXPECT_NEAR(oracle, 2.0e6, 2.0e6 * 1e-9);
  EXPECT_NEAR(dipolar_coupling_constant(r), 2.0e6, 1e-6);
  // A 13C a couple of angstroms from the vacancy.
  EXPECT_GT(r, 1.5e-10);
  EXPECT_LT(r, 3.0e-10);
}

TEST(Physical, AngularFactor) {
  EXPECT_NEAR(dipolar_angular_factor(54.7356 * std::numbers::pi / 180.0), 0.0, 1e-6);
  EXPECT_NEAR(dipolar_angular_factor(0.0), -2.0, 1e-15);
  EXPECT_NEAR(dipolar_angular_factor(std::numbers::pi / 2), 1.0, 1e-15);
  EXPECT_NEAR(dipolar_angular_factor(magic_angle()), 0.0, 1e-15);
}

TEST(Physical, StressHamiltonian) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix h = build_stress_hamiltonian(u(rng), u(rng), u(rng), u(rng), u(rng));
    EXPECT_TRUE(h.is_hermitian(1e-14));
    // Basis (-1, 0, +1): m_s = 0 is index 1.
    for (std::size_t j : {0u, 2u}) {
      EXPECT_LT(std::abs(h(1, j)), 1e-14);
      EXPECT_LT(std::abs(h(j, 1)), 1e-14);
    }
  }
  const ComplexMatrix hx = build_stress_hamiltonian(0.0, 0.03, 0.0, 7.0, 0.0);
  EXPECT_NEAR(std::abs(hx(0, 2)), 0.21, 1e-12);
  const ComplexMatrix hy = build_stress_hamiltonian(0.0, 0.03, 0.0, 0.0, 7.0);
  EXPECT_NEAR(std::abs(hy(0, 2)), 0.21, 1e-12);
  const ComplexMatrix hz = build_stress_hamiltonian(0.5, 0.03, 2.0, 0.0, 0.0);
  EXPECT_NEAR(hz(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(hz(2, 2).real(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(hz(1, 1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(hz(0, 2)), 0.0, 1e-14);
}

TEST(Physical, RabiFromStress) {
  EXPECT_NEAR(rabi_from_stress(0.03, 7.0), 0.21, 1e-12);
  EXPECT_EQ(rabi_from_stress(0.5, 0.0), 0.0);
  EXPECT_NEAR(rabi_from_stress(0.03, 14.0), 2.0 * rabi_from_stress(0.03, 7.0), 1e-15);
  EXPECT_NEAR(PhysicalConstants{}.eps_perp, 0.03, 0.0);
}

TEST(Physical, Units) {
  const UnitSystem u;
  const double t = std::numbers::pi / 0.105;
  EXPECT_NEAR(u.seconds(t) * 1e6, 2.38, 0.005);
  EXPECT_NEAR(u.inverse_g(u.seconds(t)), t, 1e-12);
  EXPECT_NEAR(u.hertz(0.105), 210e3, 1e-6);
}
