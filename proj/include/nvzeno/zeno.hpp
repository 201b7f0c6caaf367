#pragma once

// Zeno subspace machinery: spectral grouping of a strong coupling Hamiltonian,
// the block-diagonal Zeno generator, and the named two-nucleus subspaces.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "nvzeno/linalg.hpp"
#include "nvzeno/model.hpp"

namespace nvzeno {

struct ZenoGroup {
  double eigenvalue = 0.0;
  ComplexMatrix projector;
  std::size_t rank = 0;
};

struct ZenoDecomposition {
  std::vector<ZenoGroup> groups;  // ascending eigenvalue
  double tolerance = 0.0;

  std::size_t dim() const noexcept { return groups.empty() ? 0 : groups.front().projector.rows(); }
  // Group whose eigenvalue is within tolerance of `lambda`, or nullptr.
  const ZenoGroup* find(double lambda) const noexcept;
};

// 1e-8 * max(1, max|h_c|)
double default_cluster_tolerance(const ComplexMatrix& h_c);

// Eigenvalues within `tolerance` of their neighbour share a group. Throws
// ClusterAmbiguity when two groups are closer than 3 * tolerance.
ZenoDecomposition zeno_decompose(const ComplexMatrix& h_c, double tolerance);
ZenoDecomposition zeno_decompose(const ComplexMatrix& h_c);

// sum_n P_n h P_n
ComplexMatrix zeno_hamiltonian(const ZenoDecomposition& decomp, const ComplexMatrix& h);

// exp[-i sum_n (k lambda_n P_n + P_n h P_n) t]
ComplexMatrix zeno_limit_propagator(const ZenoDecomposition& decomp, const ComplexMatrix& h,
                                    double k, double t);

// B^dagger h B for an orthonormal list of basis vectors.
ComplexMatrix restrict_to(const ComplexMatrix& h, std::span<const ComplexVector> basis);
// sum_k |b_k><b_k|
ComplexMatrix projector_onto(std::span<const ComplexVector> basis);

// Dark-subspace generator on the ordered basis (phi1, psi1, phi5).
ComplexMatrix effective_hamiltonian_s1(double omega);

// Closed-form dark-subspace amplitudes (c_phi1, c_psi1, c_phi5) starting in phi1.
std::array<Complex, 3> analytic_dark_evolution(double t, double omega);

// [(g^2 + Omega^2 cos(sqrt(g^2 + Omega^2) t)) / (g^2 + Omega^2)]^2
double survival_probability(double g, double omega, double t);

// Named states of the two-nucleus system (each a unit vector of dimension 12).
struct SubspaceCatalog {
  // phi[1..9]; phi[0] is unused and empty.
  std::array<ComplexVector, 10> phi;
  ComplexVector psi1, s1_plus, s1_minus;
  ComplexVector psi2, s2_plus, s2_minus;
  ComplexVector psi_i, qst_plus1, qst_minus1, qst_plus2, qst_minus2;

  std::vector<ComplexVector> s1_basis() const;  // phi1..phi5
  std::vector<ComplexVector> s2_basis() const;  // phi6..phi9
  std::vector<ComplexVector> s1_dark() const;   // phi1, psi1, phi5
  std::vector<ComplexVector> s2_dark() const;   // phi6, psi2
};

// Requires n_nuclei == 2 (WrongSpace otherwise).
SubspaceCatalog subspace_catalog(const HilbertSpace& space);

}  // namespace nvzeno
