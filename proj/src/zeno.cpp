#include "nvzeno/zeno.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nvzeno/error.hpp"

namespace nvzeno {

namespace {

void require_dims(const ZenoDecomposition& decomp, const ComplexMatrix& h) {
  if (!h.is_square() || h.rows() != decomp.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "decomposition has dimension " + std::to_string(decomp.dim()) +
                    ", operator has " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
  }
}

ComplexVector combine(std::initializer_list<std::pair<double, const ComplexVector*>> terms) {
  ComplexVector out(terms.begin()->second->size());
  for (const auto& [c, v] : terms)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * (*v)[i];
  return out;
}

}  // namespace

const ZenoGroup* ZenoDecomposition::find(double lambda) const noexcept {
  for (const auto& g : groups)
    if (std::abs(g.eigenvalue - lambda) <= tolerance) return &g;
  return nullptr;
}

double default_cluster_tolerance(const ComplexMatrix& h_c) {
  return 1e-8 * std::max(1.0, h_c.max_abs());
}

ZenoDecomposition zeno_decompose(const ComplexMatrix& h_c) {
  return zeno_decompose(h_c, default_cluster_tolerance(h_c));
}

ZenoDecomposition zeno_decompose(const ComplexMatrix& h_c, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::OutOfRange, "cluster tolerance must be positive");
  const HermitianEig eig = eig_hermitian(h_c);
  const std::size_t n = eig.eigenvalues.size();

  ZenoDecomposition out;
  out.tolerance = tolerance;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && eig.eigenvalues[end] - eig.eigenvalues[end - 1] <= tolerance) ++end;
    if (end < n && eig.eigenvalues[end] - eig.eigenvalues[end - 1] < 3.0 * tolerance) {
      throw Error(ErrorCode::ClusterAmbiguity,
                  "eigenvalues " + std::to_string(eig.eigenvalues[end - 1]) + " and " +
                      std::to_string(eig.eigenvalues[end]) + " straddle the clustering tolerance");
    }
    ZenoGroup group;
    group.rank = end - start;
    group.projector = ComplexMatrix(n, n);
    double sum = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      sum += eig.eigenvalues[k];
      for (std::size_t i = 0; i < n; ++i) {
        const Complex vik = eig.eigenvectors(i, k);
        for (std::size_t j = 0; j < n; ++j)
          group.projector(i, j) += vik * std::conj(eig.eigenvectors(j, k));
      }
    }
    group.eigenvalue = sum / static_cast<double>(group.rank);
    out.groups.push_back(std::move(group));
    start = end;
  }
  return out;
}

ComplexMatrix zeno_hamiltonian(const ZenoDecomposition& decomp, const ComplexMatrix& h) {
  require_dims(decomp, h);
  ComplexMatrix out(h.rows(), h.cols());
  for (const auto& g : decomp.groups) out += g.projector * h * g.projector;
  return out;
}

ComplexMatrix zeno_limit_propagator(const ZenoDecomposition& decomp, const ComplexMatrix& h,
                                    double k, double t) {
  ComplexMatrix generator = zeno_hamiltonian(decomp, h);
  for (const auto& g : decomp.groups) generator += (k * g.eigenvalue) * g.projector;
  return propagator(generator, t);
}

ComplexMatrix restrict_to(const ComplexMatrix& h, std::span<const ComplexVector> basis) {
  ComplexMatrix out(basis.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const ComplexVector hb = h * std::span<const Complex>(basis[j]);
    for (std::size_t i = 0; i < basis.size(); ++i) out(i, j) = inner(basis[i], hb);
  }
  return out;
}

ComplexMatrix projector_onto(std::span<const ComplexVector> basis) {
  if (basis.empty()) return {};
  ComplexMatrix p(basis.front().size(), basis.front().size());
  for (const auto& b : basis) p += ComplexMatrix::outer(b, b);
  return p;
}

ComplexMatrix effective_hamiltonian_s1(double omega) {
  if (omega < 0.0) throw Error(ErrorCode::NegativeRabi, "omega must be nonnegative");
  const double c = omega / std::numbers::sqrt2;
  return {{0, -c, 0}, {-c, 0, c}, {0, c, 0}};
}

std::array<Complex, 3> analytic_dark_evolution(double t, double omega) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  return {Complex(0.5 * (1.0 + c), 0.0), Complex(0.0, s / std::numbers::sqrt2),
          Complex(0.5 * (1.0 - c), 0.0)};
}

double survival_probability(double g, double omega, double t) {
  const double sum = g * g + omega * omega;
  if (sum == 0.0) throw Error(ErrorCode::DegenerateParams, "g and omega are both zero");
  const double a = (g * g + omega * omega * std::cos(std::sqrt(sum) * t)) / sum;
  return a * a;
}

std::vector<ComplexVector> SubspaceCatalog::s1_basis() const {
  return {phi[1], phi[2], phi[3], phi[4], phi[5]};
}
std::vector<ComplexVector> SubspaceCatalog::s2_basis() const {
  return {phi[6], phi[7], phi[8], phi[9]};
}
std::vector<ComplexVector> SubspaceCatalog::s1_dark() const { return {phi[1], psi1, phi[5]}; }
std::vector<ComplexVector> SubspaceCatalog::s2_dark() const { return {phi[6], psi2}; }

SubspaceCatalog subspace_catalog(const HilbertSpace& space) {
  if (space.n_nuclei() != 2) {
    throw Error(ErrorCode::WrongSpace, "the subspace catalog is defined for two nuclei");
  }
  using N = Nuclear;
  using V = NvLevel;
  const double r2 = std::numbers::sqrt2;
  const double h = 0.5;
  const double ir2 = 1.0 / r2;

  SubspaceCatalog c;
  c.phi[1] = basis_state(space, {N::Up, N::Down}, V::Aux);
  c.phi[2] = basis_state(space, {N::Up, N::Down}, V::Up);
  c.phi[3] = basis_state(space, {N::Up, N::Up}, V::Down);
  c.phi[4] = basis_state(space, {N::Down, N::Up}, V::Up);
  c.phi[5] = basis_state(space, {N::Down, N::Up}, V::Aux);
  c.phi[6] = basis_state(space, {N::Down, N::Down}, V::Aux);
  c.phi[7] = basis_state(space, {N::Down, N::Down}, V::Up);
  c.phi[8] = basis_state(space, {N::Down, N::Up}, V::Down);
  c.phi[9] = basis_state(space, {N::Up, N::Down}, V::Down);

  c.psi1 = combine({{-ir2, &c.phi[2]}, {ir2, &c.phi[4]}});
  c.s1_plus = combine({{h, &c.phi[2]}, {h * r2, &c.phi[3]}, {h, &c.phi[4]}});
  c.s1_minus = combine({{h, &c.phi[2]}, {-h * r2, &c.phi[3]}, {h, &c.phi[4]}});

  c.psi2 = combine({{-ir2, &c.phi[8]}, {ir2, &c.phi[9]}});
  c.s2_plus = combine({{h * r2, &c.phi[7]}, {h, &c.phi[8]}, {h, &c.phi[9]}});
  c.s2_minus = combine({{-h * r2, &c.phi[7]}, {h, &c.phi[8]}, {h, &c.phi[9]}});

  // (|du> - |ud>)(|Down> + |Up>)/2 with du = (nucleus1 down, nucleus2 up).
  c.psi_i = combine({{h, &c.phi[8]}, {-h, &c.phi[9]}, {h, &c.phi[4]}, {-h, &c.phi[2]}});
  // [(|ud> + |du>)|Down> +- sqrt2 |dd>|Up>]/2
  c.qst_plus1 = combine({{h, &c.phi[9]}, {h, &c.phi[8]}, {h * r2, &c.phi[7]}});
  c.qst_minus1 = combine({{h, &c.phi[9]}, {h, &c.phi[8]}, {-h * r2, &c.phi[7]}});
  // [(|ud> + |du>)|Up> +- sqrt2 |uu>|Down>]/2
  c.qst_plus2 = combine({{h, &c.phi[2]}, {h, &c.phi[4]}, {h * r2, &c.phi[3]}});
  c.qst_minus2 = combine({{h, &c.phi[2]}, {h, &c.phi[4]}, {-h * r2, &c.phi[3]}});
  return c;
}

}  // namespace nvzeno
