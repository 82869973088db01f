#include "wmbridge/mixtures.hpp"

#include <cmath>
#include <sstream>

#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"
#include "wmbridge/quantum.hpp"
#include "wmbridge/spectral.hpp"

namespace wmb {

namespace {

cplx inner(const std::vector<cplx>& a, const std::vector<cplx>& b, double dx) {
  cplx s{};
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s * dx;
}

}  // namespace

void MixtureSpec::validate() const {
  if (components.empty()) throw SpecError("mixture has no components");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight >= 0.0)) throw SpecError("mixture weights must be non-negative");
    if (c.psi.grid() != components.front().psi.grid()) throw SpecError("mixture components live on different grids");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw SpecError("mixture weights sum to " + std::to_string(total));
}

DensityField mix(const MixtureSpec& spec, double hbar) {
  spec.validate();
  const auto& g = spec.components.front().psi.grid();
  std::vector<cplx> out(g.size() * g.size(), cplx{});
  for (const auto& c : spec.components) {
    const auto rho = densify(c.psi, hbar);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c.weight * rho.values()[k];
  }
  return DensityField(g, std::move(out), hbar, spec.components.front().psi.time());
}

BasisSet::BasisSet(std::vector<Amplitude> states) : states_(std::move(states)) {
  if (states_.empty()) throw SpecError("basis is empty");
  for (const auto& s : states_)
    if (s.grid() != states_.front().grid()) throw SpecError("basis states live on different grids");
  if (gram_defect() > 1e-8) throw SpecError("basis is not orthonormal");
}

double BasisSet::gram_defect() const {
  const double dx = grid().spacing();
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx g = inner(states_[i].values(), states_[j].values(), dx);
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

namespace {

void gram_schmidt(std::vector<std::vector<cplx>>& v, double dx) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const cplx c = inner(v[j], v[i], dx);
      for (std::size_t k = 0; k < v[i].size(); ++k) v[i][k] -= c * v[j][k];
    }
    const double nrm = std::sqrt(inner(v[i], v[i], dx).real());
    if (!(nrm > 0.0)) throw SpecError("basis vectors are linearly dependent");
    for (auto& x : v[i]) x /= nrm;
  }
}

}  // namespace

BasisSet BasisSet::orthonormalize(const std::vector<Amplitude>& states) {
  if (states.empty()) throw SpecError("basis is empty");
  std::vector<std::vector<cplx>> v;
  for (const auto& s : states) v.push_back(s.values());
  gram_schmidt(v, states.front().grid().spacing());
  std::vector<Amplitude> out;
  for (auto& x : v) out.emplace_back(states.front().grid(), std::move(x));
  return BasisSet(std::move(out));
}

namespace {

struct Hamiltonian {
  Grid1D grid;
  std::vector<double> kinetic;
  std::vector<double> potential;

  Hamiltonian(const Grid1D& g, const PotentialSpec& v, const PhysicsParams& p)
      : grid(g), kinetic(g.size()), potential(sample_potential(v, g, p.mass)) {
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double k = g.wavenumber(q);
      kinetic[q] = p.hbar * p.hbar * k * k / (2.0 * p.mass);
    }
  }

  std::vector<cplx> apply(const std::vector<cplx>& psi) const {
    std::vector<cplx> t = psi;
    fft(t, FftDirection::forward);
    const double inv = 1.0 / static_cast<double>(t.size());
    for (std::size_t q = 0; q < t.size(); ++q) t[q] *= kinetic[q] * inv;
    fft(t, FftDirection::backward);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] += potential[j] * psi[j];
    return t;
  }

  double bound() const {
    double kmax = 0.0, vmax = 0.0, vmin = 0.0;
    for (double k : kinetic) kmax = std::max(kmax, k);
    for (double v : potential) {
      vmax = std::max(vmax, v);
      vmin = std::min(vmin, v);
    }
    return kmax + vmax - vmin;
  }
};

}  // namespace

BasisSet relaxed_eigenbasis(const Grid1D& grid, const PotentialSpec& v, const PhysicsParams& params, std::size_t count,
                            double tol, std::size_t max_sweeps) {
  params.validate();
  if (count == 0) throw InputError("basis size must be positive");
  const Hamiltonian h(grid, v, params);
  const double dx = grid.spacing();
  const std::size_t n = grid.size();
  // two guard vectors speed up the top of the block
  const std::size_t block = count + 2;
  // start from x^s times a Gaussian a quarter of the box wide
  const double width = 0.125 * grid.length();
  std::vector<std::vector<cplx>> vecs(block, std::vector<cplx>(n));
  for (std::size_t s = 0; s < block; ++s)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.point(j) / width;
      vecs[s][j] = std::pow(x, static_cast<double>(s)) * std::exp(-0.5 * x * x);
    }
  const auto starts = vecs;
  gram_schmidt(vecs, dx);

  // eigenvalues of H shifted to be >= 0 keep (1 - tau H) ordered
  double vmin = 0.0;
  for (double p : h.potential) vmin = std::min(vmin, p);
  const double tau = 1.0 / h.bound();
  bool done = false;
  for (std::size_t sweep = 1; sweep <= max_sweeps && !done; ++sweep) {
    parallel_for(block, [&](std::size_t s) {
      const auto hv = h.apply(vecs[s]);
      for (std::size_t j = 0; j < n; ++j) vecs[s][j] -= tau * (hv[j] - vmin * vecs[s][j]);
    });
    gram_schmidt(vecs, dx);
    if (sweep % 50 != 0) continue;
    done = true;
    for (std::size_t s = 0; s < count && done; ++s) {
      const auto hv = h.apply(vecs[s]);
      const double e = inner(vecs[s], hv, dx).real();
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) r += std::norm(hv[j] - e * vecs[s][j]);
      if (std::sqrt(r * dx) > tol) done = false;
    }
  }
  if (!done) throw StabilityError("eigenbasis relaxation did not converge");
  std::vector<Amplitude> out;
  for (std::size_t s = 0; s < count; ++s) {
    auto& x = vecs[s];
    // global phase: real, positive overlap with the start vector
    const cplx o = inner(starts[s], x, dx);
    const cplx phase = std::abs(o) > 0.0 ? std::conj(o) / std::abs(o) : cplx(1.0);
    for (auto& c : x) c *= phase;
    out.emplace_back(grid, std::move(x));
  }
  return BasisSet(std::move(out));
}

std::vector<double> rayleigh_energies(const BasisSet& basis, const PotentialSpec& v, const PhysicsParams& params) {
  const Hamiltonian h(basis.grid(), v, params);
  std::vector<double> e;
  for (const auto& s : basis.states()) e.push_back(inner(s.values(), h.apply(s.values()), basis.grid().spacing()).real());
  return e;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DensityFormatError("density matrix must be square");
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

void DensityMatrix::validate() const {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw DensityFormatError("density matrix is not Hermitian");
  if (std::abs(trace() - 1.0) > 1e-8) throw DensityFormatError("density matrix trace is " + std::to_string(trace()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_);
  if (es.eigenvalues().minCoeff() < -1e-8) throw DensityFormatError("density matrix has a negative eigenvalue");
}

nlohmann::json DensityMatrix::to_json() const {
  if (size() > 64) throw InputError("density matrix too large to serialise (n > 64)");
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m_.rows(); ++i)
    for (Eigen::Index j = 0; j < m_.cols(); ++j) entries.push_back({m_(i, j).real(), m_(i, j).imag()});
  return {{"dimensions", {m_.rows(), m_.cols()}}, {"entries", entries}};
}

DensityMatrix DensityMatrix::from_json(const nlohmann::json& j) {
  const auto dims = j.at("dimensions").get<std::vector<Eigen::Index>>();
  if (dims.size() != 2 || dims[0] != dims[1]) throw DensityFormatError("density matrix must be square");
  const auto& e = j.at("entries");
  if (static_cast<Eigen::Index>(e.size()) != dims[0] * dims[1]) throw DensityFormatError("entry count mismatch");
  Eigen::MatrixXcd m(dims[0], dims[1]);
  for (Eigen::Index i = 0; i < dims[0]; ++i)
    for (Eigen::Index k = 0; k < dims[1]; ++k) {
      const auto& c = e[static_cast<std::size_t>(i * dims[1] + k)];
      m(i, k) = cplx(c.at(0).get<double>(), c.at(1).get<double>());
    }
  return DensityMatrix(std::move(m));
}

DensityMatrix density_matrix_in_basis(const MixtureSpec& spec, const BasisSet& basis) {
  spec.validate();
  if (spec.components.front().psi.grid() != basis.grid()) throw GridMismatch("basis and mixture grids differ");
  const std::size_t nb = basis.size();
  const double dx = basis.grid().spacing();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
  std::ostringstream bad;
  std::vector<double> residuals;
  bool truncated = false;
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    const auto& psi = spec.components[c].psi.values();
    Eigen::VectorXcd a(static_cast<Eigen::Index>(nb));
    std::vector<cplx> rest = psi;
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& phi = basis.states()[i].values();
      a(static_cast<Eigen::Index>(i)) = inner(phi, psi, dx);
      for (std::size_t k = 0; k < rest.size(); ++k) rest[k] -= a(static_cast<Eigen::Index>(i)) * phi[k];
    }
    const double residual = std::sqrt(inner(rest, rest, dx).real());
    residuals.push_back(residual);
    if (residual > 1e-6) {
      truncated = true;
      bad << " component " << c << ": " << residual;
    }
    m += spec.components[c].weight * a * a.adjoint();
  }
  if (truncated) throw TruncationError("basis does not span the mixture; residuals" + bad.str(), residuals);
  return DensityMatrix(std::move(m));
}

double trace_expectation(const DensityMatrix& dm, const AmplitudeOperatorExpr& op, const BasisSet& basis) {
  const auto nb = static_cast<Eigen::Index>(basis.size());
  if (dm.matrix().rows() != nb) throw GridMismatch("density matrix and basis sizes differ");
  const double dx = basis.grid().spacing();
  Eigen::MatrixXcd q(nb, nb);
  std::vector<std::vector<cplx>> applied(basis.size());
  parallel_for(basis.size(), [&](std::size_t i) { applied[i] = apply_amplitude_operator(op, basis.states()[i]); });
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < nb; ++j)
      q(i, j) = inner(basis.states()[static_cast<std::size_t>(i)].values(), applied[static_cast<std::size_t>(j)], dx);
  return (dm.matrix() * q).trace().real();
}

FactorizationResult factorization_test(const DensityField& rho) {
  if (rho.hermiticity_defect() > 1e-9) throw DensityFormatError("density is not Hermitian");
  const std::size_t n = rho.size();
  const std::size_t half = n / 2;
  const auto ln = static_cast<long long>(n);
  Eigen::MatrixXcd k(static_cast<Eigen::Index>(half), static_cast<Eigen::Index>(half));
  const double w = 2.0 * rho.grid_y().spacing();
  for (std::size_t a = 0; a < half; ++a)
    for (std::size_t b = 0; b < half; ++b) {
      // y = y_{2a}, y' = y_{2b}; centre index a + b, offset 2(a - b), folded onto [-n/2, n/2)
      long long m = 2 * (static_cast<long long>(a) - static_cast<long long>(b));
      long long ix = static_cast<long long>(a + b);
      if (m >= ln / 2) {
        m -= ln;
        ix += ln / 2;
      } else if (m < -ln / 2) {
        m += ln;
        ix -= ln / 2;
      }
      k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          w * rho.at(wrap_index(ix, n), static_cast<std::size_t>(m + ln / 2));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double total = ev.cwiseAbs().sum();
  FactorizationResult r;
  r.score = total > 0.0 ? ev.maxCoeff() / total : 0.0;
  r.is_pure = r.score >= 0.999;
  return r;
}

}  // namespace wmb
