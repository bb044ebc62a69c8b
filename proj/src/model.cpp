#include "hbtrain/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hbtrain/errors.hpp"

namespace hbtrain {

namespace {

constexpr double kEigFloor = 1e-12;
constexpr double kNegClamp = 1e-10;

// Sorts eigenpairs descending and fixes each eigenvector's phase so its
// largest-magnitude entry is real positive.
void canonicalize(Eigen::MatrixXcd& u, Eigen::VectorXd& lam,
                  const std::string& side) {
  const int n = static_cast<int>(lam.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lam[a] > lam[b]; });

  Eigen::MatrixXcd us(n, n);
  Eigen::VectorXd ls(n);
  for (int k = 0; k < n; ++k) {
    ls[k] = lam[order[k]];
    us.col(k) = u.col(order[k]);
  }
  for (int k = 0; k < n; ++k) {
    if (ls[k] < 0.0 && ls[k] > -kNegClamp) ls[k] = 0.0;
    if (ls[k] < kEigFloor) throw RankDeficientError(side, k, ls[k]);
    int imax = 0;
    us.col(k).cwiseAbs().maxCoeff(&imax);
    const std::complex<double> pivot = us(imax, k);
    if (std::abs(pivot) > 0.0) us.col(k) *= std::abs(pivot) / pivot;
  }
  u = std::move(us);
  lam = std::move(ls);
}

}  // namespace

void CorrelationPair::validate() const {
  for (const auto* m : {&s_tx, &s_rx}) {
    if (m->rows() != m->cols()) throw DimensionError("correlation matrix must be square");
    if ((*m - m->adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidParameterError("correlation matrix is not Hermitian");
    for (int i = 0; i < m->rows(); ++i)
      if (std::abs((*m)(i, i) - 1.0) > 1e-12)
        throw InvalidParameterError("correlation matrix diagonal must be all ones");
  }
}

Eigen::MatrixXcd exp_correlation(std::complex<double> rho, int n) {
  if (n < 1) throw InvalidParameterError("matrix order must be at least 1");
  if (!(std::abs(rho) < 1.0))
    throw InvalidParameterError("|rho| must be less than 1");
  Eigen::MatrixXcd s(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    std::complex<double> p = 1.0;
    for (int j = i + 1; j < n; ++j) {
      p *= rho;
      s(i, j) = p;
      s(j, i) = std::conj(p);
    }
  }
  return s;
}

EigenBasis eigen_basis(const CorrelationPair& corr) {
  corr.validate();
  EigenBasis b;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> est(corr.s_tx);
  if (est.info() != Eigen::Success)
    throw NumericError("eigendecomposition of transmit correlation failed");
  b.u_tx = est.eigenvectors();
  b.lam_tx = est.eigenvalues();
  canonicalize(b.u_tx, b.lam_tx, "transmit");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esr(corr.s_rx);
  if (esr.info() != Eigen::Success)
    throw NumericError("eigendecomposition of receive correlation failed");
  b.u_rx = esr.eigenvectors();
  b.lam_rx = esr.eigenvalues();
  canonicalize(b.u_rx, b.lam_rx, "receive");

  const int n = b.n_tx();
  const int m = b.n_rx();
  b.lam_kron.resize(m * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) b.lam_kron[i * m + j] = b.lam_tx[i] * b.lam_rx[j];
  return b;
}

ChannelRealization sample_channel(const EigenBasis& basis, Rng& rng) {
  const int m = basis.n_rx();
  const int n = basis.n_tx();
  ChannelRealization ch;
  ch.h_white.resize(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) ch.h_white(i, j) = rng.complex_gaussian();

  // S^(1/2) = U Lambda^(1/2) U^H on each side.
  const Eigen::MatrixXcd sqrt_rx =
      basis.u_rx * basis.lam_rx.cwiseSqrt().asDiagonal() * basis.u_rx.adjoint();
  const Eigen::MatrixXcd sqrt_tx =
      basis.u_tx * basis.lam_tx.cwiseSqrt().asDiagonal() * basis.u_tx.adjoint();
  ch.h = sqrt_rx * ch.h_white * sqrt_tx;
  ch.h_virtual = basis.u_rx.adjoint() * ch.h * basis.u_tx;
  return ch;
}

SlotIndices slot_index_map(int q, int m, int n_rf) {
  if (n_rf < 1 || m < 1 || m % n_rf != 0)
    throw InvalidParameterError("receive antennas must be divisible by n_rf");
  if (q < 1) throw InvalidParameterError("slot index must be at least 1");
  const int nu = m / n_rf;
  SlotIndices s;
  s.n_q = (q + nu - 1) / nu;
  s.m_q = (q % nu == 0) ? nu : q % nu;
  return s;
}

Eigen::MatrixXcd build_psi_block(const EigenBasis& basis, int q, int n_rf) {
  const int m = basis.n_rx();
  const SlotIndices idx = slot_index_map(q, m, n_rf);
  const Eigen::VectorXcd ut = basis.u_tx.col(idx.n_q - 1).conjugate();
  const Eigen::MatrixXcd ur =
      basis.u_rx.middleCols((idx.m_q - 1) * n_rf, n_rf);
  Eigen::MatrixXcd psi_q(m * basis.n_tx(), n_rf);
  for (int r = 0; r < basis.n_tx(); ++r)
    psi_q.middleRows(r * m, m) = ut[r] * ur;
  return psi_q;
}

Eigen::MatrixXcd build_psi(const EigenBasis& basis) {
  const int m = basis.n_rx();
  const int n = basis.n_tx();
  Eigen::MatrixXcd psi(m * n, m * n);
  for (int ci = 0; ci < n; ++ci)
    for (int ri = 0; ri < n; ++ri)
      psi.block(ri * m, ci * m, m, m) =
          std::conj(basis.u_tx(ri, ci)) * basis.u_rx;
  return psi;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& a) {
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), rows, cols);
}

}  // namespace hbtrain
