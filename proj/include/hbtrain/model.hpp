#pragma once

#include <Eigen/Dense>

#include "hbtrain/config.hpp"
#include "hbtrain/rng.hpp"

namespace hbtrain {

/// Transmit/receive spatial correlation matrices (Hermitian PSD, unit
/// diagonal).
struct CorrelationPair {
  Eigen::MatrixXcd s_tx;  // N x N
  Eigen::MatrixXcd s_rx;  // M x M

  void validate() const;
};

/// Eigendecompositions of both correlation matrices plus the Kronecker
/// eigenvalue diagonal. Eigenvalues are sorted descending within each side;
/// eigenvector phases are fixed so the largest-magnitude entry of each
/// column is real positive.
struct EigenBasis {
  Eigen::MatrixXcd u_tx;    // N x N unitary
  Eigen::VectorXd lam_tx;   // length N
  Eigen::MatrixXcd u_rx;    // M x M unitary
  Eigen::VectorXd lam_rx;   // length M
  Eigen::VectorXd lam_kron; // length M*N, lam_kron[(i-1)*M + j] = lam_tx[i]*lam_rx[j]

  int n_tx() const { return static_cast<int>(lam_tx.size()); }
  int n_rx() const { return static_cast<int>(lam_rx.size()); }
};

/// One channel draw in antenna, white, and eigen domains.
struct ChannelRealization {
  Eigen::MatrixXcd h;         // M x N
  Eigen::MatrixXcd h_white;   // M x N, iid CN(0,1)
  Eigen::MatrixXcd h_virtual; // M x N, U_r^H H U_t
};

/// Exponential correlation matrix: entry (i,j) is rho^(j-i) above the
/// diagonal and its conjugate below, ones on the diagonal.
Eigen::MatrixXcd exp_correlation(std::complex<double> rho, int n);

/// Eigendecomposes both correlation matrices. Throws RankDeficientError if
/// any eigenvalue falls below 1e-12 after clamping small negatives to zero.
EigenBasis eigen_basis(const CorrelationPair& corr);

/// Draws one correlated channel realization from the given random stream.
ChannelRealization sample_channel(const EigenBasis& basis, Rng& rng);

/// Maps a training slot index to (transmit eigenvector index, receive block
/// index), both 1-based. nu = m / n_rf blocks of the receive basis are swept
/// before the transmit index advances.
struct SlotIndices {
  int n_q;  // transmit eigenvector index, 1..N
  int m_q;  // receive block index, 1..nu
};
SlotIndices slot_index_map(int q, int m, int n_rf);

/// The MN x n_rf slot block: (column n_q of conj(U_t)) kron (receive block
/// m_q of U_r).
Eigen::MatrixXcd build_psi_block(const EigenBasis& basis, int q, int n_rf);

/// Full MN x MN matrix conj(U_t) kron U_r (the concatenation of all blocks).
Eigen::MatrixXcd build_psi(const EigenBasis& basis);

/// Column-major stacking of a matrix.
Eigen::VectorXcd vec(const Eigen::MatrixXcd& a);

/// Inverse of vec: reshape a length rows*cols vector column-major.
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int rows, int cols);

}  // namespace hbtrain
