#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hbtrain/config.hpp"
#include "hbtrain/model.hpp"

namespace hbtrain {

/// The Kronecker eigenvalue diagonal partitioned into consecutive
/// n_rf-sized blocks, one block per potential training slot.
struct BlockSpectrum {
  Eigen::VectorXd block_traces;          // length B = M*N/n_rf
  std::vector<Eigen::VectorXd> block_eigs;  // B blocks of length n_rf
  std::vector<int> sort_perm;            // 0-based, traces descending

  int n_blocks() const { return static_cast<int>(block_eigs.size()); }
};

/// Designed training schedule: per-slot transmit direction, power, and
/// receive combiner, plus the eigen-direction block index each slot targets.
struct TrainingPlan {
  std::vector<Eigen::VectorXcd> precoder_dirs;  // unit-norm, length N
  Eigen::VectorXd powers;                       // alpha_q = z_q^2
  std::vector<Eigen::MatrixXcd> combiners;      // semi-unitary M x n_rf
  std::vector<int> dir_indices;                 // 1-based block indices
  int q_nz = 0;                                 // slots with positive power

  int n_slots() const { return static_cast<int>(powers.size()); }
};

/// Partitions lam_kron into n_rf-sized blocks and records the trace-descending
/// permutation (ties broken by ascending block index).
BlockSpectrum block_spectrum(const Eigen::VectorXd& lam_kron, int n_rf);

/// Solves (1/sigma^2) * sum_k (1/lambda_k + alpha/sigma^2)^(-2) = mu0 for
/// alpha >= 0. Returns 0 when no positive root exists. Newton iteration from
/// alpha = 0 with a bisection fallback; residual below 1e-10 * mu0.
double newton_block_power(const Eigen::VectorXd& block_eigs_q, double mu0,
                          double noise_var);

struct WaterfillResult {
  Eigen::VectorXd powers;  // one per block
  double mu0 = 0.0;        // multiplier at termination
  int iterations = 0;
  int q_nz = 0;
};

/// Bisection on the multiplier until the energy budget is met with equality.
/// tol bounds the squared budget gap; the effective stop also enforces a
/// 1e-6-relative gap so the budget invariant holds at any energy scale.
WaterfillResult waterfill(const BlockSpectrum& spectrum, double energy,
                          double noise_var, double tol);

/// Full training design. When every positively-powered block fits in the
/// q_slots budget the slots map one-to-one onto blocks (all blocks in natural
/// order when q_slots equals the block count, otherwise just the positive
/// ones). When they do not fit, the q_slots largest-trace blocks are selected
/// and the budget is re-allocated over them alone.
TrainingPlan design_training(const EigenBasis& basis, const SystemConfig& cfg);

/// Same slot directions and combiners as design_training but every one of
/// the q_slots slots gets energy/q_slots; the equal-power baseline.
TrainingPlan equal_power_plan(const EigenBasis& basis,
                              const SystemConfig& cfg);

/// L x MN measurement matrix F: rows stacked per slot, block q equal to
/// (v_q^T kron W_q^H) * Psi.
Eigen::MatrixXcd stack_measurement_matrix(
    const EigenBasis& basis,
    const std::vector<Eigen::VectorXcd>& precoders,
    const std::vector<Eigen::MatrixXcd>& combiners);

/// Training Gram matrix from its definition: F^H R_n^(-1) F with
/// R_n = sigma^2 blkdg(W_q^H W_q). Throws on a singular noise block.
Eigen::MatrixXcd gamma_squared_definition(const TrainingPlan& plan,
                                          const EigenBasis& basis,
                                          double noise_var);

/// Equivalent closed form (1/sigma^2) Psi^H Upsilon D Upsilon^H Psi built
/// from slot powers, unit directions, and the combiners' left singular
/// bases; independent of combiner scaling and right rotations.
Eigen::MatrixXcd gamma_squared_fast(const TrainingPlan& plan,
                                    const EigenBasis& basis,
                                    double noise_var);

/// MN x L matrix whose slot-q column block is conj(dir_q) kron K_q, with K_q
/// the left singular basis of the q-th combiner.
Eigen::MatrixXcd build_upsilon(const TrainingPlan& plan);

/// Tr((Lambda^(-1) + Gamma^2)^(-1)) evaluated in the inverse-free form
/// S (I + S G S)^(-1) S with S = Lambda^(1/2), stable for tiny eigenvalues.
double j_mmse_from_gamma(const Eigen::VectorXd& lam_kron,
                         const Eigen::MatrixXcd& gamma2);

}  // namespace hbtrain
