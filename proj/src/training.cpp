#include "hbtrain/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hbtrain/errors.hpp"

namespace hbtrain {

namespace {

// Left side of the per-block stationarity equation at multiplier level mu0.
double block_residual(const Eigen::VectorXd& eigs, double alpha,
                      double noise_var) {
  double s = 0.0;
  for (int k = 0; k < eigs.size(); ++k) {
    const double t = 1.0 / eigs[k] + alpha / noise_var;
    s += 1.0 / (t * t);
  }
  return s / noise_var;
}

double block_residual_slope(const Eigen::VectorXd& eigs, double alpha,
                            double noise_var) {
  double s = 0.0;
  for (int k = 0; k < eigs.size(); ++k) {
    const double t = 1.0 / eigs[k] + alpha / noise_var;
    s += 1.0 / (t * t * t);
  }
  return -2.0 * s / (noise_var * noise_var);
}

}  // namespace

BlockSpectrum block_spectrum(const Eigen::VectorXd& lam_kron, int n_rf) {
  if (n_rf < 1 || lam_kron.size() % n_rf != 0)
    throw InvalidParameterError("spectrum length must be divisible by n_rf");
  const int b = static_cast<int>(lam_kron.size()) / n_rf;
  BlockSpectrum sp;
  sp.block_traces.resize(b);
  sp.block_eigs.reserve(b);
  for (int i = 0; i < b; ++i) {
    sp.block_eigs.push_back(lam_kron.segment(i * n_rf, n_rf));
    sp.block_traces[i] = sp.block_eigs.back().sum();
  }
  sp.sort_perm.resize(b);
  std::iota(sp.sort_perm.begin(), sp.sort_perm.end(), 0);
  std::stable_sort(sp.sort_perm.begin(), sp.sort_perm.end(), [&](int a, int c) {
    return sp.block_traces[a] > sp.block_traces[c];
  });
  return sp;
}

double newton_block_power(const Eigen::VectorXd& block_eigs_q, double mu0,
                          double noise_var) {
  if (!(mu0 > 0.0)) throw InvalidParameterError("mu0 must be positive");
  if (!(noise_var > 0.0))
    throw InvalidParameterError("noise_var must be positive");
  if (block_eigs_q.size() == 0 || block_eigs_q.minCoeff() <= 0.0)
    throw InvalidParameterError("block eigenvalues must be positive");

  if (block_residual(block_eigs_q, 0.0, noise_var) <= mu0) return 0.0;

  // The residual is strictly decreasing and convex in alpha, so Newton from
  // zero approaches the root from below and cannot overshoot; the bisection
  // fallback covers pathological rounding.
  double alpha = 0.0;
  const double tol = 1e-10 * mu0;
  for (int it = 0; it < 200; ++it) {
    const double r = block_residual(block_eigs_q, alpha, noise_var) - mu0;
    if (std::abs(r) < tol) return alpha;
    const double d = block_residual_slope(block_eigs_q, alpha, noise_var);
    const double next = alpha - r / d;
    if (!std::isfinite(next) || next < alpha) break;
    alpha = next;
  }
  // Bisection fallback on a bracket grown from the last Newton iterate.
  double lo = alpha, hi = std::max(1.0, 2.0 * alpha);
  while (block_residual(block_eigs_q, hi, noise_var) > mu0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericError("block power bracket diverged");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = block_residual(block_eigs_q, mid, noise_var) - mu0;
    if (std::abs(r) < tol) return mid;
    (r > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

WaterfillResult waterfill(const BlockSpectrum& spectrum, double energy,
                          double noise_var, double tol) {
  if (!(energy > 0.0)) throw InvalidParameterError("energy must be positive");
  const int b = spectrum.n_blocks();

  double mu_max = 0.0;
  for (int i = 0; i < b; ++i)
    mu_max = std::max(mu_max,
                      block_residual(spectrum.block_eigs[i], 0.0, noise_var));

  // Stop when the squared budget gap is inside tol; additionally require a
  // 1e-6-relative gap so the result meets the budget at any energy scale.
  const double gap_tol =
      std::sqrt(std::min(tol, 1e-12 * energy * energy));
  constexpr int kMaxIter = 10000;

  WaterfillResult res;
  res.powers = Eigen::VectorXd::Zero(b);
  double mu_lo = 0.0, mu_hi = mu_max;
  double gap = energy;
  for (res.iterations = 1; res.iterations <= kMaxIter; ++res.iterations) {
    res.mu0 = 0.5 * (mu_lo + mu_hi);
    for (int i = 0; i < b; ++i)
      res.powers[i] =
          newton_block_power(spectrum.block_eigs[i], res.mu0, noise_var);
    gap = res.powers.sum() - energy;
    if (std::abs(gap) <= gap_tol) break;
    if (gap < 0.0)
      mu_hi = res.mu0;  // need more power, lower the multiplier
    else
      mu_lo = res.mu0;
    if (res.iterations == kMaxIter)
      throw NumericError("water-filling failed to meet the energy budget; "
                         "final gap " + std::to_string(gap), gap);
  }
  res.q_nz = static_cast<int>((res.powers.array() > 0.0).count());
  return res;
}

namespace {

// Direction and combiner for one eigen-direction block (1-based index).
Eigen::VectorXcd block_direction(const EigenBasis& basis, int block,
                                 int n_rf) {
  const SlotIndices idx = slot_index_map(block, basis.n_rx(), n_rf);
  return basis.u_tx.col(idx.n_q - 1).conjugate();
}

Eigen::MatrixXcd block_combiner(const EigenBasis& basis, int block, int n_rf) {
  const SlotIndices idx = slot_index_map(block, basis.n_rx(), n_rf);
  return basis.u_rx.middleCols((idx.m_q - 1) * n_rf, n_rf);
}

TrainingPlan assemble_plan(const EigenBasis& basis, int n_rf,
                           const std::vector<int>& blocks,
                           const Eigen::VectorXd& powers) {
  TrainingPlan plan;
  plan.dir_indices = blocks;
  plan.powers = powers;
  plan.precoder_dirs.reserve(blocks.size());
  plan.combiners.reserve(blocks.size());
  for (int blk : blocks) {
    plan.precoder_dirs.push_back(block_direction(basis, blk, n_rf));
    plan.combiners.push_back(block_combiner(basis, blk, n_rf));
  }
  plan.q_nz = static_cast<int>((powers.array() > 0.0).count());
  return plan;
}

}  // namespace

TrainingPlan design_training(const EigenBasis& basis,
                             const SystemConfig& cfg) {
  cfg.validate();
  const BlockSpectrum sp = block_spectrum(basis.lam_kron, cfg.n_rf);
  const int b = sp.n_blocks();
  const WaterfillResult wf =
      waterfill(sp, cfg.energy_budget, cfg.noise_var, cfg.tol);

  if (wf.q_nz <= cfg.q_slots) {
    if (cfg.q_slots >= b) {
      // One slot per block in natural order, zero-power slots included.
      std::vector<int> blocks(b);
      std::iota(blocks.begin(), blocks.end(), 1);
      return assemble_plan(basis, cfg.n_rf, blocks, wf.powers);
    }
    // Fewer slots than blocks but every funded block fits: keep only those.
    std::vector<int> blocks;
    std::vector<double> pw;
    for (int i = 0; i < b; ++i)
      if (wf.powers[i] > 0.0) {
        blocks.push_back(i + 1);
        pw.push_back(wf.powers[i]);
      }
    return assemble_plan(
        basis, cfg.n_rf, blocks,
        Eigen::Map<const Eigen::VectorXd>(pw.data(), pw.size()));
  }

  // Truncated budget: take the q_slots largest-trace blocks and re-solve the
  // allocation over them alone.
  std::vector<int> blocks(cfg.q_slots);
  BlockSpectrum reduced;
  reduced.block_traces.resize(cfg.q_slots);
  for (int q = 0; q < cfg.q_slots; ++q) {
    const int blk = sp.sort_perm[q];
    blocks[q] = blk + 1;
    reduced.block_eigs.push_back(sp.block_eigs[blk]);
    reduced.block_traces[q] = sp.block_traces[blk];
  }
  reduced.sort_perm.resize(cfg.q_slots);
  std::iota(reduced.sort_perm.begin(), reduced.sort_perm.end(), 0);
  const WaterfillResult rwf =
      waterfill(reduced, cfg.energy_budget, cfg.noise_var, cfg.tol);
  return assemble_plan(basis, cfg.n_rf, blocks, rwf.powers);
}

TrainingPlan equal_power_plan(const EigenBasis& basis,
                              const SystemConfig& cfg) {
  SystemConfig wf_cfg = cfg;
  TrainingPlan plan = design_training(basis, wf_cfg);
  const BlockSpectrum sp = block_spectrum(basis.lam_kron, cfg.n_rf);

  // Same eigen-direction beamformers, but all q_slots slots funded equally.
  // When the water-filling plan carries fewer slots, extend with the next
  // largest-trace blocks not already present.
  std::vector<int> blocks = plan.dir_indices;
  if (static_cast<int>(blocks.size()) < cfg.q_slots) {
    std::vector<bool> used(sp.n_blocks() + 1, false);
    for (int blk : blocks) used[blk] = true;
    for (int i : sp.sort_perm) {
      if (static_cast<int>(blocks.size()) >= cfg.q_slots) break;
      if (!used[i + 1]) {
        blocks.push_back(i + 1);
        used[i + 1] = true;
      }
    }
  }
  const Eigen::VectorXd powers = Eigen::VectorXd::Constant(
      blocks.size(), cfg.energy_budget / static_cast<double>(blocks.size()));
  return assemble_plan(basis, cfg.n_rf, blocks, powers);
}

Eigen::MatrixXcd stack_measurement_matrix(
    const EigenBasis& basis,
    const std::vector<Eigen::VectorXcd>& precoders,
    const std::vector<Eigen::MatrixXcd>& combiners) {
  const int mn = basis.n_rx() * basis.n_tx();
  const Eigen::MatrixXcd psi = build_psi(basis);
  int l = 0;
  for (const auto& w : combiners) l += static_cast<int>(w.cols());
  Eigen::MatrixXcd f(l, mn);
  int row = 0;
  for (std::size_t q = 0; q < combiners.size(); ++q) {
    const auto& v = precoders[q];
    const auto& w = combiners[q];
    const int nrf = static_cast<int>(w.cols());
    // (v^T kron W^H) Psi, assembled without forming the Kronecker product:
    // vec(W^H X_c) per transmit antenna block.
    Eigen::MatrixXcd phi_row(nrf, mn);
    for (int r = 0; r < v.size(); ++r)
      phi_row.middleCols(r * basis.n_rx(), basis.n_rx()) =
          v[r] * w.adjoint();
    f.middleRows(row, nrf) = phi_row * psi;
    row += nrf;
  }
  return f;
}

Eigen::MatrixXcd gamma_squared_definition(const TrainingPlan& plan,
                                          const EigenBasis& basis,
                                          double noise_var) {
  std::vector<Eigen::VectorXcd> precoders;
  precoders.reserve(plan.n_slots());
  for (int q = 0; q < plan.n_slots(); ++q)
    precoders.push_back(std::sqrt(plan.powers[q]) * plan.precoder_dirs[q]);
  const Eigen::MatrixXcd f =
      stack_measurement_matrix(basis, precoders, plan.combiners);

  const int mn = basis.n_rx() * basis.n_tx();
  Eigen::MatrixXcd gamma2 = Eigen::MatrixXcd::Zero(mn, mn);
  int row = 0;
  for (const auto& w : plan.combiners) {
    const int nrf = static_cast<int>(w.cols());
    const Eigen::MatrixXcd rn_block = noise_var * (w.adjoint() * w);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(rn_block);
    if (!lu.isInvertible())
      throw NumericError("degenerate combiner: singular noise block");
    const auto fq = f.middleRows(row, nrf);
    gamma2.noalias() += fq.adjoint() * lu.solve(fq);
    row += nrf;
  }
  return gamma2;
}

Eigen::MatrixXcd build_upsilon(const TrainingPlan& plan) {
  if (plan.n_slots() == 0) throw InvalidParameterError("empty training plan");
  const int m = static_cast<int>(plan.combiners.front().rows());
  const int n = static_cast<int>(plan.precoder_dirs.front().size());
  int l = 0;
  for (const auto& w : plan.combiners) l += static_cast<int>(w.cols());
  Eigen::MatrixXcd upsilon(m * n, l);
  int col = 0;
  for (int q = 0; q < plan.n_slots(); ++q) {
    const auto& w = plan.combiners[q];
    const int nrf = static_cast<int>(w.cols());
    // Left singular basis of the combiner; for a semi-unitary combiner this
    // is the combiner itself up to a right rotation, which cancels here.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(w, Eigen::ComputeThinU);
    if (svd.singularValues().minCoeff() <= 0.0)
      throw NumericError("degenerate combiner: rank-deficient");
    const Eigen::MatrixXcd k = svd.matrixU();
    const Eigen::VectorXcd vconj = plan.precoder_dirs[q].conjugate();
    for (int r = 0; r < n; ++r)
      upsilon.block(r * m, col, m, nrf) = vconj[r] * k;
    col += nrf;
  }
  return upsilon;
}

Eigen::MatrixXcd gamma_squared_fast(const TrainingPlan& plan,
                                    const EigenBasis& basis,
                                    double noise_var) {
  const Eigen::MatrixXcd psi = build_psi(basis);
  const Eigen::MatrixXcd upsilon = build_upsilon(plan);
  Eigen::VectorXd d(upsilon.cols());
  int col = 0;
  for (int q = 0; q < plan.n_slots(); ++q) {
    const int nrf = static_cast<int>(plan.combiners[q].cols());
    d.segment(col, nrf).setConstant(plan.powers[q]);
    col += nrf;
  }
  const Eigen::MatrixXcd pu = psi.adjoint() * upsilon;
  return (pu * d.asDiagonal() * pu.adjoint()) / noise_var;
}

double j_mmse_from_gamma(const Eigen::VectorXd& lam_kron,
                         const Eigen::MatrixXcd& gamma2) {
  const Eigen::VectorXd s = lam_kron.cwiseSqrt();
  Eigen::MatrixXcd core = s.asDiagonal() * gamma2 * s.asDiagonal();
  core += Eigen::MatrixXcd::Identity(core.rows(), core.cols());
  const Eigen::MatrixXcd inv =
      core.ldlt().solve(Eigen::MatrixXcd::Identity(core.rows(), core.cols()));
  return (s.asDiagonal() * inv * s.asDiagonal()).real().trace();
}

}  // namespace hbtrain
