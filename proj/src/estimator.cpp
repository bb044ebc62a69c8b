#include "hbtrain/estimator.hpp"

#include <cmath>

#include "hbtrain/errors.hpp"
#include "hbtrain/hybrid.hpp"

namespace hbtrain {

namespace {

// R_n = sigma^2 blkdg(W_q^H W_q) from the noise-model combiners.
Eigen::MatrixXcd noise_covariance(const SlotBeamformers& slots,
                                  double noise_var) {
  int l = 0;
  for (const auto& w : slots.noise_combiners) l += static_cast<int>(w.cols());
  Eigen::MatrixXcd rn = Eigen::MatrixXcd::Zero(l, l);
  int row = 0;
  for (const auto& w : slots.noise_combiners) {
    const int nrf = static_cast<int>(w.cols());
    rn.block(row, row, nrf, nrf) = noise_var * (w.adjoint() * w);
    row += nrf;
  }
  return rn;
}

}  // namespace

SlotBeamformers effective_slots(const TrainingPlan& plan, bool hybrid,
                                const SystemConfig& cfg, Rng& rng) {
  SlotBeamformers slots;
  for (int q = 0; q < plan.n_slots(); ++q) {
    if (!(plan.powers[q] > 0.0)) continue;
    const Eigen::VectorXcd v_fd =
        std::sqrt(plan.powers[q]) * plan.precoder_dirs[q];
    if (!hybrid) {
      slots.precoders.push_back(v_fd);
      slots.combiners.push_back(plan.combiners[q]);
      slots.noise_combiners.push_back(plan.combiners[q]);
      continue;
    }
    const HybridFactors vf = split_precoder_vector(v_fd, cfg.n_rf);
    slots.precoders.push_back(effective_beamformer(vf).col(0));
    const HybridFactors wf = pe_altmin(plan.combiners[q], cfg.n_rf,
                                       cfg.altmin_max_iter, cfg.altmin_tol,
                                       rng);
    slots.combiners.push_back(effective_beamformer(wf));
    slots.noise_combiners.push_back(cfg.matched_noise ? slots.combiners.back()
                                                      : plan.combiners[q]);
  }
  return slots;
}

MeasurementSet simulate_training(const ChannelRealization& channel,
                                 const TrainingPlan& plan, bool hybrid,
                                 const EigenBasis& basis,
                                 const SystemConfig& cfg, Rng& rng) {
  const SlotBeamformers slots = effective_slots(plan, hybrid, cfg, rng);
  return simulate_training(channel, slots, basis, cfg, rng);
}

Eigen::VectorXcd measure_training(const ChannelRealization& channel,
                                  const SlotBeamformers& slots,
                                  const SystemConfig& cfg, Rng& rng) {
  const int m = static_cast<int>(channel.h.rows());
  int l = 0;
  for (const auto& w : slots.combiners) {
    if (w.rows() != m) throw DimensionError("combiner rows must match n_rx");
    l += static_cast<int>(w.cols());
  }
  Eigen::VectorXcd y(l);
  const double sigma = std::sqrt(cfg.noise_var);
  int row = 0;
  for (std::size_t q = 0; q < slots.combiners.size(); ++q) {
    const auto& v = slots.precoders[q];
    const auto& w = slots.combiners[q];
    if (v.size() != channel.h.cols())
      throw DimensionError("precoder length must match n_tx");
    const int nrf = static_cast<int>(w.cols());
    Eigen::VectorXcd noise(m);
    for (int i = 0; i < m; ++i) noise[i] = sigma * rng.complex_gaussian();
    y.segment(row, nrf) = w.adjoint() * (channel.h * v + noise);
    row += nrf;
  }
  return y;
}

MeasurementSet simulate_training(const ChannelRealization& channel,
                                 const SlotBeamformers& slots,
                                 const EigenBasis& basis,
                                 const SystemConfig& cfg, Rng& rng) {
  if (channel.h.rows() != basis.n_rx() || channel.h.cols() != basis.n_tx())
    throw DimensionError("channel and basis dimensions disagree");
  MeasurementSet meas;
  meas.y = measure_training(channel, slots, cfg, rng);
  meas.noise_cov = noise_covariance(slots, cfg.noise_var);
  meas.f_matrix =
      stack_measurement_matrix(basis, slots.precoders, slots.combiners);
  return meas;
}

MmseOperator::MmseOperator(const Eigen::MatrixXcd& f_matrix,
                           const Eigen::MatrixXcd& noise_cov,
                           const EigenBasis& basis)
    : basis_(&basis), f_(f_matrix) {
  frv_ = f_ * basis.lam_kron.asDiagonal();
  Eigen::MatrixXcd s = frv_ * f_.adjoint() + noise_cov;
  s = 0.5 * (s + s.adjoint().eval());
  gram_.compute(s);
  if (gram_.info() != Eigen::Success)
    throw NumericError("measurement Gram matrix factorization failed");
}

Eigen::VectorXcd MmseOperator::estimate(const Eigen::VectorXcd& y) const {
  return frv_.adjoint() * gram_.solve(y);
}

Eigen::MatrixXcd MmseOperator::channel_estimate(
    const Eigen::VectorXcd& y) const {
  const Eigen::VectorXcd hv = estimate(y);
  return basis_->u_rx * unvec(hv, basis_->n_rx(), basis_->n_tx()) *
         basis_->u_tx.adjoint();
}

Eigen::MatrixXcd MmseOperator::error_covariance() const {
  Eigen::MatrixXcd c = Eigen::MatrixXcd(basis_->lam_kron.asDiagonal());
  c.noalias() -= frv_.adjoint() * gram_.solve(frv_);
  return 0.5 * (c + c.adjoint().eval());
}

double MmseOperator::j_mmse() const {
  return error_covariance().real().trace();
}

EstimateResult mmse_estimate(const MeasurementSet& meas,
                             const EigenBasis& basis) {
  const MmseOperator op(meas.f_matrix, meas.noise_cov, basis);
  EstimateResult res;
  res.h_v_hat = op.estimate(meas.y);
  res.h_hat = basis.u_rx * unvec(res.h_v_hat, basis.n_rx(), basis.n_tx()) *
              basis.u_tx.adjoint();
  res.err_cov = op.error_covariance();
  res.j_mmse = res.err_cov.real().trace();
  return res;
}

double empirical_mse(const SystemConfig& cfg, const TrainingPlan& plan,
                     const EigenBasis& basis, int trials, Rng& rng) {
  if (trials < 1) throw InvalidParameterError("trials must be positive");
  Rng no_hybrid(0);
  const SlotBeamformers slots = effective_slots(plan, false, cfg, no_hybrid);
  const Eigen::MatrixXcd f =
      stack_measurement_matrix(basis, slots.precoders, slots.combiners);
  const MmseOperator op(f, noise_covariance(slots, cfg.noise_var), basis);

  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ChannelRealization ch = sample_channel(basis, rng);
    const Eigen::VectorXcd y = measure_training(ch, slots, cfg, rng);
    acc += (vec(ch.h_virtual) - op.estimate(y)).squaredNorm();
  }
  return acc / trials;
}

}  // namespace hbtrain
