#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hbtrain/config.hpp"
#include "hbtrain/model.hpp"
#include "hbtrain/training.hpp"

namespace hbtrain {

/// The beamformers actually applied during training, one entry per
/// positively-powered slot. For the fully-digital path these are the ideal
/// designed beamformers; for the hybrid path they are the recompositions of
/// the phase-shifter splits.
struct SlotBeamformers {
  std::vector<Eigen::VectorXcd> precoders;  // length-N, includes sqrt(power)
  std::vector<Eigen::MatrixXcd> combiners;  // M x n_rf
  std::vector<Eigen::MatrixXcd> noise_combiners;  // used to build R_n
};

/// Materializes the applied beamformers from a plan. Zero-power slots are
/// dropped. With hybrid set, precoders go through the exact vector split and
/// combiners through pe_altmin (consuming rng for the phase initialization);
/// noise combiners follow cfg.matched_noise.
SlotBeamformers effective_slots(const TrainingPlan& plan, bool hybrid,
                                const SystemConfig& cfg, Rng& rng);

/// Stacked multi-slot measurements and the model matrices that generated
/// them.
struct MeasurementSet {
  Eigen::VectorXcd y;         // length L
  Eigen::MatrixXcd f_matrix;  // L x MN
  Eigen::MatrixXcd noise_cov; // L x L block diagonal
};

/// Runs the training slots through the channel with fresh noise and stacks
/// the outputs together with the measurement matrix and noise covariance.
MeasurementSet simulate_training(const ChannelRealization& channel,
                                 const TrainingPlan& plan,
                                 bool hybrid, const EigenBasis& basis,
                                 const SystemConfig& cfg, Rng& rng);

/// As above but with beamformers already materialized (the sweep engine
/// splits hybrid beamformers once per design, not once per trial).
MeasurementSet simulate_training(const ChannelRealization& channel,
                                 const SlotBeamformers& slots,
                                 const EigenBasis& basis,
                                 const SystemConfig& cfg, Rng& rng);

/// Just the stacked outputs, without rebuilding the measurement model; the
/// per-trial fast path.
Eigen::VectorXcd measure_training(const ChannelRealization& channel,
                                  const SlotBeamformers& slots,
                                  const SystemConfig& cfg, Rng& rng);

struct EstimateResult {
  Eigen::VectorXcd h_v_hat;  // length MN
  Eigen::MatrixXcd h_hat;    // M x N
  Eigen::MatrixXcd err_cov;  // MN x MN
  double j_mmse = 0.0;
};

/// Linear MMSE estimate of the eigen-domain channel, its error covariance,
/// and the trace objective. Uses the prior-times-gain form that never
/// inverts the eigenvalue diagonal.
EstimateResult mmse_estimate(const MeasurementSet& meas,
                             const EigenBasis& basis);

/// Reusable estimator for a fixed measurement model: factorizes
/// F R_v F^H + R_n once, then each trial costs one solve.
class MmseOperator {
 public:
  MmseOperator(const Eigen::MatrixXcd& f_matrix,
               const Eigen::MatrixXcd& noise_cov, const EigenBasis& basis);

  Eigen::VectorXcd estimate(const Eigen::VectorXcd& y) const;
  Eigen::MatrixXcd channel_estimate(const Eigen::VectorXcd& y) const;

  /// Error covariance R_v - R_v F^H S^(-1) F R_v (computed on demand).
  Eigen::MatrixXcd error_covariance() const;
  double j_mmse() const;

 private:
  const EigenBasis* basis_;
  Eigen::MatrixXcd f_;
  Eigen::MatrixXcd frv_;  // F * R_v
  Eigen::LDLT<Eigen::MatrixXcd> gram_;  // F R_v F^H + R_n
};

/// Monte Carlo average of ||h_v - h_v_hat||^2 over independent channel and
/// noise draws through the plan's fully-digital beamformers.
double empirical_mse(const SystemConfig& cfg, const TrainingPlan& plan,
                     const EigenBasis& basis, int trials, Rng& rng);

}  // namespace hbtrain
