#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hbtrain/config.hpp"
#include "hbtrain/hybrid.hpp"
#include "hbtrain/model.hpp"

namespace hbtrain {

enum class SweepAxis { energy, slots, rho, rx_antennas };
enum class Scheme {
  waterfill_fd,
  waterfill_hybrid,
  equal_fd,
  equal_hybrid,
  perfect_csi,
};

std::string to_string(SweepAxis axis);
std::string to_string(Scheme scheme);
SweepAxis sweep_axis_from_string(const std::string& s);
Scheme scheme_from_string(const std::string& s);

/// One averaged simulation point.
struct EvaluationRecord {
  SweepAxis axis = SweepAxis::energy;
  double sweep_value = 0.0;
  Scheme scheme = Scheme::waterfill_fd;
  int trials = 0;
  double nmse = 0.0;      // linear; converted to dB at emission
  double se_bits = 0.0;   // bits/s/Hz
  int q_nz = 0;
  double eta = 1.0;
  std::uint64_t seed = 0;
  std::string error;      // nonempty marks a failed point
};

/// ||h_hat - h||_F^2 / ||h||_F^2.
double nmse(const Eigen::MatrixXcd& h_hat, const Eigen::MatrixXcd& h);

struct Prelog {
  double t_c = 0.0;      // coherence time, seconds
  double eta = 1.0;      // fraction of the coherence block left for data
  bool clamped = false;  // training exceeded the coherence budget
};

/// Coherence time from the Doppler spread and the resulting pre-log factor
/// 1 - q_nz/(T_c * B_w), clamped into [0, 1].
Prelog coherence_prelog(const SystemConfig& cfg, int q_nz);

/// Data-phase beamformers from the channel estimate: dominant singular
/// vectors, with per-stream unit transmit power, plus their phase-shifter
/// splits.
struct DataBeamformers {
  Eigen::MatrixXcd t_total;  // N x N_s
  Eigen::MatrixXcd q_total;  // M x N_s
  HybridFactors t_hybrid;
  HybridFactors q_hybrid;
  bool reduced_rank = false;
};
DataBeamformers design_data_beamformers(const Eigen::MatrixXcd& h_hat,
                                        const SystemConfig& cfg, Rng& rng);

/// Achievable rate with estimation-error-aware interference term. Returns 0
/// when the error-plus-noise matrix stays singular after a tiny ridge.
double spectral_efficiency(const Eigen::MatrixXcd& h,
                           const Eigen::MatrixXcd& h_hat,
                           const Eigen::MatrixXcd& t_total,
                           const Eigen::MatrixXcd& q_total,
                           const SystemConfig& cfg, double eta);

/// Monte Carlo sweep over one parameter axis. Points and trials are
/// independently seeded from cfg.seed, so results do not depend on thread
/// count. A failing point is recorded with its error message, not dropped.
std::vector<EvaluationRecord> run_sweep(const SystemConfig& cfg,
                                        SweepAxis axis,
                                        const std::vector<double>& values,
                                        const std::vector<Scheme>& schemes,
                                        int trials, int threads = 1);

/// Fraction of training slots that receive positive power, over a grid of
/// receive-antenna counts and correlation magnitudes, at the full slot
/// budget Q = MN/n_rf.
struct QnzEntry {
  int n_rx = 0;
  double rho_mag = 0.0;
  int q = 0;
  int q_nz = 0;
  double ratio = 0.0;
};
std::vector<QnzEntry> qnz_profile(const SystemConfig& base,
                                  const std::vector<int>& m_values,
                                  const std::vector<double>& rho_values);

}  // namespace hbtrain
