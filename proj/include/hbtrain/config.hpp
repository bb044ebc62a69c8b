#pragma once

#include <complex>
#include <cstdint>

namespace hbtrain {

/// Scenario parameters for one simulated system. Defaults reproduce the
/// standard evaluation setup: 32x16 antennas, 8 RF chains, exponential
/// correlation 0.8, unit noise power, 1.5 MHz bandwidth, 50 km/h at 2 GHz.
struct SystemConfig {
  int n_tx = 32;                    // N, transmit antennas
  int n_rx = 16;                    // M, receive antennas
  int n_rf = 8;                     // RF chains, shared by both ends
  int q_slots = 64;                 // Q, maximum training slots
  double energy_budget = 64.0;      // E_T
  double noise_var = 1.0;           // sigma_n^2
  std::complex<double> rho = 0.8;   // correlation coefficient, both ends
  int n_streams = 4;                // N_s, data streams
  double bandwidth_hz = 1.5e6;      // B_w
  double velocity_mps = 50.0 / 3.6; // v (50 km/h)
  double carrier_hz = 2e9;          // f_c
  double tol = 1e-6;                // water-filling squared-budget-gap tolerance
  int altmin_max_iter = 500;
  double altmin_tol = 1e-6;
  std::uint64_t seed = 1;

  // Estimator noise model: when true (default) the noise covariance is built
  // from the combiners actually applied (hybrid-aware); when false it uses
  // the ideal semi-unitary combiners even if hybrid hardware is simulated.
  bool matched_noise = true;

  // Perfect-CSI reference curves count zero training slots toward the
  // pre-log factor.
  bool perfect_csi_zero_training = true;

  int max_slots() const { return n_rx * n_tx / n_rf; }

  /// Throws InvalidParameterError on any violated constraint.
  void validate() const;
};

}  // namespace hbtrain
