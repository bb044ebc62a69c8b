#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hbtrain/rng.hpp"

namespace hbtrain {

/// Analog (unit-modulus) and digital factors of a beamformer, plus the
/// Frobenius distance to the matrix they were split from.
struct HybridFactors {
  Eigen::MatrixXcd analog;   // antennas x n_rf, every entry unit modulus
  Eigen::MatrixXcd digital;  // n_rf x columns-of-target
  double residual = 0.0;     // ||target - analog*digital||_F
};

/// Exact closed-form split of a vector across two phase-shifter columns:
/// entry f*e^(jw) becomes f_max*(e^(j(w-acos(f/2f_max))) + e^(j(w+acos(...)))).
/// The recomposition equals the input to machine precision.
HybridFactors split_precoder_vector(const Eigen::VectorXcd& v, int n_rf);

/// Alternating least-squares split of a matrix: the digital factor is the
/// scaled orthogonal-Procrustes solution from an SVD, the analog factor takes
/// the phases of target*digital^H. The objective never increases; stops on
/// relative decrease below tol or after max_iter sweeps. When given,
/// objective_trace receives the objective after every sweep.
HybridFactors pe_altmin(const Eigen::MatrixXcd& target, int n_rf,
                        int max_iter, double tol, Rng& rng,
                        std::vector<double>* objective_trace = nullptr);

/// Best residual over several independently initialized runs.
HybridFactors pe_altmin_restarts(const Eigen::MatrixXcd& target, int n_rf,
                                 int max_iter, double tol, Rng& rng,
                                 int restarts);

/// The matrix the hybrid hardware actually applies: analog*digital.
Eigen::MatrixXcd effective_beamformer(const HybridFactors& factors);

}  // namespace hbtrain
