#include "hbtrain/hybrid.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "hbtrain/errors.hpp"

namespace hbtrain {

namespace {

Eigen::MatrixXcd phases_to_unit(const Eigen::MatrixXd& phi) {
  return phi.unaryExpr(
      [](double p) { return std::complex<double>(std::cos(p), std::sin(p)); });
}

}  // namespace

HybridFactors split_precoder_vector(const Eigen::VectorXcd& v, int n_rf) {
  if (n_rf < 2)
    throw InvalidParameterError(
        "insufficient RF chains: the exact split needs n_rf >= 2");
  const int n = static_cast<int>(v.size());
  HybridFactors hf;
  hf.analog = Eigen::MatrixXcd::Ones(n, n_rf);
  hf.digital = Eigen::MatrixXcd::Zero(n_rf, 1);

  const double f_max = v.cwiseAbs().maxCoeff();
  if (f_max == 0.0) {
    hf.residual = 0.0;
    return hf;
  }
  hf.digital(0, 0) = f_max;
  hf.digital(1, 0) = f_max;
  for (int i = 0; i < n; ++i) {
    const double f = std::abs(v[i]);
    const double w = (f > 0.0) ? std::arg(v[i]) : 0.0;
    const double off = std::acos(f / (2.0 * f_max));
    hf.analog(i, 0) = std::polar(1.0, w - off);
    hf.analog(i, 1) = std::polar(1.0, w + off);
  }
  hf.residual = (v - hf.analog * hf.digital).norm();
  return hf;
}

HybridFactors pe_altmin(const Eigen::MatrixXcd& target, int n_rf,
                        int max_iter, double tol, Rng& rng,
                        std::vector<double>* objective_trace) {
  if (objective_trace) objective_trace->clear();
  if (!target.allFinite())
    throw InvalidParameterError("pe_altmin: target has non-finite entries");
  if (max_iter < 1) throw InvalidParameterError("max_iter must be positive");
  const int rows = static_cast<int>(target.rows());
  const int cols = static_cast<int>(target.cols());
  if (cols > n_rf)
    throw InvalidParameterError("pe_altmin: target wider than n_rf");

  Eigen::MatrixXd phi(rows, n_rf);
  for (int j = 0; j < n_rf; ++j)
    for (int i = 0; i < rows; ++i) phi(i, j) = rng.phase();
  Eigen::MatrixXcd analog = phases_to_unit(phi);
  Eigen::MatrixXcd digital = Eigen::MatrixXcd::Zero(n_rf, cols);

  double obj = target.norm();
  for (int it = 0; it < max_iter; ++it) {
    const double obj_start = obj;

    // Digital step: scaled semi-unitary Procrustes solution. For a square
    // digital factor both steps are exact minimizers; for the wide analog
    // case the candidate is kept only if it does not increase the objective.
    const Eigen::MatrixXcd g = analog.adjoint() * target;  // n_rf x cols
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXcd d_dir = svd.matrixU() * svd.matrixV().adjoint();
    const double denom = (analog * d_dir).squaredNorm();
    const double scale =
        denom > 0.0 ? svd.singularValues().sum() / denom : 0.0;
    const Eigen::MatrixXcd d_cand = scale * d_dir;
    const double obj_cand = (target - analog * d_cand).norm();
    if (obj_cand <= obj) {
      digital = d_cand;
      obj = obj_cand;
    }

    // Analog step: phase extraction from target*digital^H; entries whose
    // pivot vanishes keep their previous phase.
    const Eigen::MatrixXcd pivot = target * digital.adjoint();
    Eigen::MatrixXcd analog_cand = analog;
    for (int j = 0; j < n_rf; ++j)
      for (int i = 0; i < rows; ++i)
        if (std::abs(pivot(i, j)) > 0.0)
          analog_cand(i, j) = pivot(i, j) / std::abs(pivot(i, j));
    const double obj_analog = (target - analog_cand * digital).norm();
    if (obj_analog <= obj) {
      analog = analog_cand;
      obj = obj_analog;
    }

    if (objective_trace) objective_trace->push_back(obj);
    if (obj_start - obj <= tol * std::max(obj_start, 1e-300)) break;
  }

  HybridFactors hf;
  hf.analog = std::move(analog);
  hf.digital = std::move(digital);
  hf.residual = (target - hf.analog * hf.digital).norm();
  return hf;
}

HybridFactors pe_altmin_restarts(const Eigen::MatrixXcd& target, int n_rf,
                                 int max_iter, double tol, Rng& rng,
                                 int restarts) {
  if (restarts < 1) throw InvalidParameterError("restarts must be positive");
  HybridFactors best = pe_altmin(target, n_rf, max_iter, tol, rng);
  for (int r = 1; r < restarts; ++r) {
    HybridFactors cand = pe_altmin(target, n_rf, max_iter, tol, rng);
    if (cand.residual < best.residual) best = std::move(cand);
  }
  return best;
}

Eigen::MatrixXcd effective_beamformer(const HybridFactors& factors) {
  return factors.analog * factors.digital;
}

}  // namespace hbtrain
