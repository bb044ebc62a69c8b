#include "hbtrain/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "hbtrain/errors.hpp"
#include "hbtrain/estimator.hpp"
#include "hbtrain/evaluation.hpp"
#include "hbtrain/hybrid.hpp"
#include "hbtrain/model.hpp"
#include "hbtrain/training.hpp"

namespace hbtrain {

namespace {

struct Reporter {
  std::ostream& out;
  bool all_ok = true;

  void check(const std::string& name, double residual, double limit) {
    const bool ok = residual < limit;
    all_ok = all_ok && ok;
    out << (ok ? "[ok]   " : "[FAIL] ") << std::left << std::setw(32) << name
        << " residual " << std::scientific << std::setprecision(3) << residual
        << " (limit " << limit << ")\n"
        << std::defaultfloat;
  }
};

SystemConfig toy_config() {
  SystemConfig cfg;
  cfg.n_tx = 4;
  cfg.n_rx = 4;
  cfg.n_rf = 2;
  cfg.q_slots = 8;
  cfg.energy_budget = 16.0;
  cfg.n_streams = 2;
  cfg.seed = 42;
  return cfg;
}

// Random plan over the toy geometry: unit directions, semi-unitary
// combiners, random nonnegative powers.
TrainingPlan random_plan(const EigenBasis& basis, const SystemConfig& cfg,
                         Rng& rng, bool mix_dz) {
  const int m = basis.n_rx();
  TrainingPlan plan;
  const int slots = cfg.q_slots;
  plan.powers.resize(slots);
  for (int q = 0; q < slots; ++q) {
    Eigen::VectorXcd v(basis.n_tx());
    for (int i = 0; i < v.size(); ++i) v[i] = rng.complex_gaussian();
    v.normalize();
    Eigen::MatrixXcd w(m, cfg.n_rf);
    for (int j = 0; j < w.cols(); ++j)
      for (int i = 0; i < m; ++i) w(i, j) = rng.complex_gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(w);
    Eigen::MatrixXcd k =
        qr.householderQ() * Eigen::MatrixXcd::Identity(m, cfg.n_rf);
    if (mix_dz) {
      // Fold arbitrary invertible diagonal and unitary factors into the
      // combiner; the training Gram matrix must not see them.
      Eigen::VectorXd d(cfg.n_rf);
      for (int i = 0; i < cfg.n_rf; ++i) d[i] = 0.25 + 2.0 * rng.uniform();
      Eigen::MatrixXcd z(cfg.n_rf, cfg.n_rf);
      for (int j = 0; j < z.cols(); ++j)
        for (int i = 0; i < z.rows(); ++i) z(i, j) = rng.complex_gaussian();
      Eigen::HouseholderQR<Eigen::MatrixXcd> zqr(z);
      const Eigen::MatrixXcd zu =
          zqr.householderQ() * Eigen::MatrixXcd::Identity(cfg.n_rf, cfg.n_rf);
      k = k * d.asDiagonal() * zu.adjoint();
    }
    plan.precoder_dirs.push_back(v);
    plan.combiners.push_back(k);
    plan.dir_indices.push_back(q + 1);
    plan.powers[q] = 2.0 * rng.uniform();
  }
  plan.q_nz = static_cast<int>((plan.powers.array() > 0.0).count());
  return plan;
}

// Definition-route Gram matrix with an injectable Hermitian-transpose bug in
// the noise covariance blocks.
Eigen::MatrixXcd gamma_definition_with_fault(const TrainingPlan& plan,
                                             const EigenBasis& basis,
                                             double noise_var,
                                             bool skip_hermitianization) {
  if (!skip_hermitianization)
    return gamma_squared_definition(plan, basis, noise_var);
  std::vector<Eigen::VectorXcd> precoders;
  for (int q = 0; q < plan.n_slots(); ++q)
    precoders.push_back(std::sqrt(plan.powers[q]) * plan.precoder_dirs[q]);
  const Eigen::MatrixXcd f =
      stack_measurement_matrix(basis, precoders, plan.combiners);
  const int mn = basis.n_rx() * basis.n_tx();
  Eigen::MatrixXcd gamma2 = Eigen::MatrixXcd::Zero(mn, mn);
  int row = 0;
  for (const auto& w : plan.combiners) {
    const int nrf = static_cast<int>(w.cols());
    const Eigen::MatrixXcd rn_block = noise_var * (w.transpose() * w);
    const auto fq = f.middleRows(row, nrf);
    gamma2.noalias() += fq.adjoint() * rn_block.fullPivLu().solve(fq);
    row += nrf;
  }
  return gamma2;
}

}  // namespace

bool selfcheck(std::ostream& out, SelfcheckFault fault) {
  Reporter rep{out};
  const SystemConfig cfg = toy_config();
  const CorrelationPair corr{exp_correlation(cfg.rho, cfg.n_tx),
                             exp_correlation(cfg.rho, cfg.n_rx)};
  const EigenBasis basis = eigen_basis(corr);
  Rng rng(cfg.seed);

  // Correlation and eigen structure.
  {
    const Eigen::MatrixXcd s = exp_correlation({0.3, 0.4}, 6);
    rep.check("correlation-hermitian",
              (s - s.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::MatrixXcd recon =
        basis.u_tx * basis.lam_tx.asDiagonal() * basis.u_tx.adjoint();
    rep.check("eigen-reconstruction",
              (recon - corr.s_tx).cwiseAbs().maxCoeff(), 1e-9);
    const Eigen::MatrixXcd psi = build_psi(basis);
    rep.check("psi-unitary",
              (psi.adjoint() * psi -
               Eigen::MatrixXcd::Identity(psi.cols(), psi.cols()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }

  // Exact vector split.
  {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXcd v(cfg.n_tx);
      for (int i = 0; i < v.size(); ++i) v[i] = rng.complex_gaussian();
      const HybridFactors hf = split_precoder_vector(v, cfg.n_rf);
      worst = std::max(worst, hf.residual);
    }
    rep.check("vector-split-exact", worst, 1e-10);
  }

  // Alternating split monotonicity.
  {
    double worst_increase = 0.0;
    for (int t = 0; t < 10; ++t) {
      Eigen::MatrixXcd target(cfg.n_rx, cfg.n_rf);
      for (int j = 0; j < target.cols(); ++j)
        for (int i = 0; i < target.rows(); ++i)
          target(i, j) = rng.complex_gaussian();
      std::vector<double> trace;
      pe_altmin(target, cfg.n_rf, 100, 1e-12, rng, &trace);
      for (std::size_t k = 1; k < trace.size(); ++k)
        worst_increase = std::max(worst_increase, trace[k] - trace[k - 1]);
    }
    rep.check("altmin-monotone", worst_increase, 1e-12);
  }

  // Water-filling: budget, stationarity, and a dense-grid cross-check.
  {
    const BlockSpectrum sp = block_spectrum(basis.lam_kron, cfg.n_rf);
    const WaterfillResult wf =
        waterfill(sp, cfg.energy_budget, cfg.noise_var, cfg.tol);
    rep.check("waterfill-budget",
              std::abs(wf.powers.sum() - cfg.energy_budget),
              1e-6 * cfg.energy_budget);
    double kkt = 0.0;
    for (int b = 0; b < sp.n_blocks(); ++b) {
      double g = 0.0;
      for (int k = 0; k < cfg.n_rf; ++k) {
        const double t =
            1.0 / sp.block_eigs[b][k] + wf.powers[b] / cfg.noise_var;
        g += 1.0 / (t * t);
      }
      g /= cfg.noise_var;
      if (wf.powers[b] > 0.0)
        kkt = std::max(kkt, std::abs(g - wf.mu0));
      else
        kkt = std::max(kkt, std::max(0.0, g - wf.mu0));
    }
    rep.check("waterfill-kkt", kkt, 1e-8);

    // Two single-eigenvalue blocks against a brute-force grid.
    BlockSpectrum two;
    two.block_eigs = {Eigen::VectorXd::Constant(1, 4.0),
                      Eigen::VectorXd::Constant(1, 1.0)};
    two.block_traces = Eigen::Vector2d(4.0, 1.0);
    two.sort_perm = {0, 1};
    const WaterfillResult wf2 = waterfill(two, 1.0, 1.0, 1e-12);
    double best = 1e300, best_a = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double a = i * 1e-5;
      const double j = 1.0 / (0.25 + a) + 1.0 / (1.0 + (1.0 - a));
      if (j < best) {
        best = j;
        best_a = a;
      }
    }
    rep.check("waterfill-grid-oracle", std::abs(wf2.powers[0] - best_a),
              1e-4);
  }

  // Gram-matrix equivalence and the combiner-factor independence property.
  {
    double worst = 0.0, worst_tr = 0.0, worst_ones = 0.0;
    for (int t = 0; t < 20; ++t) {
      const TrainingPlan plan = random_plan(basis, cfg, rng, t % 2 == 1);
      const Eigen::MatrixXcd g1 = gamma_definition_with_fault(
          plan, basis, cfg.noise_var,
          fault == SelfcheckFault::skip_hermitianization);
      const Eigen::MatrixXcd g2 =
          gamma_squared_fast(plan, basis, cfg.noise_var);
      worst = std::max(worst, (g1 - g2).cwiseAbs().maxCoeff());

      const Eigen::MatrixXcd upsilon = build_upsilon(plan);
      worst_ones = std::max(
          worst_ones, ((upsilon.adjoint() * upsilon).diagonal().real().array() -
                       1.0)
                          .abs()
                          .maxCoeff());
      const double tr_expected =
          plan.powers.sum() * cfg.n_rf / cfg.noise_var;
      worst_tr =
          std::max(worst_tr, std::abs(g2.real().trace() - tr_expected));
    }
    rep.check("gamma-equivalence", worst, 1e-10);
    rep.check("lemma-diag-ones", worst_ones, 1e-10);
    rep.check("lemma-trace-identity", worst_tr, 1e-9);
  }

  // Designed plans: diagonal Gram matrix, and the sorted-diagonal identity
  // for the truncated-budget design.
  {
    const TrainingPlan plan = design_training(basis, cfg);
    const Eigen::MatrixXcd g =
        gamma_squared_definition(plan, basis, cfg.noise_var);
    Eigen::MatrixXcd offdiag = g;
    offdiag.diagonal().setZero();
    rep.check("design-gamma-diagonal", offdiag.cwiseAbs().maxCoeff(), 1e-10);
    double diag_err = 0.0;
    for (int q = 0; q < plan.n_slots(); ++q) {
      const int blk = plan.dir_indices[q] - 1;
      for (int k = 0; k < cfg.n_rf; ++k)
        diag_err = std::max(
            diag_err, std::abs(g(blk * cfg.n_rf + k, blk * cfg.n_rf + k).real() -
                               plan.powers[q] / cfg.noise_var));
    }
    rep.check("design-gamma-diag-values", diag_err, 1e-10);

    SystemConfig cfg2 = cfg;
    cfg2.q_slots = 3;
    const TrainingPlan trunc = design_training(basis, cfg2);
    const Eigen::MatrixXcd gt =
        gamma_squared_definition(trunc, basis, cfg2.noise_var);
    std::vector<double> diag_nz;
    for (int i = 0; i < gt.rows(); ++i)
      if (std::abs(gt(i, i)) > 1e-12) diag_nz.push_back(gt(i, i).real());
    std::vector<double> expected;
    for (int q = 0; q < trunc.n_slots(); ++q)
      for (int k = 0; k < cfg2.n_rf; ++k)
        if (trunc.powers[q] > 0.0)
          expected.push_back(trunc.powers[q] / cfg2.noise_var);
    std::sort(diag_nz.rbegin(), diag_nz.rend());
    std::sort(expected.rbegin(), expected.rend());
    double err = diag_nz.size() == expected.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(diag_nz.size(), expected.size()); ++i)
      err = std::max(err, std::abs(diag_nz[i] - expected[i]));
    rep.check("truncated-sorted-diag", err, 1e-9);
  }

  // Estimator: the two error-covariance forms agree, and the analytic trace
  // matches a Monte Carlo average.
  {
    const TrainingPlan plan = design_training(basis, cfg);
    Rng r2(cfg.seed + 1);
    const ChannelRealization ch = sample_channel(basis, r2);
    const MeasurementSet meas =
        simulate_training(ch, plan, false, basis, cfg, r2);
    const EstimateResult est = mmse_estimate(meas, basis);
    const Eigen::MatrixXcd gamma =
        meas.f_matrix.adjoint() *
        meas.noise_cov.fullPivLu().solve(meas.f_matrix);
    const Eigen::MatrixXcd alt =
        (basis.lam_kron.cwiseInverse().asDiagonal().toDenseMatrix() + gamma)
            .fullPivLu()
            .solve(Eigen::MatrixXcd::Identity(gamma.rows(), gamma.cols()));
    rep.check("errcov-forms-agree",
              (est.err_cov - alt).cwiseAbs().maxCoeff(), 1e-9);

    const double emp = empirical_mse(cfg, plan, basis, 4000, r2);
    rep.check("empirical-vs-analytic",
              std::abs(emp - est.j_mmse) / est.j_mmse, 0.05);
  }

  return rep.all_ok;
}

}  // namespace hbtrain
