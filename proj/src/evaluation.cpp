#include "hbtrain/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "hbtrain/errors.hpp"
#include "hbtrain/estimator.hpp"
#include "hbtrain/training.hpp"

namespace hbtrain {

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::energy: return "energy";
    case SweepAxis::slots: return "slots";
    case SweepAxis::rho: return "rho";
    case SweepAxis::rx_antennas: return "rx_antennas";
  }
  return "?";
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::waterfill_fd: return "waterfill-fd";
    case Scheme::waterfill_hybrid: return "waterfill-hybrid";
    case Scheme::equal_fd: return "equal-fd";
    case Scheme::equal_hybrid: return "equal-hybrid";
    case Scheme::perfect_csi: return "perfect-csi";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "energy") return SweepAxis::energy;
  if (s == "slots") return SweepAxis::slots;
  if (s == "rho") return SweepAxis::rho;
  if (s == "rx_antennas") return SweepAxis::rx_antennas;
  throw InvalidParameterError("unknown sweep axis '" + s + "'");
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "waterfill-fd") return Scheme::waterfill_fd;
  if (s == "waterfill-hybrid") return Scheme::waterfill_hybrid;
  if (s == "equal-fd") return Scheme::equal_fd;
  if (s == "equal-hybrid") return Scheme::equal_hybrid;
  if (s == "perfect-csi") return Scheme::perfect_csi;
  throw InvalidParameterError("unknown scheme '" + s + "'");
}

double nmse(const Eigen::MatrixXcd& h_hat, const Eigen::MatrixXcd& h) {
  if (h_hat.rows() != h.rows() || h_hat.cols() != h.cols())
    throw DimensionError("nmse: shape mismatch");
  const double denom = h.squaredNorm();
  if (!(denom > 0.0))
    throw InvalidParameterError("nmse: reference channel has zero norm");
  return (h_hat - h).squaredNorm() / denom;
}

Prelog coherence_prelog(const SystemConfig& cfg, int q_nz) {
  constexpr double kSpeedOfLight = 299792458.0;
  const double f_m = cfg.velocity_mps / kSpeedOfLight * cfg.carrier_hz;
  Prelog p;
  p.t_c = std::sqrt(9.0 / (16.0 * M_PI)) / f_m;
  p.eta = 1.0 - static_cast<double>(q_nz) / (p.t_c * cfg.bandwidth_hz);
  if (p.eta < 0.0) {
    p.eta = 0.0;
    p.clamped = true;
  }
  if (p.eta > 1.0) p.eta = 1.0;
  return p;
}

DataBeamformers design_data_beamformers(const Eigen::MatrixXcd& h_hat,
                                        const SystemConfig& cfg, Rng& rng) {
  const int ns = cfg.n_streams;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      h_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DataBeamformers db;
  const double p_d = static_cast<double>(ns);  // unit power per stream
  db.t_total = svd.matrixV().leftCols(ns) * std::sqrt(p_d / ns);
  db.q_total = svd.matrixU().leftCols(ns);
  const double tiny = 1e-12 * std::max(1.0, svd.singularValues()[0]);
  if ((svd.singularValues().head(ns).array() <= tiny).any())
    db.reduced_rank = true;

  db.t_hybrid = pe_altmin(db.t_total, cfg.n_rf, cfg.altmin_max_iter,
                          cfg.altmin_tol, rng);
  db.q_hybrid = pe_altmin(db.q_total, cfg.n_rf, cfg.altmin_max_iter,
                          cfg.altmin_tol, rng);
  return db;
}

double spectral_efficiency(const Eigen::MatrixXcd& h,
                           const Eigen::MatrixXcd& h_hat,
                           const Eigen::MatrixXcd& t_total,
                           const Eigen::MatrixXcd& q_total,
                           const SystemConfig& cfg, double eta) {
  if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols() ||
      t_total.rows() != h.cols() || q_total.rows() != h.rows() ||
      t_total.cols() != q_total.cols())
    throw DimensionError("spectral_efficiency: shape mismatch");
  const int ns = static_cast<int>(t_total.cols());

  const Eigen::MatrixXcd h_err = h - h_hat;
  const Eigen::MatrixXcd het = h_err * t_total;
  Eigen::MatrixXcd e =
      q_total.adjoint() *
      (het * het.adjoint() +
       cfg.noise_var * Eigen::MatrixXcd::Identity(h.rows(), h.rows())) *
      q_total;
  e += 1e-12 * Eigen::MatrixXcd::Identity(ns, ns);

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(e);
  if (!lu.isInvertible()) return 0.0;

  const Eigen::MatrixXcd ht = h_hat * t_total;
  const Eigen::MatrixXcd signal = q_total.adjoint() * ht * ht.adjoint() *
                                  q_total;
  const Eigen::MatrixXcd inner =
      Eigen::MatrixXcd::Identity(ns, ns) + lu.solve(signal);
  const std::complex<double> det = inner.partialPivLu().determinant();
  const double se = eta * std::log2(std::abs(det));
  return se > 0.0 ? se : 0.0;
}

namespace {

SystemConfig reconfigure(const SystemConfig& base, SweepAxis axis,
                         double value) {
  SystemConfig cfg = base;
  switch (axis) {
    case SweepAxis::energy:
      // Values are E_T / sigma_n^2 in dB.
      cfg.energy_budget = cfg.noise_var * std::pow(10.0, value / 10.0);
      break;
    case SweepAxis::slots:
      cfg.q_slots = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::rho: {
      const double mag = std::abs(base.rho);
      cfg.rho = (mag > 0.0) ? std::complex<double>(base.rho / mag * value)
                            : std::complex<double>(value);
      break;
    }
    case SweepAxis::rx_antennas:
      cfg.n_rx = static_cast<int>(std::lround(value));
      cfg.q_slots = std::min(base.q_slots, cfg.n_rx * cfg.n_tx / cfg.n_rf);
      break;
  }
  cfg.validate();
  return cfg;
}

struct TrialOutput {
  double nmse = 0.0;
  double se = 0.0;
};

// Everything fixed for one (point, scheme) pair.
struct PointContext {
  SystemConfig cfg;
  EigenBasis basis;
  SlotBeamformers slots;
  std::unique_ptr<MmseOperator> op;
  bool hybrid = false;
  bool perfect = false;
  int q_nz = 0;
  double eta = 1.0;
};

TrialOutput run_trial(const PointContext& ctx, Rng& rng) {
  const ChannelRealization ch = sample_channel(ctx.basis, rng);
  TrialOutput out;

  Eigen::MatrixXcd h_hat;
  if (ctx.perfect) {
    h_hat = ch.h;
    out.nmse = 0.0;
  } else {
    const Eigen::VectorXcd y = measure_training(ch, ctx.slots, ctx.cfg, rng);
    h_hat = ctx.op->channel_estimate(y);
    out.nmse = nmse(h_hat, ch.h);
  }

  const DataBeamformers db = design_data_beamformers(h_hat, ctx.cfg, rng);
  const Eigen::MatrixXcd& t =
      ctx.hybrid ? effective_beamformer(db.t_hybrid) : db.t_total;
  const Eigen::MatrixXcd& q =
      ctx.hybrid ? effective_beamformer(db.q_hybrid) : db.q_total;
  out.se = spectral_efficiency(ch.h, h_hat, t, q, ctx.cfg, ctx.eta);
  return out;
}

PointContext make_point_context(const SystemConfig& cfg, Scheme scheme,
                                Rng&& design_rng) {
  PointContext ctx;
  ctx.cfg = cfg;
  CorrelationPair corr{exp_correlation(cfg.rho, cfg.n_tx),
                       exp_correlation(cfg.rho, cfg.n_rx)};
  ctx.basis = eigen_basis(corr);
  ctx.hybrid =
      scheme == Scheme::waterfill_hybrid || scheme == Scheme::equal_hybrid;
  ctx.perfect = scheme == Scheme::perfect_csi;

  if (ctx.perfect) {
    if (cfg.perfect_csi_zero_training) {
      ctx.q_nz = 0;
    } else {
      ctx.q_nz = design_training(ctx.basis, cfg).q_nz;
    }
    ctx.eta = coherence_prelog(cfg, ctx.q_nz).eta;
    return ctx;
  }

  const bool equal =
      scheme == Scheme::equal_fd || scheme == Scheme::equal_hybrid;
  const TrainingPlan plan = equal ? equal_power_plan(ctx.basis, cfg)
                                  : design_training(ctx.basis, cfg);
  ctx.q_nz = plan.q_nz;
  ctx.eta = coherence_prelog(cfg, ctx.q_nz).eta;
  ctx.slots = effective_slots(plan, ctx.hybrid, cfg, design_rng);
  const Eigen::MatrixXcd f = stack_measurement_matrix(
      ctx.basis, ctx.slots.precoders, ctx.slots.combiners);
  int l = 0;
  for (const auto& w : ctx.slots.noise_combiners)
    l += static_cast<int>(w.cols());
  Eigen::MatrixXcd rn = Eigen::MatrixXcd::Zero(l, l);
  int row = 0;
  for (const auto& w : ctx.slots.noise_combiners) {
    const int nrf = static_cast<int>(w.cols());
    rn.block(row, row, nrf, nrf) = cfg.noise_var * (w.adjoint() * w);
    row += nrf;
  }
  ctx.op = std::make_unique<MmseOperator>(f, rn, ctx.basis);
  return ctx;
}

}  // namespace

std::vector<EvaluationRecord> run_sweep(const SystemConfig& base,
                                        SweepAxis axis,
                                        const std::vector<double>& values,
                                        const std::vector<Scheme>& schemes,
                                        int trials, int threads) {
  if (values.empty()) throw InvalidParameterError("sweep values are empty");
  if (trials < 1) throw InvalidParameterError("trials must be positive");
  if (threads < 1) threads = 1;

  const std::uint64_t axis_tag = static_cast<std::uint64_t>(axis) << 16;
  std::vector<EvaluationRecord> records;

  for (std::size_t pi = 0; pi < values.size(); ++pi) {
    for (std::size_t si = 0; si < schemes.size(); ++si) {
      const Scheme scheme = schemes[si];
      EvaluationRecord rec;
      rec.axis = axis;
      rec.sweep_value = values[pi];
      rec.scheme = scheme;
      rec.trials = trials;
      rec.seed = base.seed;
      try {
        const SystemConfig cfg = reconfigure(base, axis, values[pi]);
        const PointContext ctx = make_point_context(
            cfg, scheme,
            Rng::derive(base.seed, axis_tag | pi, 1 + si, 0));
        rec.q_nz = ctx.q_nz;
        rec.eta = ctx.eta;

        std::vector<TrialOutput> out(trials);
        std::atomic<int> next{0};
        std::mutex err_mutex;
        std::exception_ptr err;
        auto worker = [&]() {
          for (;;) {
            const int t = next.fetch_add(1);
            if (t >= trials) return;
            try {
              // Channel and noise seeds do not depend on the scheme, so
              // scheme comparisons are paired across trials.
              Rng rng = Rng::derive(base.seed, axis_tag | pi, 0,
                                    static_cast<std::uint64_t>(t) + 1);
              out[t] = run_trial(ctx, rng);
            } catch (...) {
              std::lock_guard<std::mutex> lock(err_mutex);
              if (!err) err = std::current_exception();
              next.store(trials);
              return;
            }
          }
        };
        if (threads == 1) {
          worker();
        } else {
          std::vector<std::thread> pool;
          for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
          for (auto& th : pool) th.join();
        }
        if (err) std::rethrow_exception(err);

        // Index-ordered reduction keeps float sums thread-count independent.
        double nmse_sum = 0.0, se_sum = 0.0;
        for (int t = 0; t < trials; ++t) {
          nmse_sum += out[t].nmse;
          se_sum += out[t].se;
        }
        rec.nmse = nmse_sum / trials;
        rec.se_bits = se_sum / trials;
      } catch (const std::exception& ex) {
        rec.error = ex.what();
        rec.nmse = std::nan("");
        rec.se_bits = std::nan("");
        rec.q_nz = -1;
        rec.eta = std::nan("");
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<QnzEntry> qnz_profile(const SystemConfig& base,
                                  const std::vector<int>& m_values,
                                  const std::vector<double>& rho_values) {
  std::vector<QnzEntry> table;
  for (int m : m_values) {
    for (double rho : rho_values) {
      SystemConfig cfg = base;
      cfg.n_rx = m;
      const double mag = std::abs(base.rho);
      cfg.rho = (mag > 0.0) ? std::complex<double>(base.rho / mag * rho)
                            : std::complex<double>(rho);
      cfg.q_slots = cfg.max_slots();
      cfg.validate();
      CorrelationPair corr{exp_correlation(cfg.rho, cfg.n_tx),
                           exp_correlation(cfg.rho, cfg.n_rx)};
      const EigenBasis basis = eigen_basis(corr);
      const TrainingPlan plan = design_training(basis, cfg);
      QnzEntry e;
      e.n_rx = m;
      e.rho_mag = rho;
      e.q = cfg.q_slots;
      e.q_nz = plan.q_nz;
      e.ratio = static_cast<double>(plan.q_nz) / cfg.q_slots;
      table.push_back(e);
    }
  }
  return table;
}

}  // namespace hbtrain
