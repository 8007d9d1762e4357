#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hris/bs_rx.hpp"
#include "hris/coding.hpp"
#include "hris/hris_rx.hpp"
#include "hris/identifiability.hpp"
#include "hris/qam.hpp"
#include "hris/scenario.hpp"
#include "hris/synthesis.hpp"

namespace hris {

inline double nmse(const CMatrix& est, const CMatrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw DimensionError("nmse: estimate and reference shapes differ");
  }
  const double ref = truth.squaredNorm();
  if (ref == 0.0) throw Error("nmse: reference matrix is zero");
  return (est - truth).squaredNorm() / ref;
}

/// Theta = G^T (.) H, the LM x N cascaded channel.
inline CMatrix combined_channel(const CMatrix& g, const CMatrix& h) {
  return khatri_rao(g.transpose(), h);
}

/// Symbol error rate over every column but the first (which holds the anchors).
inline double ser(const CMatrix& x_hat, const CMatrix& x_true, const QamConstellation& qam) {
  if (x_hat.rows() != x_true.rows() || x_hat.cols() != x_true.cols()) {
    throw DimensionError("ser: estimate and reference shapes differ");
  }
  const Index count = x_true.rows() * (x_true.cols() - 1);
  if (count <= 0) return 0.0;
  Index errors = 0;
  for (Index t = 1; t < x_true.cols(); ++t) {
    for (Index r = 0; r < x_true.rows(); ++r) {
      if (qam.decide(x_hat(r, t)) != qam.decide(x_true(r, t))) ++errors;
    }
  }
  return static_cast<double>(errors) / static_cast<double>(count);
}

struct TrialOptions {
  bool noiseless = false;
};

/// Outcome of one Monte Carlo run. Failed runs carry no metrics.
struct TrialResult {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  double nmse_g = 0.0, nmse_h = 0.0, nmse_theta = 0.0;
  double ser_hris = 0.0, ser_bs = 0.0;
  int iters_hris = 0, iters_bs = 0;
  std::vector<double> residual_hris, residual_bs;
};

namespace detail {

inline EstimateReport run_hris_receiver(Receiver r, const Tensor3& y_rc, const CodingSet& coding,
                                        const BalsOptions& opts) {
  switch (r) {
    case Receiver::bals: return hris_bals(y_rc, coding, opts);
    case Receiver::kronf: return hris_kronf(y_rc, coding);
    case Receiver::krf: return hris_krf(y_rc, coding);
    default: throw ConfigError("BS-H is not an HRIS receiver");
  }
}

inline EstimateReport run_bs_receiver(Receiver r, const Tensor3& y_bs,
                                      const ControlLinkPayload& payload, const CodingSet& coding,
                                      const BalsOptions& opts) {
  switch (r) {
    case Receiver::bals: return bs_bals(y_bs, payload, coding, opts);
    case Receiver::kronf: return bs_kronf(y_bs, payload, coding);
    case Receiver::h: return bs_h(y_bs, payload, coding);
    default: throw ConfigError("KRF is not a BS receiver");
  }
}

inline void require_identifiable(const ScenarioConfig& cfg, const ReceiverPair& pair) {
  const IdentReport rep = check_identifiability(cfg, pair);
  if (!rep.satisfied) {
    throw IdentifiabilityError("pair " + pair.name() + " needs K >= " +
                               std::to_string(rep.min_K) + ", got K = " + std::to_string(cfg.K));
  }
}

}  // namespace detail

/// Full pipeline for one seed. Draw order from the trial rng: channels,
/// symbols, HRIS noise, BS noise, HRIS init seed, BS init seed. Received
/// tensors are divided by sqrt(Pt) so estimates live on the unit-energy scale.
inline TrialResult run_trial(const ScenarioConfig& cfg, const ReceiverPair& pair,
                             std::uint64_t seed, const TrialOptions& opts = {}) {
  cfg.validate();
  detail::require_identifiable(cfg, pair);
  const CodingSet coding = design_coding(cfg);
  const QamConstellation qam(cfg.constellation);

  Rng rng(seed);
  const ChannelRealization ch = draw_channels(cfg, rng);
  const SymbolMatrix sym = gen_symbols(cfg, rng);
  const CMatrix x_tx = transmit_symbols(cfg, sym.x);
  const double noise = opts.noiseless ? 0.0 : cfg.noise_power();
  const cplx unscale = 1.0 / std::sqrt(cfg.transmit_power());
  const Tensor3 y_rc = add_noise(synth_yrc_noiseless(ch, coding, x_tx), noise, rng) * unscale;
  const Tensor3 y_bs = add_noise(synth_ybs_noiseless(ch, coding, x_tx), noise, rng) * unscale;
  const std::uint64_t hris_seed = rng();
  const std::uint64_t bs_seed = rng();

  TrialResult res;
  res.seed = seed;
  try {
    const EstimateReport hr = detail::run_hris_receiver(
        pair.hris, y_rc, coding, BalsOptions::from_config(cfg, hris_seed));
    ControlLinkPayload payload{hr.g_hat, std::nullopt, pair.scenario()};
    if (pair.scenario() == 2) payload.x_hat = hr.x_hat;
    const EstimateReport br = detail::run_bs_receiver(pair.bs, y_bs, payload, coding,
                                                      BalsOptions::from_config(cfg, bs_seed));
    res.nmse_g = nmse(hr.g_hat, ch.G);
    res.nmse_h = nmse(br.h_hat, ch.H);
    res.nmse_theta = nmse(combined_channel(hr.g_hat, br.h_hat), combined_channel(ch.G, ch.H));
    res.ser_hris = ser(hr.x_hat, sym.x, qam);
    res.ser_bs = ser(br.x_hat, sym.x, qam);
    res.iters_hris = hr.iterations;
    res.iters_bs = br.iterations;
    res.residual_hris = hr.residual_trace;
    res.residual_bs = br.residual_trace;
  } catch (const AmbiguityError& e) {
    res.failed = true;
    res.failure = e.what();
  } catch (const RankDeficiencyError& e) {
    res.failed = true;
    res.failure = e.what();
  }
  return res;
}

/// Runs trials 0..count-1 (seed derive_seed(base_seed, i)) on a thread pool;
/// results come back in trial order regardless of scheduling.
inline std::vector<TrialResult> run_trials(const ScenarioConfig& cfg, const ReceiverPair& pair,
                                           std::size_t count, std::uint64_t base_seed,
                                           unsigned threads = 0, const TrialOptions& opts = {}) {
  cfg.validate();
  detail::require_identifiable(cfg, pair);
  std::vector<TrialResult> results(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned id) {
    try {
      for (std::size_t i = next++; i < count; i = next++) {
        results[i] = run_trial(cfg, pair, derive_seed(base_seed, i), opts);
      }
    } catch (...) {
      errors[id] = std::current_exception();
      next = count;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned id = 0; id < threads; ++id) pool.emplace_back(worker, id);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

enum class SweepVar { pt, rho };

inline std::string_view to_string(SweepVar v) { return v == SweepVar::pt ? "pt" : "rho"; }

inline SweepVar parse_sweep_var(std::string_view s) {
  if (s == "pt") return SweepVar::pt;
  if (s == "rho") return SweepVar::rho;
  throw ConfigError("unknown sweep variable '" + std::string(s) + "' (expected pt or rho)");
}

/// Mean and standard error of one metric over the successful trials.
struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsRecord {
  SweepVar sweep_var = SweepVar::pt;
  double value = 0.0;
  Stat nmse_g, nmse_h, nmse_theta, ser_hris, ser_bs, iters_hris, iters_bs;
  std::size_t trials = 0;
  std::size_t failures = 0;
};

namespace detail {

template <typename Get>
Stat summarize(std::span<const TrialResult> results, Get get) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.failed) continue;
    sum += get(r);
    ++n;
  }
  Stat s;
  if (n == 0) return s;
  s.mean = sum / static_cast<double>(n);
  if (n < 2) {
    s.se = 0.0;
    return s;
  }
  double ss = 0.0;
  for (const auto& r : results) {
    if (!r.failed) ss += (get(r) - s.mean) * (get(r) - s.mean);
  }
  s.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  return s;
}

}  // namespace detail

/// Averages over successful trials; failures are counted, not averaged.
inline MetricsRecord aggregate(std::span<const TrialResult> results) {
  MetricsRecord m;
  m.trials = results.size();
  m.failures = static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const TrialResult& r) { return r.failed; }));
  m.nmse_g = detail::summarize(results, [](const TrialResult& r) { return r.nmse_g; });
  m.nmse_h = detail::summarize(results, [](const TrialResult& r) { return r.nmse_h; });
  m.nmse_theta = detail::summarize(results, [](const TrialResult& r) { return r.nmse_theta; });
  m.ser_hris = detail::summarize(results, [](const TrialResult& r) { return r.ser_hris; });
  m.ser_bs = detail::summarize(results, [](const TrialResult& r) { return r.ser_bs; });
  m.iters_hris = detail::summarize(results, [](const TrialResult& r) { return double(r.iters_hris); });
  m.iters_bs = detail::summarize(results, [](const TrialResult& r) { return double(r.iters_bs); });
  return m;
}

inline ScenarioConfig at_sweep_point(ScenarioConfig cfg, SweepVar var, double value) {
  if (var == SweepVar::pt) {
    cfg.Pt_dBm = value;
  } else {
    cfg.rho = value;
  }
  return cfg;
}

/// One record per sweep point. Every point reuses the same trial seeds.
inline std::vector<MetricsRecord> run_sweep(const ScenarioConfig& cfg, const ReceiverPair& pair,
                                            SweepVar var, const std::vector<double>& values,
                                            std::size_t trials, std::uint64_t base_seed,
                                            unsigned threads = 0, const TrialOptions& opts = {}) {
  if (values.empty()) throw ConfigError("sweep needs at least one point");
  if (trials == 0) throw ConfigError("sweep needs at least one trial");
  std::vector<MetricsRecord> out;
  for (double v : values) {
    const ScenarioConfig point = at_sweep_point(cfg, var, v);
    const auto results = run_trials(point, pair, trials, base_seed, threads, opts);
    MetricsRecord m = aggregate(results);
    m.sweep_var = var;
    m.value = v;
    out.push_back(m);
  }
  return out;
}

inline constexpr std::string_view csv_header =
    "sweep_var,value,nmse_g,nmse_h,nmse_theta,ser_hris,ser_bs,iters_hris,iters_bs,trials,failures";

inline std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv(std::ostream& out, std::span<const MetricsRecord> records) {
  out << csv_header << '\n';
  for (const auto& m : records) {
    out << to_string(m.sweep_var) << ',' << format_g9(m.value) << ',' << format_g9(m.nmse_g.mean)
        << ',' << format_g9(m.nmse_h.mean) << ',' << format_g9(m.nmse_theta.mean) << ','
        << format_g9(m.ser_hris.mean) << ',' << format_g9(m.ser_bs.mean) << ','
        << format_g9(m.iters_hris.mean) << ',' << format_g9(m.iters_bs.mean) << ',' << m.trials
        << ',' << m.failures << '\n';
  }
}

}  // namespace hris
