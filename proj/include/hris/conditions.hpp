#pragma once

// Closed-form identifiability thresholds, complexity counts and feedback
// costs of every receiver. Nothing here touches a realization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "hris/coding.hpp"
#include "hris/errors.hpp"
#include "hris/scenario.hpp"

namespace hris {

enum class Receiver { bals, kronf, krf, h };
enum class Entity { hris, bs };

inline std::string_view to_string(Receiver r) {
  switch (r) {
    case Receiver::bals: return "bals";
    case Receiver::kronf: return "kronf";
    case Receiver::krf: return "krf";
    default: return "h";
  }
}

inline std::string_view to_string(Entity e) { return e == Entity::hris ? "hris" : "bs"; }

inline Receiver parse_receiver(std::string_view s) {
  if (s == "bals") return Receiver::bals;
  if (s == "kronf") return Receiver::kronf;
  if (s == "krf") return Receiver::krf;
  if (s == "h") return Receiver::h;
  throw ConfigError("unknown receiver '" + std::string(s) + "' (expected bals, kronf, krf or h)");
}

/// True for the ten (receiver, entity, scheme) rows that exist.
inline bool valid_row(Receiver r, Entity e, Scheme s) {
  if (e == Entity::hris) {
    if (r == Receiver::bals) return true;
    if (r == Receiver::kronf) return s == Scheme::tstc;
    if (r == Receiver::krf) return s == Scheme::krstc;
    return false;
  }
  return r == Receiver::bals || r == Receiver::kronf || r == Receiver::h;
}

namespace detail {

inline void require_row(Receiver r, Entity e, Scheme s) {
  if (!valid_row(r, e, s)) {
    throw ConfigError("no receiver '" + std::string(to_string(r)) + "' at the " +
                      std::string(to_string(e)) + " for " + std::string(to_string(s)));
  }
}

inline Index ceil_div(Index num, Index den) { return (num + den - 1) / den; }

}  // namespace detail

/// Smallest K admitted by the closed-form row condition.
inline Index min_subframes(const ScenarioConfig& cfg, Receiver r, Entity e, Scheme s) {
  using detail::ceil_div;
  detail::require_row(r, e, s);
  const Index M = cfg.M, N = cfg.N, Nc = cfg.Nc, L = cfg.L, T = cfg.T;
  const Index R = s == Scheme::krstc ? L : cfg.R;
  if (r == Receiver::h) return ceil_div(N, T);
  if (e == Entity::hris) {
    if (r == Receiver::bals) {
      // ceil((1/Nc) max{R, LN/T}) with the max taken over exact rationals
      return ceil_div(std::max(R * T, L * N), T * Nc);
    }
    return r == Receiver::kronf ? ceil_div(L * R * N, Nc) : ceil_div(L * N, Nc);
  }
  if (r == Receiver::bals) return std::max(ceil_div(R, M), ceil_div(N, T));
  return R * N;
}

/// Per-run operation count; BALS rows are per iteration times `iterations`.
inline double flops_estimate(const ScenarioConfig& cfg, Receiver r, Entity e, Scheme s,
                             int iterations = 1) {
  detail::require_row(r, e, s);
  const double M = static_cast<double>(cfg.M), N = static_cast<double>(cfg.N),
               Nc = static_cast<double>(cfg.Nc), L = static_cast<double>(cfg.L),
               T = static_cast<double>(cfg.T), K = static_cast<double>(cfg.K);
  const double R = s == Scheme::krstc ? L : static_cast<double>(cfg.R);
  if (r == Receiver::h) return K * N * N * T;
  if (r == Receiver::bals) {
    double per_iteration = 0.0;
    if (e == Entity::hris) {
      per_iteration = s == Scheme::tstc ? K * Nc * (R * R + L * L * N * N * T)
                                        : L * L * K * Nc * (1.0 + N * N * T);
    } else {
      per_iteration = s == Scheme::tstc ? K * (R * R * M + N * N * T)
                                        : K * (L * L * M + N * N * T);
    }
    return per_iteration * std::max(iterations, 0);
  }
  if (e == Entity::hris) {
    return s == Scheme::tstc ? L * R * N * (L * R * N * K * Nc + T)
                             : L * N * (L * N * K * Nc + T);
  }
  return s == Scheme::tstc ? R * N * (R * N * K + T * M) : L * N * (L * N * K + T * M);
}

/// Control-link cost in bits: Ghat always, Xhat (minus anchors) in scenario 2.
inline std::int64_t feedback_bits(const ScenarioConfig& cfg, int scenario, Scheme s) {
  if (scenario != 1 && scenario != 2) throw ConfigError("control-link scenario must be 1 or 2");
  const std::int64_t channel = static_cast<std::int64_t>(cfg.L) * cfg.N * cfg.eta;
  if (scenario == 1) return channel;
  const auto bits_per_symbol =
      static_cast<std::int64_t>(std::llround(std::log2(static_cast<double>(cfg.constellation))));
  const std::int64_t data_symbols =
      s == Scheme::tstc ? cfg.R * cfg.T - 1 : cfg.L * (cfg.T - 1);
  return data_symbols * bits_per_symbol + channel;
}

/// Rank of the per-sub-frame coding matrices produced by the design
/// (minimum over k); zero when the design is infeasible for cfg.
inline Index coding_slice_rank(const ScenarioConfig& cfg, Scheme s) {
  if (s == Scheme::krstc) return coding_design_feasible(cfg) ? cfg.L : 0;
  if (!is_power_of_two(cfg.K) || cfg.K < cfg.R * cfg.L) return 0;
  const Tensor3 w = design_tstc(cfg);
  Index rank = std::min(cfg.L, cfg.R);
  for (Index k = 0; k < cfg.K; ++k) rank = std::min(rank, numerical_rank(w.slice(k)));
  return rank;
}

/// Conditions under which the receivers recover the factors exactly with
/// the implemented DFT / Hadamard design, assuming generic full-rank G, H, X.
///
/// Sylvester truncation makes every TSTC slice W_k rank one, so sub-frames
/// only ever see one column combination of G and one row combination of X;
/// the bilinear receivers then need as many sub-frames as the closed-form
/// ones at the HRIS, and K > N at the BS. KRSTC sign patterns split the
/// sub-frames in halves, which sets the HRIS-BALS count. The closed-form
/// rows coincide with min_subframes.
inline bool structural_condition(const ScenarioConfig& cfg, Receiver r, Entity e, Scheme s) {
  detail::require_row(r, e, s);
  const Index K = cfg.K, M = cfg.M, N = cfg.N, Nc = cfg.Nc, L = cfg.L, T = cfg.T;
  const Index R = s == Scheme::krstc ? L : cfg.R;
  const Index omega = coding_slice_rank(cfg, s);
  if (omega == 0) return false;
  const Index kappa_g = std::min(N, L);
  const Index kappa_h = std::min(M, N);
  const Index kappa_x = std::min(R, T);

  if (r == Receiver::kronf) return e == Entity::hris ? K * Nc >= L * R * N : K >= R * N;
  if (r == Receiver::krf) return K * Nc >= L * N;
  if (r == Receiver::h) return K * std::min({kappa_g, omega, kappa_x}) >= N;
  if (s == Scheme::krstc) {
    if (e == Entity::hris) return K * Nc >= std::min<Index>(L, 2) * N;
    return (T == 1 && L > 1) ? K > N : K >= N;
  }
  if (omega == 1) {
    if (e == Entity::hris) return K * Nc >= L * R * N;
    return R == 1 ? K >= N : K > N;
  }
  // full-rank coding slices: plain rank counting on the two LS factors
  if (e == Entity::hris) {
    return K * std::min({Nc, kappa_g, omega}) >= R && K * Nc * std::min(omega, kappa_x) >= L * N;
  }
  return K * std::min({kappa_g, omega, kappa_x}) >= N && K * std::min({kappa_h, kappa_g, omega}) >= R;
}

}  // namespace hris
