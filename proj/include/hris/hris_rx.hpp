#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hris/coding.hpp"
#include "hris/conditions.hpp"
#include "hris/errors.hpp"
#include "hris/scenario.hpp"
#include "hris/tensor.hpp"

namespace hris {

struct BalsOptions {
  int max_iterations = 200;
  double convergence_tol = 1e-6;  // relative change of the normalized residual
  std::uint64_t init_seed = 0;
  std::optional<CMatrix> x_init;  // overrides the random initialization
  double residual_floor = 1e-24;  // normalized residual treated as an exact fit
  bool resolve_ambiguity = true;

  void validate() const {
    if (max_iterations < 1) throw ConfigError("BalsOptions: max_iterations must be >= 1");
    if (!(convergence_tol > 0.0)) throw ConfigError("BalsOptions: convergence_tol must be > 0");
  }

  static BalsOptions from_config(const ScenarioConfig& cfg, std::uint64_t seed) {
    BalsOptions o;
    o.max_iterations = cfg.bals_max_iterations;
    o.convergence_tol = cfg.bals_tol;
    o.init_seed = seed;
    return o;
  }
};

struct EstimateReport {
  CMatrix g_hat;  // N x L
  CMatrix h_hat;  // M x N (BS receivers only)
  CMatrix x_hat;  // R x T
  int iterations = 0;
  bool converged = true;
  std::vector<double> residual_trace;  // ||Y - Yhat||^2 / ||Y||^2 per iteration
  CVector ambiguity;                   // removed scalar (size 1) or diagonal (size L)
};

// ---------------------------------------------------------------------------
// Least-squares factors

/// Rows [k R Nc, (k+1) R Nc) hold C_k^T kron Phi_k.
inline CMatrix build_Fg(const CodingSet& coding) {
  const Index k_total = coding.subframes();
  const Index nc = coding.rf_chains();
  const Index r = coding.streams();
  CMatrix f(k_total * r * nc, coding.antennas() * coding.elements());
  for (Index k = 0; k < k_total; ++k) {
    f.middleRows(k * r * nc, r * nc) = kron(coding.coding_k(k).transpose(), coding.phi_k(k));
  }
  return f;
}

/// Rows [k Nc, (k+1) Nc) hold Phi_k G C_k.
inline CMatrix build_Fx(const CodingSet& coding, const CMatrix& g_hat) {
  if (g_hat.rows() != coding.elements() || g_hat.cols() != coding.antennas()) {
    throw DimensionError("build_Fx: G has the wrong shape");
  }
  const Index nc = coding.rf_chains();
  CMatrix f(coding.subframes() * nc, coding.streams());
  for (Index k = 0; k < coding.subframes(); ++k) {
    f.middleRows(k * nc, nc) = coding.phi.slice_view(k) * g_hat * coding.coding_k(k);
  }
  return f;
}

/// Rows [k Nc, (k+1) Nc) hold vec(W_k^T)^T kron Phi_k (TSTC, LRN columns) or
/// lambda_k^T kron Phi_k (KRSTC, LN columns).
inline CMatrix build_Fxg(const CodingSet& coding) {
  const Index nc = coding.rf_chains();
  const Index n = coding.elements();
  const Index width = coding.scheme == Scheme::tstc ? coding.antennas() * coding.streams()
                                                    : coding.antennas();
  CMatrix f(coding.subframes() * nc, width * n);
  for (Index k = 0; k < coding.subframes(); ++k) {
    const CMatrix row = coding.scheme == Scheme::tstc
                            ? vec(coding.w.slice(k).transpose()).transpose()
                            : CMatrix(coding.lambda.row(k));
    f.middleRows(k * nc, nc) = kron(row, coding.phi_k(k));
  }
  return f;
}

namespace detail {

struct HrisDims {
  Index N, Nc, L, R, T, K;
};

inline HrisDims hris_dims(const Tensor3& y_rc, const CodingSet& coding) {
  const auto& d = y_rc.dims();
  if (d.i1 != coding.rf_chains() || d.i3 != coding.subframes()) {
    throw DimensionError("sensed tensor is " + std::to_string(d.i1) + "x" +
                         std::to_string(d.i2) + "x" + std::to_string(d.i3) +
                         ", coding expects Nc=" + std::to_string(coding.rf_chains()) +
                         " and K=" + std::to_string(coding.subframes()));
  }
  return {coding.elements(), d.i1, coding.antennas(), coding.streams(), d.i2, d.i3};
}

inline ScenarioConfig dims_config(Scheme scheme, Index M, Index N, Index Nc, Index L, Index R,
                                  Index T, Index K) {
  ScenarioConfig c;
  c.scheme = scheme;
  c.M = M;
  c.N = N;
  c.Nc = Nc;
  c.L = L;
  c.R = R;
  c.T = T;
  c.K = K;
  return c;
}

inline void precheck(const ScenarioConfig& c, Receiver r, Entity e) {
  const Index need = min_subframes(c, r, e, c.scheme);
  if (c.K < need) {
    throw IdentifiabilityError(std::string(to_string(r)) + " at the " +
                               std::string(to_string(e)) + " needs K >= " +
                               std::to_string(need) + ", got K = " + std::to_string(c.K));
  }
}

/// Anchors closer to zero than this (relative to the largest entry) are rejected.
inline void check_anchor(cplx a, const CMatrix& x) {
  const double scale = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !(std::abs(a) > 1e-12 * scale) ||
      scale == 0.0) {
    throw AmbiguityError("anchor symbol vanished; scaling ambiguity cannot be removed");
  }
}

/// Stops on a small relative change or on an exact fit.
inline bool bals_converged(const std::vector<double>& trace, const BalsOptions& opts) {
  const double e = trace.back();
  if (e <= opts.residual_floor) return true;
  if (trace.size() < 2) return false;
  const double prev = trace[trace.size() - 2];
  return std::abs(e - prev) <= opts.convergence_tol * prev;
}

inline CMatrix initial_symbols(Index r, Index t, const BalsOptions& opts) {
  if (opts.x_init) {
    if (opts.x_init->rows() != r || opts.x_init->cols() != t) {
      throw DimensionError("BalsOptions::x_init has the wrong shape");
    }
    return *opts.x_init;
  }
  Rng rng(opts.init_seed);
  return complex_gaussian(r, t, 1.0, rng);
}

}  // namespace detail

/// TSTC: X <- X / X(0,0), G <- G X(0,0). KRSTC: X <- D^-1 X, G <- G D with D = diag(X(:,0)).
inline EstimateReport remove_ambiguity_hris(EstimateReport report, Scheme scheme) {
  CMatrix& x = report.x_hat;
  if (x.size() == 0) throw AmbiguityError("remove_ambiguity_hris: empty symbol estimate");
  if (scheme == Scheme::tstc) {
    const cplx alpha = x(0, 0);
    detail::check_anchor(alpha, x);
    x /= alpha;
    x(0, 0) = 1.0;
    report.g_hat *= alpha;
    report.ambiguity = CVector::Constant(1, alpha);
  } else {
    const CVector delta = x.col(0);
    for (Index l = 0; l < delta.size(); ++l) detail::check_anchor(delta(l), x);
    for (Index l = 0; l < delta.size(); ++l) {
      x.row(l) /= delta(l);
      x(l, 0) = 1.0;
      report.g_hat.col(l) *= delta(l);
    }
    report.ambiguity = delta;
  }
  return report;
}

/// Bilinear alternating least squares on the sensed tensor (both schemes).
inline EstimateReport hris_bals(const Tensor3& y_rc, const CodingSet& coding,
                                const BalsOptions& opts = {}) {
  opts.validate();
  const auto d = detail::hris_dims(y_rc, coding);
  detail::precheck(detail::dims_config(coding.scheme, 1, d.N, d.Nc, d.L, d.R, d.T, d.K),
                   Receiver::bals, Entity::hris);

  const Eigen::Map<const CVector> y_vec(y_rc.data().data(), y_rc.size());
  const CMatrix y_stack = unfold(y_rc, 2).transpose();  // K Nc x T, slices stacked
  const double energy = y_rc.squared_norm() > 0.0 ? y_rc.squared_norm() : 1.0;

  EstimateReport rep;
  rep.x_hat = detail::initial_symbols(d.R, d.T, opts);
  rep.converged = false;
  CMatrix g_system(d.K * d.Nc * d.T, d.L * d.N);
  for (int it = 0; it < opts.max_iterations; ++it) {
    for (Index k = 0; k < d.K; ++k) {
      const CMatrix cx = coding.coding_k(k) * rep.x_hat;
      g_system.middleRows(k * d.Nc * d.T, d.Nc * d.T) = kron(cx.transpose(), coding.phi_k(k));
    }
    rep.g_hat = unvec(pinv(g_system) * y_vec, d.N, d.L);
    const CMatrix fx = build_Fx(coding, rep.g_hat);
    rep.x_hat = pinv(fx) * y_stack;
    rep.residual_trace.push_back((y_stack - fx * rep.x_hat).squaredNorm() / energy);
    rep.iterations = it + 1;
    if (detail::bals_converged(rep.residual_trace, opts)) {
      rep.converged = true;
      break;
    }
  }
  return opts.resolve_ambiguity ? remove_ambiguity_hris(std::move(rep), coding.scheme) : rep;
}

/// Least-squares estimate of G kron X^T (NT x LR) from the sensed tensor (TSTC).
inline CMatrix estimate_q_kronf(const Tensor3& y_rc, const CodingSet& coding) {
  if (coding.scheme != Scheme::tstc) throw ConfigError("KronF at the HRIS needs TSTC coding");
  const auto d = detail::hris_dims(y_rc, coding);
  const CMatrix f = build_Fxg(coding);
  if (numerical_rank(f) < f.cols()) {
    throw RankDeficiencyError("KronF: sensing/coding factor lacks full column rank");
  }
  const CMatrix q_tilde = unfold(y_rc, 2) * pinv(f).transpose();  // T x LRN
  return unvec(vec(q_tilde), d.N * d.T, d.L * d.R);
}

/// Rearranges the NT x LR Kronecker estimate into the RT x LN rank-1 matrix vec(X^T) vec(G)^T.
inline CMatrix rearrange_kronf(const CMatrix& q_hat, Index n, Index l, Index r, Index t) {
  CMatrix q_bar(r * t, l * n);
  for (Index ll = 0; ll < l; ++ll) {
    for (Index nn = 0; nn < n; ++nn) {
      q_bar.col(nn + n * ll) = vec(q_hat.block(nn * t, ll * r, t, r));
    }
  }
  return q_bar;
}

/// Closed-form Kronecker factorization receiver (TSTC).
inline EstimateReport hris_kronf(const Tensor3& y_rc, const CodingSet& coding,
                                 bool resolve_ambiguity = true) {
  const auto d = detail::hris_dims(y_rc, coding);
  detail::precheck(detail::dims_config(coding.scheme, 1, d.N, d.Nc, d.L, d.R, d.T, d.K),
                   Receiver::kronf, Entity::hris);
  const CMatrix q_bar = rearrange_kronf(estimate_q_kronf(y_rc, coding), d.N, d.L, d.R, d.T);
  const Rank1 f = rank1_approx(q_bar);
  const double s = std::sqrt(f.sigma);
  EstimateReport rep;
  rep.x_hat = unvec(s * f.u, d.T, d.R).transpose();
  rep.g_hat = unvec(s * f.v.conjugate(), d.N, d.L);
  return resolve_ambiguity ? remove_ambiguity_hris(std::move(rep), coding.scheme) : rep;
}

/// Least-squares estimate of the NT x L Khatri-Rao factor (KRSTC); column l
/// reshaped to T x N equals x_l g_l^T.
inline CMatrix estimate_q_krf(const Tensor3& y_rc, const CodingSet& coding) {
  if (coding.scheme != Scheme::krstc) throw ConfigError("KRF at the HRIS needs KRSTC coding");
  const auto d = detail::hris_dims(y_rc, coding);
  const CMatrix f = build_Fxg(coding);
  if (numerical_rank(f) < f.cols()) {
    throw RankDeficiencyError("KRF: sensing/coding factor lacks full column rank");
  }
  const CMatrix q_tilde = unfold(y_rc, 2) * pinv(f).transpose();  // T x LN
  return unvec(vec(q_tilde), d.N * d.T, d.L);
}

/// Closed-form Khatri-Rao factorization receiver (KRSTC): one rank-1 problem per antenna.
inline EstimateReport hris_krf(const Tensor3& y_rc, const CodingSet& coding,
                               bool resolve_ambiguity = true) {
  const auto d = detail::hris_dims(y_rc, coding);
  detail::precheck(detail::dims_config(coding.scheme, 1, d.N, d.Nc, d.L, d.R, d.T, d.K),
                   Receiver::krf, Entity::hris);
  const CMatrix q_hat = estimate_q_krf(y_rc, coding);
  EstimateReport rep;
  rep.x_hat.resize(d.L, d.T);
  rep.g_hat.resize(d.N, d.L);
  for (Index l = 0; l < d.L; ++l) {
    const Rank1 f = rank1_approx(unvec(q_hat.col(l), d.T, d.N));
    const double s = std::sqrt(f.sigma);
    rep.x_hat.row(l) = (s * f.u).transpose();
    rep.g_hat.col(l) = s * f.v.conjugate();
  }
  return resolve_ambiguity ? remove_ambiguity_hris(std::move(rep), coding.scheme) : rep;
}

}  // namespace hris
