#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "hris/coding.hpp"
#include "hris/conditions.hpp"
#include "hris/errors.hpp"
#include "hris/hris_rx.hpp"
#include "hris/tensor.hpp"

namespace hris {

/// What the HRIS controller forwards to the BS. Scenario 2 adds the symbols.
struct ControlLinkPayload {
  CMatrix g_hat;
  std::optional<CMatrix> x_hat;
  int scenario_id = 1;

  void validate() const {
    if (scenario_id != 1 && scenario_id != 2) throw ConfigError("payload scenario must be 1 or 2");
    if (scenario_id == 2 && !x_hat) throw ConfigError("scenario-2 payload carries no symbols");
    if (g_hat.size() == 0) throw ConfigError("payload carries no channel estimate");
  }
};

/// N x KR: [diag(psi_1) G C_1, ..., diag(psi_K) G C_K].
inline CMatrix build_Eh(const CodingSet& coding, const CMatrix& g_hat) {
  if (g_hat.rows() != coding.elements() || g_hat.cols() != coding.antennas()) {
    throw DimensionError("build_Eh: G has the wrong shape");
  }
  const Index r = coding.streams();
  CMatrix e(coding.elements(), coding.subframes() * r);
  for (Index k = 0; k < coding.subframes(); ++k) {
    e.middleCols(k * r, r) = coding.psi_k(k).asDiagonal() * g_hat * coding.coding_k(k);
  }
  return e;
}

/// KN x R: the blocks of build_Eh stacked vertically.
inline CMatrix build_Ex(const CodingSet& coding, const CMatrix& g_hat) {
  if (g_hat.rows() != coding.elements() || g_hat.cols() != coding.antennas()) {
    throw DimensionError("build_Ex: G has the wrong shape");
  }
  const Index n = coding.elements();
  CMatrix e(coding.subframes() * n, coding.streams());
  for (Index k = 0; k < coding.subframes(); ++k) {
    e.middleRows(k * n, n) = coding.psi_k(k).asDiagonal() * g_hat * coding.coding_k(k);
  }
  return e;
}

/// TSTC: RN x KLN, block k = W_k^T kron diag(psi_k). KRSTC: LN x K, Lambda^T (.) Psi^T.
inline CMatrix build_Exh(const CodingSet& coding) {
  const Index n = coding.elements();
  const Index l = coding.antennas();
  if (coding.scheme == Scheme::krstc) {
    return khatri_rao(coding.lambda.transpose(), coding.psi.transpose());
  }
  const Index r = coding.streams();
  CMatrix e(r * n, coding.subframes() * l * n);
  for (Index k = 0; k < coding.subframes(); ++k) {
    e.middleCols(k * l * n, l * n) =
        kron(coding.w.slice(k).transpose(), CMatrix(coding.psi_k(k).asDiagonal()));
  }
  return e;
}

/// RN x K (LN x K for KRSTC) factor whose column k is vec(diag(psi_k) G C_k).
inline CMatrix build_kronf_bs_factor(const CodingSet& coding, const CMatrix& g_hat) {
  const CMatrix exh = build_Exh(coding);
  const CMatrix g = vec(g_hat);
  if (coding.scheme == Scheme::krstc) return g.reshaped().asDiagonal() * exh;
  const Index ln = g.rows();
  CMatrix b(exh.rows(), coding.subframes());
  for (Index k = 0; k < coding.subframes(); ++k) b.col(k) = exh.middleCols(k * ln, ln) * g;
  return b;
}

namespace detail {

struct BsDims {
  Index M, N, L, R, T, K;
};

inline BsDims bs_dims(const Tensor3& y_bs, const CodingSet& coding, const CMatrix& g_hat) {
  const auto& d = y_bs.dims();
  if (d.i3 != coding.subframes()) {
    throw DimensionError("reflected tensor has " + std::to_string(d.i3) +
                         " sub-frames, coding has " + std::to_string(coding.subframes()));
  }
  if (g_hat.rows() != coding.elements() || g_hat.cols() != coding.antennas()) {
    throw DimensionError("fed-back G must be " + std::to_string(coding.elements()) + "x" +
                         std::to_string(coding.antennas()));
  }
  return {d.i1, coding.elements(), coding.antennas(), coding.streams(), d.i2, d.i3};
}

inline ScenarioConfig bs_config(const CodingSet& coding, const BsDims& d) {
  return dims_config(coding.scheme, d.M, d.N, coding.rf_chains(), d.L, d.R, d.T, d.K);
}

}  // namespace detail

/// BS ambiguity is one scalar beta. TSTC: beta = X(0,0). KRSTC: each row is
/// divided by its first entry and beta is the mean of the first column.
inline EstimateReport remove_ambiguity_bs(EstimateReport report, Scheme scheme) {
  CMatrix& x = report.x_hat;
  if (x.size() == 0) throw AmbiguityError("remove_ambiguity_bs: empty symbol estimate");
  cplx beta;
  if (scheme == Scheme::tstc) {
    beta = x(0, 0);
    detail::check_anchor(beta, x);
    x /= beta;
  } else {
    for (Index r = 0; r < x.rows(); ++r) detail::check_anchor(x(r, 0), x);
    beta = x.col(0).mean();
    for (Index r = 0; r < x.rows(); ++r) x.row(r) /= x(r, 0);
  }
  x.col(0).head(scheme == Scheme::tstc ? 1 : x.rows()).setOnes();
  report.h_hat *= beta;
  report.ambiguity = CVector::Constant(1, beta);
  return report;
}

/// N x KT right factor [diag(psi_k) G C_k X]_k of the mode-1 unfolding.
inline CMatrix build_h_factor(const CodingSet& coding, const CMatrix& g_hat, const CMatrix& x_hat) {
  const CMatrix eh = build_Eh(coding, g_hat);
  const Index r = coding.streams();
  const Index t = x_hat.cols();
  CMatrix right(coding.elements(), coding.subframes() * t);
  for (Index k = 0; k < coding.subframes(); ++k) {
    right.middleCols(k * t, t) = eh.middleCols(k * r, r) * x_hat;
  }
  return right;
}

/// One least-squares H update with G and X held fixed.
inline CMatrix bs_h_step(const Tensor3& y_bs, const CodingSet& coding, const CMatrix& g_hat,
                         const CMatrix& x_hat) {
  return unfold(y_bs, 1) * pinv(build_h_factor(coding, g_hat, x_hat));
}

/// Alternating H / X least squares at the BS with G fed back.
inline EstimateReport bs_bals(const Tensor3& y_bs, const ControlLinkPayload& payload,
                              const CodingSet& coding, const BalsOptions& opts = {}) {
  opts.validate();
  payload.validate();
  const auto d = detail::bs_dims(y_bs, coding, payload.g_hat);
  detail::precheck(detail::bs_config(coding, d), Receiver::bals, Entity::bs);
  if (payload.x_hat && (payload.x_hat->rows() != d.R || payload.x_hat->cols() != d.T)) {
    throw DimensionError("fed-back X has the wrong shape");
  }

  const CMatrix y_stack = unfold(y_bs, 2).transpose();  // K M x T
  const double energy = y_bs.squared_norm() > 0.0 ? y_bs.squared_norm() : 1.0;
  const CMatrix ex = build_Ex(coding, payload.g_hat);

  EstimateReport rep;
  rep.g_hat = payload.g_hat;
  rep.x_hat = detail::initial_symbols(d.R, d.T, opts);
  rep.converged = false;
  CMatrix ax(d.K * d.M, d.R);
  for (int it = 0; it < opts.max_iterations; ++it) {
    rep.h_hat = bs_h_step(y_bs, coding, payload.g_hat, rep.x_hat);
    for (Index k = 0; k < d.K; ++k) {
      ax.middleRows(k * d.M, d.M) = rep.h_hat * ex.middleRows(k * d.N, d.N);
    }
    rep.x_hat = pinv(ax) * y_stack;
    rep.residual_trace.push_back((y_stack - ax * rep.x_hat).squaredNorm() / energy);
    rep.iterations = it + 1;
    if (detail::bals_converged(rep.residual_trace, opts)) {
      rep.converged = true;
      break;
    }
  }
  return opts.resolve_ambiguity ? remove_ambiguity_bs(std::move(rep), coding.scheme) : rep;
}

/// Least-squares estimate of X^T kron H (TM x RN) from the reflected tensor.
inline CMatrix estimate_z_bs(const Tensor3& y_bs, const CodingSet& coding, const CMatrix& g_hat) {
  detail::bs_dims(y_bs, coding, g_hat);
  const CMatrix b = build_kronf_bs_factor(coding, g_hat);
  if (numerical_rank(b) < b.rows()) {
    throw RankDeficiencyError("BS-KronF: coding/channel factor lacks full row rank");
  }
  return unfold(y_bs, 3).transpose() * pinv(b);
}

/// Rearranges the TM x RN estimate into the MN x RT rank-1 matrix vec(H) vec(X^T)^T.
inline CMatrix rearrange_z(const CMatrix& z_hat, Index m, Index n, Index r, Index t) {
  CMatrix z_bar(m * n, r * t);
  for (Index rr = 0; rr < r; ++rr) {
    for (Index tt = 0; tt < t; ++tt) {
      z_bar.col(tt + t * rr) = vec(z_hat.block(tt * m, rr * n, m, n));
    }
  }
  return z_bar;
}

/// Closed-form Kronecker factorization at the BS (both schemes).
inline EstimateReport bs_kronf(const Tensor3& y_bs, const ControlLinkPayload& payload,
                               const CodingSet& coding, bool resolve_ambiguity = true) {
  payload.validate();
  const auto d = detail::bs_dims(y_bs, coding, payload.g_hat);
  detail::precheck(detail::bs_config(coding, d), Receiver::kronf, Entity::bs);
  const CMatrix z_bar = rearrange_z(estimate_z_bs(y_bs, coding, payload.g_hat), d.M, d.N, d.R, d.T);
  const Rank1 f = rank1_approx(z_bar);
  const double s = std::sqrt(f.sigma);
  EstimateReport rep;
  rep.g_hat = payload.g_hat;
  rep.h_hat = unvec(s * f.u, d.M, d.N);
  rep.x_hat = unvec(s * f.v.conjugate(), d.T, d.R).transpose();
  return resolve_ambiguity ? remove_ambiguity_bs(std::move(rep), coding.scheme) : rep;
}

/// Scenario 2: H from one least-squares solve with both G and X fed back.
inline EstimateReport bs_h(const Tensor3& y_bs, const ControlLinkPayload& payload,
                           const CodingSet& coding) {
  payload.validate();
  if (!payload.x_hat) throw ConfigError("BS-H needs the fed-back symbols");
  const auto d = detail::bs_dims(y_bs, coding, payload.g_hat);
  detail::precheck(detail::bs_config(coding, d), Receiver::h, Entity::bs);
  const CMatrix& x = *payload.x_hat;
  if (x.rows() != d.R || x.cols() != d.T) throw DimensionError("fed-back X has the wrong shape");
  const CMatrix right = build_h_factor(coding, payload.g_hat, x);
  if (numerical_rank(right) < d.N) {
    throw RankDeficiencyError("BS-H: right factor lacks full row rank");
  }
  EstimateReport rep;
  rep.g_hat = payload.g_hat;
  rep.x_hat = x;
  rep.h_hat = unfold(y_bs, 1) * pinv(right);
  return rep;
}

}  // namespace hris
