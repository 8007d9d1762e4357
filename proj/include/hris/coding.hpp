#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "hris/errors.hpp"
#include "hris/qam.hpp"
#include "hris/scenario.hpp"
#include "hris/tensor.hpp"

namespace hris {

/// Transmit coding plus the HRIS sensing/reflecting phase shifts of one block.
struct CodingSet {
  Scheme scheme = Scheme::tstc;
  Tensor3 phi;     // Nc x N x K, sensing phase shifts (amplitude sqrt((1-rho)/Nc))
  CMatrix psi;     // K x N, reflecting phase shifts (amplitude sqrt(rho))
  Tensor3 w;       // L x R x K, TSTC coding tensor (carries 1/sqrt(L)); empty for KRSTC
  CMatrix lambda;  // K x L, KRSTC coding matrix; empty for TSTC

  Index subframes() const { return psi.rows(); }
  Index elements() const { return psi.cols(); }
  Index rf_chains() const { return phi.dims().i1; }
  Index antennas() const { return scheme == Scheme::tstc ? w.dims().i1 : lambda.cols(); }
  Index streams() const { return scheme == Scheme::tstc ? w.dims().i2 : lambda.cols(); }

  CMatrix phi_k(Index k) const { return phi.slice(k); }
  CMatrix psi_k(Index k) const { return psi.row(k).transpose(); }

  /// Per-sub-frame coding matrix: W_k for TSTC, diag(lambda_k) for KRSTC.
  CMatrix coding_k(Index k) const {
    if (scheme == Scheme::tstc) return w.slice(k);
    return lambda.row(k).transpose().asDiagonal();
  }
};

inline bool is_power_of_two(Index k) { return k > 0 && (k & (k - 1)) == 0; }

/// Sylvester-type Hadamard matrix of order k (a power of two).
inline Eigen::MatrixXd hadamard(Index k) {
  if (!is_power_of_two(k)) {
    throw ConfigError("Hadamard order " + std::to_string(k) + " is not a power of two");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, 1);
  while (h.rows() < k) {
    const Index n = h.rows();
    Eigen::MatrixXd next(2 * n, 2 * n);
    next << h, h, h, -h;
    h = std::move(next);
  }
  return h;
}

/// Unnormalized DFT matrix, D(m, j) = exp(-2 pi i m j / n).
inline CMatrix dft_matrix(Index n) {
  CMatrix d(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index m = 0; m < n; ++m) {
      // reduce m*j modulo n before scaling so large orders keep full precision
      const double e = static_cast<double>((m * j) % n);
      d(m, j) = std::polar(1.0, -2.0 * std::numbers::pi * e / static_cast<double>(n));
    }
  }
  return d;
}

/// Sensing tensor and reflecting matrix sampled from the K*Nc-point DFT:
/// the 3-mode fiber (nc, n, :) of phi is rows [nc*K, (nc+1)*K) of column n and
/// column n of psi is rows [0, K) of column n*Nc, taken modulo K*Nc (the DFT
/// is periodic in its column index, and n*Nc runs past K*Nc whenever K < N).
inline std::pair<Tensor3, CMatrix> design_phase_shifts(const ScenarioConfig& cfg) {
  if (cfg.K * cfg.Nc < cfg.N) {
    throw ConfigError("phase-shift design needs K*Nc >= N (K=" + std::to_string(cfg.K) +
                      ", Nc=" + std::to_string(cfg.Nc) + ", N=" + std::to_string(cfg.N) + ")");
  }
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  const CMatrix d = dft_matrix(cfg.K * cfg.Nc);
  const double sense_amp = std::sqrt((1.0 - cfg.rho) / static_cast<double>(cfg.Nc));
  const double reflect_amp = std::sqrt(cfg.rho);
  Tensor3 phi(cfg.Nc, cfg.N, cfg.K);
  CMatrix psi(cfg.K, cfg.N);
  for (Index n = 0; n < cfg.N; ++n) {
    for (Index k = 0; k < cfg.K; ++k) {
      for (Index nc = 0; nc < cfg.Nc; ++nc) phi(nc, n, k) = sense_amp * d(nc * cfg.K + k, n);
      psi(k, n) = reflect_amp * d(k, (n * cfg.Nc) % (cfg.K * cfg.Nc));
    }
  }
  return {std::move(phi), std::move(psi)};
}

/// TSTC coding tensor: W_k = unvec_{LxR}(row k of the first RL Hadamard columns) / sqrt(L).
inline Tensor3 design_tstc(const ScenarioConfig& cfg) {
  if (!is_power_of_two(cfg.K)) throw ConfigError("TSTC design needs K to be a power of two");
  if (cfg.K < cfg.R * cfg.L) throw ConfigError("TSTC design needs K >= R*L");
  const Eigen::MatrixXd h = hadamard(cfg.K);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.L));
  Tensor3 w(cfg.L, cfg.R, cfg.K);
  for (Index k = 0; k < cfg.K; ++k) {
    for (Index r = 0; r < cfg.R; ++r) {
      for (Index l = 0; l < cfg.L; ++l) w(l, r, k) = scale * h(k, l + cfg.L * r);
    }
  }
  return w;
}

/// KRSTC coding matrix: the first L columns of the K-point Hadamard matrix.
inline CMatrix design_krstc(const ScenarioConfig& cfg) {
  if (!is_power_of_two(cfg.K)) throw ConfigError("KRSTC design needs K to be a power of two");
  if (cfg.K < cfg.L) throw ConfigError("KRSTC design needs K >= L");
  return hadamard(cfg.K).leftCols(cfg.L).cast<cplx>();
}

/// Checks every design precondition without building anything.
inline bool coding_design_feasible(const ScenarioConfig& cfg) {
  if (!is_power_of_two(cfg.K) || cfg.K * cfg.Nc < cfg.N) return false;
  return cfg.scheme == Scheme::tstc ? cfg.K >= cfg.R * cfg.L : cfg.K >= cfg.L;
}

inline CodingSet design_coding(const ScenarioConfig& cfg) {
  CodingSet c;
  c.scheme = cfg.scheme;
  std::tie(c.phi, c.psi) = design_phase_shifts(cfg);
  if (cfg.scheme == Scheme::tstc) {
    c.w = design_tstc(cfg);
  } else {
    if (cfg.R != cfg.L) throw ConfigError("KRSTC requires R == L");
    c.lambda = design_krstc(cfg);
  }
  return c;
}

/// Unit-energy QAM symbols with the ambiguity anchors already in place.
struct SymbolMatrix {
  CMatrix x;  // R x T
  Scheme anchors = Scheme::tstc;
};

/// TSTC anchors X(0,0) = 1; KRSTC anchors the whole first column to ones.
inline void impose_anchors(CMatrix& x, Scheme scheme) {
  if (x.size() == 0) return;
  if (scheme == Scheme::tstc) {
    x(0, 0) = 1.0;
  } else {
    x.col(0).setOnes();
  }
}

inline SymbolMatrix gen_symbols(const ScenarioConfig& cfg, Rng& rng) {
  const QamConstellation qam(cfg.constellation);
  const Index rows = cfg.streams();
  CMatrix x(rows, cfg.T);
  for (Index t = 0; t < cfg.T; ++t) {
    for (Index r = 0; r < rows; ++r) x(r, t) = qam.point(qam.draw_index(rng));
  }
  impose_anchors(x, cfg.scheme);
  return {std::move(x), cfg.scheme};
}

}  // namespace hris
