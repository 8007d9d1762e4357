#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "hris/bs_rx.hpp"
#include "hris/coding.hpp"
#include "hris/conditions.hpp"
#include "hris/hris_rx.hpp"
#include "hris/scenario.hpp"

namespace hris {

/// One HRIS receiver feeding one BS receiver; a BS-H second stage implies
/// control-link scenario 2 (symbols fed back).
struct ReceiverPair {
  Receiver hris = Receiver::bals;
  Receiver bs = Receiver::bals;
  Scheme scheme = Scheme::tstc;

  int scenario() const { return bs == Receiver::h ? 2 : 1; }
  std::string name() const { return std::string(to_string(hris)) + "-" + std::string(to_string(bs)); }

  void validate() const {
    if (!valid_row(hris, Entity::hris, scheme)) {
      throw ConfigError("'" + std::string(to_string(hris)) + "' is not an HRIS receiver for " +
                        std::string(to_string(scheme)));
    }
    if (!valid_row(bs, Entity::bs, scheme)) {
      throw ConfigError("'" + std::string(to_string(bs)) + "' is not a BS receiver");
    }
  }

  friend bool operator==(const ReceiverPair&, const ReceiverPair&) = default;
};

/// Parses "<hris>-<bs>", e.g. "kronf-h".
inline ReceiverPair parse_pair(std::string_view text, Scheme scheme) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw ConfigError("receiver pair '" + std::string(text) + "' must look like <hris>-<bs>");
  }
  ReceiverPair p{parse_receiver(text.substr(0, dash)), parse_receiver(text.substr(dash + 1)), scheme};
  p.validate();
  return p;
}

/// The six pairs of each coding scheme.
inline std::vector<ReceiverPair> all_pairs(Scheme scheme) {
  const Receiver closed = scheme == Scheme::tstc ? Receiver::kronf : Receiver::krf;
  std::vector<ReceiverPair> out;
  for (Receiver hr : {Receiver::bals, closed}) {
    for (Receiver br : {Receiver::bals, Receiver::kronf, Receiver::h}) out.push_back({hr, br, scheme});
  }
  return out;
}

struct RowCheck {
  Receiver receiver = Receiver::bals;
  Entity entity = Entity::hris;
  Index min_K = 0;
  bool satisfied = false;   // K >= min_K
  bool structural = false;  // counting conditions on the actual LS factors
  double flops = 0.0;       // per iteration for BALS
};

/// Observed ranks of the least-squares blocks next to their upper bounds.
struct RankBounds {
  Index kappa_g = 0, kappa_h = 0, kappa_x = 0;
  Index zeta_x = 0, zeta_x_bound = 0;  // min_k rank(Phi_k G C_k)
  Index xi_x = 0, xi_x_bound = 0;      // min_k rank(H diag(psi_k) G C_k)
  Index xi_h = 0, xi_h_bound = 0;      // min_k rank(diag(psi_k) G C_k X)
  Index rank_fg_bar = 0, fg_bar_bound = 0;

  bool holds() const {
    return zeta_x <= zeta_x_bound && xi_x <= xi_x_bound && xi_h <= xi_h_bound &&
           rank_fg_bar <= fg_bar_bound;
  }
};

struct IdentReport {
  ReceiverPair pair;
  Index K = 0;
  std::array<RowCheck, 2> rows{};  // HRIS row, BS row
  Index min_K = 0;                 // largest row threshold
  bool satisfied = false;
  bool design_feasible = false;
  bool structurally_satisfied = false;
  std::int64_t feedback_bits = 0;
};

inline RowCheck check_row(const ScenarioConfig& cfg, Receiver r, Entity e) {
  RowCheck row;
  row.receiver = r;
  row.entity = e;
  row.min_K = min_subframes(cfg, r, e, cfg.scheme);
  row.satisfied = cfg.K >= row.min_K;
  row.structural = structural_condition(cfg, r, e, cfg.scheme);
  row.flops = flops_estimate(cfg, r, e, cfg.scheme, 1);
  return row;
}

/// Table verdict for both stages of a pair, plus design and structural checks.
inline IdentReport check_identifiability(const ScenarioConfig& cfg, const ReceiverPair& pair) {
  if (pair.scheme != cfg.scheme) throw ConfigError("pair scheme differs from config scheme");
  pair.validate();
  IdentReport rep;
  rep.pair = pair;
  rep.K = cfg.K;
  rep.rows = {check_row(cfg, pair.hris, Entity::hris), check_row(cfg, pair.bs, Entity::bs)};
  rep.min_K = std::max(rep.rows[0].min_K, rep.rows[1].min_K);
  rep.satisfied = rep.rows[0].satisfied && rep.rows[1].satisfied;
  rep.design_feasible = coding_design_feasible(cfg);
  rep.structurally_satisfied =
      rep.design_feasible && rep.rows[0].structural && rep.rows[1].structural;
  rep.feedback_bits = feedback_bits(cfg, pair.scenario(), cfg.scheme);
  return rep;
}

/// Smallest power-of-two K meeting the table, the coding design and the
/// structural conditions for the pair (other dimensions taken from cfg).
inline Index required_subframes(ScenarioConfig cfg, const ReceiverPair& pair) {
  for (Index k = 1; k <= (Index{1} << 24); k *= 2) {
    cfg.K = k;
    const IdentReport rep = check_identifiability(cfg, pair);
    if (rep.satisfied && rep.structurally_satisfied) return k;
  }
  throw IdentifiabilityError("no feasible number of sub-frames for pair " + pair.name());
}

/// Numerical ranks of the blocks bounded by the identifiability propositions.
inline RankBounds rank_bounds(const ChannelRealization& ch, const CMatrix& x,
                              const CodingSet& coding, double rel_tol = 1e-10) {
  RankBounds b;
  b.kappa_g = numerical_rank(ch.G, rel_tol);
  b.kappa_h = numerical_rank(ch.H, rel_tol);
  b.kappa_x = numerical_rank(x, rel_tol);
  const Index nc = coding.rf_chains();
  const Index r = coding.streams();
  const Index big = std::numeric_limits<Index>::max();
  b.zeta_x = b.xi_x = b.xi_h = big;
  for (Index k = 0; k < coding.subframes(); ++k) {
    const CMatrix gc = ch.G * coding.coding_k(k);
    const CMatrix dgc = coding.psi_k(k).asDiagonal() * gc;
    b.zeta_x = std::min(b.zeta_x, numerical_rank(coding.phi_k(k) * gc, rel_tol));
    b.xi_x = std::min(b.xi_x, numerical_rank(ch.H * dgc, rel_tol));
    b.xi_h = std::min(b.xi_h, numerical_rank(dgc * x, rel_tol));
  }
  if (coding.subframes() == 0) b.zeta_x = b.xi_x = b.xi_h = 0;
  const bool tstc = coding.scheme == Scheme::tstc;
  b.zeta_x_bound = tstc ? std::min({nc, b.kappa_g, r}) : std::min(nc, b.kappa_g);
  b.xi_x_bound = tstc ? std::min({b.kappa_h, b.kappa_g, r}) : std::min(b.kappa_h, b.kappa_g);
  b.xi_h_bound = std::min(b.kappa_g, b.kappa_x);

  const Index t = x.cols();
  CMatrix fg_bar(coding.subframes() * nc * t, coding.antennas() * coding.elements());
  for (Index k = 0; k < coding.subframes(); ++k) {
    fg_bar.middleRows(k * nc * t, nc * t) =
        kron((coding.coding_k(k) * x).transpose(), coding.phi_k(k));
  }
  b.rank_fg_bar = numerical_rank(fg_bar, rel_tol);
  b.fg_bar_bound = std::min(coding.subframes() * nc * b.kappa_x, fg_bar.cols());
  return b;
}

}  // namespace hris
