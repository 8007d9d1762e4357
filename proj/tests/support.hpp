#pragma once

// Random instance generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hris/hris.hpp"

namespace hris::testing {

inline CMatrix random_matrix(Index rows, Index cols, Rng& rng) {
  return complex_gaussian(rows, cols, 1.0, rng);
}

inline Tensor3 random_tensor(Index i1, Index i2, Index i3, Rng& rng) {
  Tensor3 t(i1, i2, i3);
  const CMatrix v = random_matrix(t.size(), 1, rng);
  std::copy(v.data(), v.data() + v.size(), t.data().begin());
  return t;
}

inline Index uniform_index(Index lo, Index hi, Rng& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  const double den = std::max(b.norm(), 1e-300);
  return (a - b).norm() / den;
}

inline double max_abs(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Small config that keeps the noiseless pipeline cheap.
inline ScenarioConfig small_config(Scheme scheme, Index K) {
  ScenarioConfig c;
  c.M = 4;
  c.N = 8;
  c.Nc = 2;
  c.L = 2;
  c.R = 2;
  c.T = 4;
  c.K = K;
  c.scheme = scheme;
  return c;
}

/// Channels and anchored symbols of unit scale for receiver-level checks.
struct Instance {
  ScenarioConfig cfg;
  CodingSet coding;
  ChannelRealization ch;
  CMatrix x;
  Tensor3 y_rc, y_bs;
};

inline Instance noiseless_instance(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.cfg = cfg;
  in.coding = design_coding(cfg);
  in.ch.G = random_matrix(cfg.N, cfg.L, rng);
  in.ch.H = random_matrix(cfg.M, cfg.N, rng);
  in.x = gen_symbols(cfg, rng).x;
  in.y_rc = synth_yrc_noiseless(in.ch, in.coding, in.x);
  in.y_bs = synth_ybs_noiseless(in.ch, in.coding, in.x);
  return in;
}

}  // namespace hris::testing

namespace hris::testing {

struct TableRow {
  Receiver receiver;
  Entity entity;
  Scheme scheme;
};

/// The ten identifiability rows in table order.
inline std::vector<TableRow> table_rows() {
  using enum Receiver;
  return {{bals, Entity::hris, Scheme::tstc},  {kronf, Entity::hris, Scheme::tstc},
          {bals, Entity::bs, Scheme::tstc},    {kronf, Entity::bs, Scheme::tstc},
          {bals, Entity::hris, Scheme::krstc}, {krf, Entity::hris, Scheme::krstc},
          {bals, Entity::bs, Scheme::krstc},   {kronf, Entity::bs, Scheme::krstc},
          {h, Entity::bs, Scheme::tstc},       {h, Entity::bs, Scheme::krstc}};
}

}  // namespace hris::testing
