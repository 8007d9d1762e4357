#pragma once

#include <cmath>

#include "hris/coding.hpp"
#include "hris/errors.hpp"
#include "hris/scenario.hpp"
#include "hris/tensor.hpp"

namespace hris {

struct ReceivedSignals {
  Tensor3 y_rc;  // Nc x T x K, sensed at the HRIS
  Tensor3 y_bs;  // M x T x K, reflected to the BS
};

namespace detail {

inline void check_synthesis_inputs(const ChannelRealization& ch, const CodingSet& coding,
                                   const CMatrix& x) {
  const Index n = coding.elements();
  const Index l = coding.antennas();
  const Index r = coding.streams();
  if (ch.G.rows() != n || ch.G.cols() != l) {
    throw DimensionError("synthesis: G must be " + std::to_string(n) + "x" + std::to_string(l));
  }
  if (ch.H.cols() != n) throw DimensionError("synthesis: H must have N columns");
  if (x.rows() != r) throw DimensionError("synthesis: X must have " + std::to_string(r) + " rows");
  if (coding.phi.dims().i2 != n || coding.phi.dims().i3 != coding.subframes()) {
    throw DimensionError("synthesis: phase-shift tensor does not match psi");
  }
}

}  // namespace detail

/// Noiseless sensed tensor: slice k = Phi_k G C_k X, C_k = W_k or diag(lambda_k).
inline Tensor3 synth_yrc_noiseless(const ChannelRealization& ch, const CodingSet& coding,
                                   const CMatrix& x) {
  detail::check_synthesis_inputs(ch, coding, x);
  const Index k_total = coding.subframes();
  Tensor3 y(coding.rf_chains(), x.cols(), k_total);
  for (Index k = 0; k < k_total; ++k) {
    y.slice_view(k) = coding.phi.slice_view(k) * ch.G * coding.coding_k(k) * x;
  }
  return y;
}

/// Noiseless reflected tensor: slice k = H diag(psi_k) G C_k X.
inline Tensor3 synth_ybs_noiseless(const ChannelRealization& ch, const CodingSet& coding,
                                   const CMatrix& x) {
  detail::check_synthesis_inputs(ch, coding, x);
  const Index k_total = coding.subframes();
  Tensor3 y(ch.H.rows(), x.cols(), k_total);
  for (Index k = 0; k < k_total; ++k) {
    y.slice_view(k) = ch.H * coding.psi.row(k).transpose().asDiagonal() * ch.G *
                      coding.coding_k(k) * x;
  }
  return y;
}

/// `x_tx` is the transmitted matrix, already scaled by sqrt(Pt).
inline Tensor3 synth_yrc(const ScenarioConfig& cfg, const ChannelRealization& ch,
                         const CodingSet& coding, const CMatrix& x_tx, Rng& rng) {
  return add_noise(synth_yrc_noiseless(ch, coding, x_tx), cfg.noise_power(), rng);
}

inline Tensor3 synth_ybs(const ScenarioConfig& cfg, const ChannelRealization& ch,
                         const CodingSet& coding, const CMatrix& x_tx, Rng& rng) {
  return add_noise(synth_ybs_noiseless(ch, coding, x_tx), cfg.noise_power(), rng);
}

/// Unit-energy symbols scaled to the configured transmit power.
inline CMatrix transmit_symbols(const ScenarioConfig& cfg, const CMatrix& x) {
  return std::sqrt(cfg.transmit_power()) * x;
}

}  // namespace hris
