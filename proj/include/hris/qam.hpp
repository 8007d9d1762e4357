#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hris/errors.hpp"
#include "hris/tensor.hpp"

namespace hris {

/// Square Gray-mapped QAM with unit average energy.
///
/// Symbol index b splits into a high half (in-phase bits) and a low half
/// (quadrature bits); each half is Gray-decoded to an amplitude level
/// 2p - (side - 1), p in [0, side).
class QamConstellation {
 public:
  explicit QamConstellation(int order) : order_(order) {
    side_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (order < 4 || side_ * side_ != order || (side_ & (side_ - 1)) != 0) {
      throw ConfigError("unsupported QAM order " + std::to_string(order) +
                        " (need a square power of two >= 4)");
    }
    bits_per_axis_ = 0;
    while ((1 << bits_per_axis_) < side_) ++bits_per_axis_;
    const double mean_energy = 2.0 * (order - 1) / 3.0;
    const double scale = 1.0 / std::sqrt(mean_energy);
    points_.reserve(static_cast<std::size_t>(order));
    for (int b = 0; b < order; ++b) {
      const int i_bits = b >> bits_per_axis_;
      const int q_bits = b & (side_ - 1);
      points_.emplace_back(level(gray_decode(i_bits)) * scale, level(gray_decode(q_bits)) * scale);
    }
  }

  int order() const { return order_; }
  int bits_per_symbol() const { return 2 * bits_per_axis_; }
  const std::vector<cplx>& points() const { return points_; }
  cplx point(int index) const { return points_.at(static_cast<std::size_t>(index)); }

  /// Minimum-distance decision; equidistant candidates resolve to the lowest index.
  int decide(cplx z) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < order_; ++i) {
      const double d = std::norm(z - points_[static_cast<std::size_t>(i)]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  template <typename Gen>
  int draw_index(Gen& rng) const {
    std::uniform_int_distribution<int> pick(0, order_ - 1);
    return pick(rng);
  }

 private:
  static int gray_decode(int g) {
    int p = 0;
    for (; g != 0; g >>= 1) p ^= g;
    return p;
  }
  double level(int p) const { return 2.0 * p - (side_ - 1); }

  int order_;
  int side_ = 0;
  int bits_per_axis_ = 0;
  std::vector<cplx> points_;
};

}  // namespace hris
