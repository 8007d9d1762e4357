#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "hris/errors.hpp"
#include "hris/tensor.hpp"

namespace hris {

enum class Scheme { tstc, krstc };

inline std::string_view to_string(Scheme s) { return s == Scheme::tstc ? "tstc" : "krstc"; }

inline Scheme parse_scheme(std::string_view s) {
  if (s == "tstc") return Scheme::tstc;
  if (s == "krstc") return Scheme::krstc;
  throw ConfigError("unknown coding scheme '" + std::string(s) + "' (expected tstc or krstc)");
}

using Rng = std::mt19937_64;

/// splitmix64 finalizer; maps (base_seed ^ index) to the seed of trial `index`.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  std::uint64_t z = (base_seed ^ index) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

/// Every dimension, power level and geometry parameter of one run.
/// Defaults reproduce the reference scenario.
struct ScenarioConfig {
  Index M = 8;    // BS antennas
  Index N = 32;   // HRIS meta-atoms
  Index Nc = 2;   // HRIS RF chains
  Index L = 2;    // UT antennas
  Index R = 2;    // data streams
  Index T = 4;    // symbol periods per sub-frame
  Index K = 64;   // sub-frames

  double rho = 0.9;  // reflected power fraction
  double d_u = 40.0;
  double d_h = 10.0;
  double alpha_g = 2.5;
  double alpha_h = 2.0;
  double PL0_dB = -20.0;
  double d0 = 1.0;
  double noise_dBm = -90.0;
  double Pt_dBm = 30.0;

  int constellation = 64;
  Scheme scheme = Scheme::tstc;
  int eta = 16;  // feedback bits per channel coefficient

  int bals_max_iterations = 200;
  double bals_tol = 1e-6;

  double noise_power() const { return dbm_to_watts(noise_dBm); }
  double transmit_power() const { return dbm_to_watts(Pt_dBm); }

  /// Number of streams actually carried by X (KRSTC pins it to L).
  Index streams() const { return scheme == Scheme::krstc ? L : R; }

  void validate() const {
    for (auto [name, v] : {std::pair{"M", M}, {"N", N}, {"Nc", Nc}, {"L", L}, {"R", R},
                           {"T", T}, {"K", K}}) {
      if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
    }
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
    if (!(d_u > 0.0) || !(d_h > 0.0) || !(d0 > 0.0)) {
      throw ConfigError("distances must be positive");
    }
    if (scheme == Scheme::krstc && R != L) throw ConfigError("KRSTC requires R == L");
    if (eta < 1) throw ConfigError("eta must be >= 1");
    if (bals_max_iterations < 1) throw ConfigError("bals_max_iterations must be >= 1");
    if (!(bals_tol > 0.0)) throw ConfigError("bals_tol must be positive");
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Linear gain PL0 * (d / d0)^(-alpha).
inline double path_loss(double d, double alpha, const ScenarioConfig& cfg) {
  if (!(d > 0.0)) throw ConfigError("path_loss: distance must be positive");
  return db_to_linear(cfg.PL0_dB) * std::pow(d / cfg.d0, -alpha);
}

inline double ut_hris_gain(const ScenarioConfig& cfg) {
  return path_loss(cfg.d_u, cfg.alpha_g, cfg);
}
inline double hris_bs_gain(const ScenarioConfig& cfg) {
  return path_loss(cfg.d_h, cfg.alpha_h, cfg);
}

/// UT-HRIS channel G (N x L) and HRIS-BS channel H (M x N).
struct ChannelRealization {
  CMatrix G;
  CMatrix H;
};

/// i.i.d. circularly-symmetric complex Gaussian entries with the given variance.
inline CMatrix complex_gaussian(Index rows, Index cols, double variance, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = {re, im};
    }
  }
  return m;
}

/// Rayleigh channels with variances set by the two link path losses.
inline ChannelRealization draw_channels(const ScenarioConfig& cfg, Rng& rng) {
  CMatrix g = complex_gaussian(cfg.N, cfg.L, ut_hris_gain(cfg), rng);
  CMatrix h = complex_gaussian(cfg.M, cfg.N, hris_bs_gain(cfg), rng);
  return {std::move(g), std::move(h)};
}

inline Tensor3 add_noise(Tensor3 signal, double noise_power, Rng& rng) {
  if (noise_power < 0.0) throw ConfigError("add_noise: negative noise power");
  if (noise_power == 0.0) return signal;
  std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2.0));
  for (auto& v : signal.data()) {
    const double re = n(rng);
    const double im = n(rng);
    v += cplx{re, im};
  }
  return signal;
}

// ---------------------------------------------------------------------------
// Flat key = value configuration files. '#' starts a comment; unknown keys are
// rejected so that typos do not silently fall back to defaults.

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

inline void set_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "M") cfg.M = parse_number<Index>(key, value);
  else if (key == "N") cfg.N = parse_number<Index>(key, value);
  else if (key == "Nc") cfg.Nc = parse_number<Index>(key, value);
  else if (key == "L") cfg.L = parse_number<Index>(key, value);
  else if (key == "R") cfg.R = parse_number<Index>(key, value);
  else if (key == "T") cfg.T = parse_number<Index>(key, value);
  else if (key == "K") cfg.K = parse_number<Index>(key, value);
  else if (key == "rho") cfg.rho = parse_number<double>(key, value);
  else if (key == "d_u") cfg.d_u = parse_number<double>(key, value);
  else if (key == "d_h") cfg.d_h = parse_number<double>(key, value);
  else if (key == "alpha_g") cfg.alpha_g = parse_number<double>(key, value);
  else if (key == "alpha_h") cfg.alpha_h = parse_number<double>(key, value);
  else if (key == "PL0_dB") cfg.PL0_dB = parse_number<double>(key, value);
  else if (key == "d0") cfg.d0 = parse_number<double>(key, value);
  else if (key == "noise_dBm") cfg.noise_dBm = parse_number<double>(key, value);
  else if (key == "Pt_dBm") cfg.Pt_dBm = parse_number<double>(key, value);
  else if (key == "constellation") cfg.constellation = parse_number<int>(key, value);
  else if (key == "scheme") cfg.scheme = parse_scheme(value);
  else if (key == "eta") cfg.eta = parse_number<int>(key, value);
  else if (key == "bals_max_iterations") cfg.bals_max_iterations = parse_number<int>(key, value);
  else if (key == "bals_tol") cfg.bals_tol = parse_number<double>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// Reads a key = value file. KRSTC runs get R = L when R is not given.
inline ScenarioConfig read_config(std::istream& in) {
  ScenarioConfig cfg;
  bool r_given = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    set_config_value(cfg, key, value);
    r_given = r_given || key == "R";
  }
  if (cfg.scheme == Scheme::krstc && !r_given) cfg.R = cfg.L;
  cfg.validate();
  return cfg;
}

inline ScenarioConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return read_config(in);
}

inline void write_config(std::ostream& out, const ScenarioConfig& cfg) {
  const auto old_precision = out.precision(17);
  out << "M = " << cfg.M << "\nN = " << cfg.N << "\nNc = " << cfg.Nc << "\nL = " << cfg.L
      << "\nR = " << cfg.R << "\nT = " << cfg.T << "\nK = " << cfg.K << "\nrho = " << cfg.rho
      << "\nd_u = " << cfg.d_u << "\nd_h = " << cfg.d_h << "\nalpha_g = " << cfg.alpha_g
      << "\nalpha_h = " << cfg.alpha_h << "\nPL0_dB = " << cfg.PL0_dB << "\nd0 = " << cfg.d0
      << "\nnoise_dBm = " << cfg.noise_dBm << "\nPt_dBm = " << cfg.Pt_dBm
      << "\nconstellation = " << cfg.constellation << "\nscheme = " << to_string(cfg.scheme)
      << "\neta = " << cfg.eta << "\nbals_max_iterations = " << cfg.bals_max_iterations
      << "\nbals_tol = " << cfg.bals_tol << '\n';
  out.precision(old_precision);
}

}  // namespace hris
