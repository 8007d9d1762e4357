#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

namespace hris {
namespace {

using testing::max_abs;

double mean_power(const CMatrix& m) { return m.squaredNorm() / static_cast<double>(m.size()); }

TEST(PathLoss, ReferenceDistanceAndFormula) {
  const ScenarioConfig cfg;
  EXPECT_NEAR(path_loss(1.0, 2.5, cfg), 0.01, 1e-15);
  EXPECT_NEAR(path_loss(10.0, 2.0, cfg), 1e-4, 1e-18);
  for (double d : {0.3, 7.0, 123.0}) EXPECT_NEAR(path_loss(d, 0.0, cfg), 0.01, 1e-15);
  EXPECT_THROW(path_loss(0.0, 2.0, cfg), ConfigError);
  EXPECT_THROW(path_loss(-1.0, 2.0, cfg), ConfigError);
}

TEST(Channels, DegenerateGainGivesZero) {
  ScenarioConfig cfg;
  cfg.PL0_dB = -10000.0;
  Rng rng(1);
  const ChannelRealization ch = draw_channels(cfg, rng);
  EXPECT_EQ(ch.G.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(ch.H.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Channels, VarianceCalibration) {
  ScenarioConfig cfg;
  cfg.N = 1000;
  cfg.L = 100;
  cfg.M = 100;
  Rng rng(2);
  const ChannelRealization ch = draw_channels(cfg, rng);
  ASSERT_EQ(ch.G.rows(), 1000);
  ASSERT_EQ(ch.H.cols(), 1000);
  const double gamma = path_loss(cfg.d_u, cfg.alpha_g, cfg);
  const double beta = path_loss(cfg.d_h, cfg.alpha_h, cfg);
  EXPECT_NEAR(mean_power(ch.G) / gamma, 1.0, 0.02);
  EXPECT_NEAR(mean_power(ch.H) / beta, 1.0, 0.02);
  // circular: real and imaginary parts split the power
  EXPECT_NEAR(ch.G.real().squaredNorm() / ch.G.squaredNorm(), 0.5, 0.02);
}

TEST(Channels, SeedDeterminism) {
  const ScenarioConfig cfg;
  Rng a(5), b(5), c(6);
  const ChannelRealization ca = draw_channels(cfg, a);
  const ChannelRealization cb = draw_channels(cfg, b);
  const ChannelRealization cc = draw_channels(cfg, c);
  EXPECT_EQ(ca.G, cb.G);
  EXPECT_EQ(ca.H, cb.H);
  EXPECT_NE(ca.G, cc.G);
}

TEST(Noise, ZeroPowerIsIdentity) {
  Rng rng(3);
  const Tensor3 t = testing::random_tensor(3, 4, 5, rng);
  EXPECT_EQ(add_noise(t, 0.0, rng), t);
}

TEST(Noise, EmpiricalPowerAndShape) {
  Rng rng(4);
  const Tensor3 zero(50, 40, 50);
  const Tensor3 noisy = add_noise(zero, 3e-9, rng);
  EXPECT_EQ(noisy.dims(), zero.dims());
  EXPECT_NEAR(noisy.squared_norm() / static_cast<double>(noisy.size()) / 3e-9, 1.0, 0.02);
  EXPECT_THROW(add_noise(zero, -1.0, rng), ConfigError);
}

TEST(Seeds, DerivedStreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(Config, DefaultsAndValidation) {
  ScenarioConfig cfg;
  EXPECT_EQ(cfg.M, 8);
  EXPECT_EQ(cfg.N, 32);
  EXPECT_EQ(cfg.K, 64);
  EXPECT_EQ(cfg.constellation, 64);
  EXPECT_DOUBLE_EQ(cfg.rho, 0.9);
  EXPECT_NO_THROW(cfg.validate());
  cfg.rho = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.rho = 0.5;
  cfg.N = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.N = 32;
  cfg.scheme = Scheme::krstc;
  cfg.R = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, TextRoundTrip) {
  ScenarioConfig cfg;
  cfg.M = 3;
  cfg.rho = 0.123456789012345;
  cfg.Pt_dBm = 17.5;
  cfg.scheme = Scheme::krstc;
  std::stringstream ss;
  write_config(ss, cfg);
  EXPECT_EQ(read_config(ss), cfg);
}

TEST(Config, ParsesCommentsAndKrstcDefaultStreams) {
  std::istringstream in("# scenario\nscheme = krstc\n  L = 4   # antennas\n\nK=128\n");
  const ScenarioConfig cfg = read_config(in);
  EXPECT_EQ(cfg.scheme, Scheme::krstc);
  EXPECT_EQ(cfg.L, 4);
  EXPECT_EQ(cfg.R, 4);
  EXPECT_EQ(cfg.K, 128);
}

TEST(Config, RejectsMalformedInput) {
  std::istringstream unknown("Q = 4\n");
  EXPECT_THROW(read_config(unknown), ConfigError);
  std::istringstream junk("N = 4x\n");
  EXPECT_THROW(read_config(junk), ConfigError);
  std::istringstream no_eq("N 4\n");
  EXPECT_THROW(read_config(no_eq), ConfigError);
  EXPECT_THROW(read_config_file("/nonexistent/cfg"), ConfigError);
}

TEST(Qam, UnitEnergyGrayGrid) {
  for (int order : {4, 16, 64, 256}) {
    const QamConstellation qam(order);
    double e = 0.0;
    for (const cplx& p : qam.points()) e += std::norm(p);
    EXPECT_NEAR(e / order, 1.0, 1e-12);
    EXPECT_EQ(1 << qam.bits_per_symbol(), order);
  }
  // neighbours along an axis differ in one bit
  const QamConstellation qam(16);
  const double step = 2.0 / std::sqrt(10.0);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      const double d = std::abs(qam.point(a) - qam.point(b));
      if (std::abs(d - step) < 1e-9) {
        EXPECT_EQ(__builtin_popcount(unsigned(a ^ b)), 1);
      }
    }
  }
  EXPECT_THROW(QamConstellation(32), ConfigError);
  EXPECT_THROW(QamConstellation(2), ConfigError);
}

TEST(Qam, DecisionsInvertPoints) {
  const QamConstellation qam(64);
  for (int i = 0; i < 64; ++i) {
    EXPECT_EQ(qam.decide(qam.point(i)), i);
    EXPECT_EQ(qam.decide(qam.point(i) + cplx(0.04, -0.04)), i);
  }
}

TEST(PhaseShifts, AmplitudeLaws) {
  ScenarioConfig cfg;
  cfg.N = 2;
  cfg.Nc = 2;
  cfg.K = 4;
  cfg.rho = 0.0;
  auto [phi, psi] = design_phase_shifts(cfg);
  for (const cplx& v : phi.data()) EXPECT_NEAR(std::abs(v), std::sqrt(0.5), 1e-15);
  EXPECT_EQ(psi.cwiseAbs().maxCoeff(), 0.0);

  cfg.rho = 1.0;
  std::tie(phi, psi) = design_phase_shifts(cfg);
  EXPECT_EQ(phi.squared_norm(), 0.0);
  EXPECT_LT((psi.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-15);
}

TEST(PhaseShifts, FirstReflectingColumnIsAllOnes) {
  ScenarioConfig cfg;
  cfg.N = 2;
  cfg.Nc = 1;
  cfg.K = 4;
  cfg.rho = 1.0;
  const auto [phi, psi] = design_phase_shifts(cfg);
  EXPECT_LT(max_abs(psi.col(0), CMatrix::Ones(4, 1)), 1e-15);
  // second column is DFT column 1: powers of -i
  const cplx w(0.0, -1.0);
  for (Index k = 0; k < 4; ++k) EXPECT_LT(std::abs(psi(k, 1) - std::pow(w, double(k))), 1e-12);
}

TEST(PhaseShifts, FibersFollowDft) {
  ScenarioConfig cfg;
  cfg.N = 6;
  cfg.Nc = 2;
  cfg.K = 4;
  cfg.rho = 0.3;
  const auto [phi, psi] = design_phase_shifts(cfg);
  const double kn = static_cast<double>(cfg.K * cfg.Nc);
  const double amp = std::sqrt(0.7 / 2.0);
  for (Index nc = 0; nc < 2; ++nc) {
    for (Index n = 0; n < 6; ++n) {
      for (Index k = 0; k < 4; ++k) {
        const double m = static_cast<double>(nc * cfg.K + k);
        const cplx expected = amp * std::polar(1.0, -2.0 * std::numbers::pi * m * n / kn);
        EXPECT_LT(std::abs(phi(nc, n, k) - expected), 1e-12);
      }
    }
  }
}

TEST(PhaseShifts, PowerSplitAndRanks) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioConfig cfg;
    cfg.Nc = testing::uniform_index(1, 4, rng);
    cfg.N = testing::uniform_index(1, 12, rng);
    cfg.K = Index{1} << testing::uniform_index(0, 5, rng);
    while (cfg.K * cfg.Nc < cfg.N) cfg.K *= 2;
    cfg.rho = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const auto [phi, psi] = design_phase_shifts(cfg);
    for (Index k = 0; k < cfg.K; ++k) {
      for (Index n = 0; n < cfg.N; ++n) {
        for (Index nc = 0; nc < cfg.Nc; ++nc) {
          EXPECT_NEAR(std::norm(psi(k, n)) + double(cfg.Nc) * std::norm(phi(nc, n, k)), 1.0, 1e-12);
        }
      }
      EXPECT_EQ(numerical_rank(phi.slice(k)), std::min(cfg.Nc, cfg.N));
      EXPECT_EQ(numerical_rank(CMatrix(psi.row(k).transpose().asDiagonal())), cfg.N);
    }
  }
}

TEST(PhaseShifts, RejectsTooFewSubframes) {
  ScenarioConfig cfg;
  cfg.N = 9;
  cfg.Nc = 2;
  cfg.K = 4;
  EXPECT_THROW(design_phase_shifts(cfg), ConfigError);
}

TEST(Hadamard, OrthogonalAndSylvester) {
  for (Index k : {1, 2, 4, 16, 64}) {
    const Eigen::MatrixXd h = hadamard(k);
    EXPECT_LT((h.transpose() * h - double(k) * Eigen::MatrixXd::Identity(k, k)).norm(), 1e-12);
    EXPECT_EQ(h.row(0), Eigen::RowVectorXd::Ones(k));
  }
  EXPECT_THROW(hadamard(12), ConfigError);
}

TEST(Tstc, ScalarCase) {
  ScenarioConfig cfg;
  cfg.L = cfg.R = 1;
  cfg.K = 2;
  const Tensor3 w = design_tstc(cfg);
  EXPECT_EQ(w(0, 0, 0), cplx(1.0));
  EXPECT_EQ(w(0, 0, 1), cplx(1.0));
}

TEST(Tstc, TruncatedHadamardUnfolding) {
  ScenarioConfig cfg;
  cfg.L = cfg.R = 2;
  cfg.K = 8;
  const Tensor3 w = design_tstc(cfg);
  const CMatrix u = unfold(w, 3);
  EXPECT_LT(max_abs(std::sqrt(2.0) * u, hadamard(8).leftCols(4).cast<cplx>()), 1e-15);
  EXPECT_LT(max_abs(u.adjoint() * u, 4.0 * CMatrix::Identity(4, 4)), 1e-13);
  for (const cplx& v : w.data()) EXPECT_NEAR(std::abs(v), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Tstc, SlicesAreRankOne) {
  for (Index l : {1, 2, 4}) {
    for (Index r : {1, 2, 4}) {
      ScenarioConfig cfg;
      cfg.L = l;
      cfg.R = r;
      cfg.K = 32;
      const Tensor3 w = design_tstc(cfg);
      for (Index k = 0; k < cfg.K; ++k) EXPECT_EQ(numerical_rank(w.slice(k)), 1);
    }
  }
}

TEST(Tstc, Preconditions) {
  ScenarioConfig cfg;
  cfg.K = 12;
  EXPECT_THROW(design_tstc(cfg), ConfigError);
  cfg.K = 2;
  EXPECT_THROW(design_tstc(cfg), ConfigError);
}

TEST(Krstc, TruncatedHadamard) {
  ScenarioConfig cfg;
  cfg.scheme = Scheme::krstc;
  cfg.L = cfg.R = 1;
  cfg.K = 8;
  CMatrix lam = design_krstc(cfg);
  EXPECT_LT(max_abs(lam, CMatrix::Ones(8, 1)), 0.0 + 1e-15);

  cfg.L = cfg.R = 2;
  cfg.K = 4;
  lam = design_krstc(cfg);
  EXPECT_LT(max_abs(lam.transpose() * lam, 4.0 * CMatrix::Identity(2, 2)), 1e-15);

  cfg.L = cfg.R = 4;
  EXPECT_LT(max_abs(design_krstc(cfg), hadamard(4).cast<cplx>()), 1e-15);
  cfg.L = cfg.R = 8;
  EXPECT_THROW(design_krstc(cfg), ConfigError);
}

TEST(Krstc, CodingSlicesAreFullRankDiagonals) {
  ScenarioConfig cfg;
  cfg.scheme = Scheme::krstc;
  const CodingSet c = design_coding(cfg);
  for (Index k = 0; k < cfg.K; ++k) EXPECT_EQ(numerical_rank(c.coding_k(k)), cfg.L);
  EXPECT_EQ(c.streams(), cfg.L);
  EXPECT_EQ(c.subframes(), cfg.K);
  EXPECT_EQ(c.elements(), cfg.N);
}

TEST(Symbols, Anchors) {
  ScenarioConfig cfg;
  Rng rng(9);
  SymbolMatrix s = gen_symbols(cfg, rng);
  EXPECT_EQ(s.x(0, 0), cplx(1.0));
  EXPECT_EQ(s.x.rows(), cfg.R);
  EXPECT_EQ(s.x.cols(), cfg.T);

  cfg.scheme = Scheme::krstc;
  s = gen_symbols(cfg, rng);
  EXPECT_EQ(s.x.col(0), CMatrix(CMatrix::Ones(cfg.L, 1)));
}

TEST(Symbols, UnitEnergyOnConstellation) {
  ScenarioConfig cfg;
  cfg.R = 4;
  cfg.T = 25001;
  Rng rng(10);
  const SymbolMatrix s = gen_symbols(cfg, rng);
  const CMatrix data = s.x.rightCols(cfg.T - 1);
  EXPECT_NEAR(mean_power(data), 1.0, 0.02);
  const QamConstellation qam(64);
  for (Index t = 0; t < 50; ++t) {
    for (Index r = 0; r < cfg.R; ++r) {
      const cplx v = data(r, t);
      EXPECT_EQ(qam.point(qam.decide(v)), v);
    }
  }
}

TEST(Symbols, RejectsUnsupportedOrder) {
  ScenarioConfig cfg;
  cfg.constellation = 8;
  Rng rng(1);
  EXPECT_THROW(gen_symbols(cfg, rng), ConfigError);
}

}  // namespace
}  // namespace hris
