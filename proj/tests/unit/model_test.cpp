#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <topolearn/error.hpp>
#include <topolearn/instances.hpp>
#include <topolearn/model.hpp>

#include "oracles.hpp"

namespace topolearn {
namespace {

GenerativeModel two_node_model() {
  UndirectedGraph g(2);
  g.add_edge(0, 1);
  return GenerativeModel(g, {"a", "b"}, {{{0, 1}, 0.4}, {{1, 0}, -0.3}}, {{{0.5}, 1.0}, {{-0.2}, 0.5}});
}

double relative_error(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

TEST(GenerativeModel, ValidatesCouplings) {
  UndirectedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const std::vector<NodeDynamics> dyn(3);
  EXPECT_THROW(GenerativeModel(g, {"1", "2", "3"}, {{{0, 1}, 0.5}, {{1, 0}, 0.5}, {{1, 2}, 0.5}}, dyn), Error);
  EXPECT_THROW(GenerativeModel(g, {"1", "2", "3"},
                               {{{0, 1}, 0.5}, {{1, 0}, 0.5}, {{1, 2}, 0.5}, {{2, 1}, 0.5}, {{0, 2}, 0.1}}, dyn),
               Error);
  std::vector<NodeDynamics> bad = dyn;
  bad[1].noise_variance = 0.0;
  EXPECT_THROW(GenerativeModel(g, {"1", "2", "3"}, {{{0, 1}, 0.5}, {{1, 0}, 0.5}, {{1, 2}, 0.5}, {{2, 1}, 0.5}}, bad),
               Error);
}

TEST(GenerativeModel, SevenChainIsStable) {
  const auto model = oracle::chain7_model();
  EXPECT_NEAR(model.spectral_radius(), 0.8556, 5e-4);
  EXPECT_NO_THROW(model.require_stable());
  EXPECT_EQ(model.topology(), oracle::chain7());
}

TEST(GenerativeModel, UnstableModelRejected) {
  UndirectedGraph g(2);
  g.add_edge(0, 1);
  const GenerativeModel model(g, {"a", "b"}, {{{0, 1}, 1.2}, {{1, 0}, 1.2}}, {{}, {}});
  EXPECT_GT(model.spectral_radius(), 1.0);
  EXPECT_THROW(model.require_stable(), NumericalError);
  EXPECT_THROW(simulate(model, 100, 1), NumericalError);
}

TEST(AnalyticPsd, MatchesDenseInversion) {
  const auto model = oracle::chain7_model();
  EXPECT_LE(relative_error(analytic_psd_at(model, 0.0), oracle::dense_psd(model, 0.0)), 1e-12);
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_model(random_tree(2 + rep % 11, rng), rng);
    for (double w : {-2.9, -0.7, 0.0, 0.3, 1.9, std::numbers::pi}) {
      EXPECT_LE(relative_error(analytic_psd_at(m, w), oracle::dense_psd(m, w)), 1e-10);
    }
  }
}

TEST(AnalyticPsd, DecoupledIsDiagonalAutoregressive) {
  const GenerativeModel model(UndirectedGraph(2), {"a", "b"}, {}, {{{0.5}, 2.0}, {{0.3, -0.2}, 1.0}});
  const auto grid = FrequencyGrid::dft(32);
  const auto psd = analytic_psd(model, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid[k];
    const Complex z = std::polar(1.0, w);
    EXPECT_NEAR(std::abs(psd.at(k)(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(psd.at(k)(0, 0).real(), 2.0 / std::norm(z - 0.5), 1e-12);
    EXPECT_NEAR(psd.at(k)(1, 1).real(), 1.0 / std::norm(z * z - 0.3 * z + 0.2), 1e-12);
  }
}

TEST(AnalyticPsd, ConjugateSymmetricAndPositiveDefinite) {
  const auto model = oracle::chain7_model();
  const auto grid = FrequencyGrid::dft(64);
  const auto psd = analytic_psd(model, grid);
  EXPECT_LE(psd.hermitian_defect(), 1e-12);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::size_t m = grid.mirror_index(k);
    if (m < grid.size()) {
      EXPECT_LE((psd.at(m) - psd.at(k).conjugate()).norm(), 1e-12 * psd.at(k).norm());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(psd.at(k));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(AnalyticPsd, AutocovarianceMatchesLyapunovSolution) {
  // Inverse DFT of the spectrum on a fine grid against E x[t+tau] x[t]^T.
  const auto model = oracle::chain7_model();
  const std::size_t m = 4096;
  const auto grid = FrequencyGrid::dft(m);
  const auto psd = analytic_psd(model, grid);
  const auto lags = oracle::first_order_autocovariances(model, 3);
  for (std::size_t tau = 0; tau <= 3; ++tau) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(7, 7);
    for (std::size_t k = 0; k < grid.size(); ++k) r += psd.at(k) * std::polar(1.0, grid[k] * static_cast<double>(tau));
    r /= static_cast<double>(m);
    EXPECT_LE((r.real() - lags[tau]).norm(), 1e-8 * lags[0].norm()) << "lag " << tau;
    EXPECT_LE(r.imag().norm(), 1e-8 * lags[0].norm());
  }
}

TEST(AnalyticInversePsd, ProductWithPsdIsIdentity) {
  std::mt19937_64 rng(22);
  const auto grid = FrequencyGrid::dft(64);
  for (int rep = 0; rep < 30; ++rep) {
    const auto m = random_model(random_tree(2 + rep % 11, rng), rng);
    const auto psd = analytic_psd(m, grid);
    const auto inv = analytic_inverse_psd(m, grid);
    const auto id = Eigen::MatrixXcd::Identity(m.node_count(), m.node_count());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      EXPECT_LE((inv.at(k) * psd.at(k) - id).norm() / std::sqrt(double(m.node_count())), 1e-9);
    }
  }
}

TEST(AnalyticInversePsd, SupportIsMoralGraph) {
  std::mt19937_64 rng(23);
  const auto grid = FrequencyGrid::dft(32);
  for (int rep = 0; rep < 30; ++rep) {
    const auto m = random_model(random_tree(3 + rep % 13, rng), rng);
    const auto hops = oracle::all_pairs_hops(m.topology());
    const auto inv = analytic_inverse_psd(m, grid);
    for (NodeId i = 0; i < m.node_count(); ++i) {
      for (NodeId j = 0; j < m.node_count(); ++j) {
        double peak = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) peak = std::max(peak, std::abs(inv.at(k)(i, j)));
        if (hops[i][j] >= 3) {
          EXPECT_EQ(peak, 0.0);
        } else {
          EXPECT_GT(peak, 1e-8);
        }
      }
    }
  }
}

TEST(AnalyticInversePsd, TwoHopEntryIsRealConstant) {
  // Through common neighbour k the entry reduces to b_ki b_kj / sigma_k^2 at every frequency.
  const auto model = oracle::chain7_model();
  for (double w : {-2.0, -0.4, 0.1, 1.3, 3.0}) {
    const Complex e = analytic_inverse_psd_entry(model, 0, 2, w);
    EXPECT_NEAR(e.real(), model.coupling(1, 0) * model.coupling(1, 2) / model.dynamics(1).noise_variance, 1e-12);
    EXPECT_NEAR(e.imag(), 0.0, 1e-12);
  }
}

TEST(AnalyticInversePsd, LeafEdgePhaseVaries) {
  const auto model = oracle::chain7_model();
  const double a = std::arg(analytic_inverse_psd_entry(model, 0, 1, 0.5));
  const double b = std::arg(analytic_inverse_psd_entry(model, 0, 1, 2.0));
  EXPECT_GT(std::abs(a - b), 0.1);
}

TEST(Simulate, DeterministicAndChunkInvariant) {
  const auto model = oracle::chain7_model();
  const auto a = simulate(model, 5000, 42);
  const auto b = simulate(model, 5000, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, simulate(model, 5000, 43));

  Simulator sim(model, 42);
  std::vector<double> rows(5000 * 7);
  std::size_t done = 0;
  for (std::size_t chunk : {1u, 7u, 300u, 1024u}) {
    sim.generate(std::span<double>(rows.data() + done * 7, chunk * 7));
    done += chunk;
  }
  sim.generate(std::span<double>(rows.data() + done * 7, (5000 - done) * 7));
  std::vector<double> expected(5000 * 7);
  a.copy_rows(0, 5000, expected);
  EXPECT_EQ(rows, expected);
}

TEST(Simulate, DecoupledChannelsAreUncorrelated) {
  const GenerativeModel model(UndirectedGraph(2), {"a", "b"}, {}, {{{0.5}, 1.0}, {{-0.3}, 1.0}});
  const auto panel = simulate(model, 200'000, 3);
  const double se = 1.0 / std::sqrt(200'000.0);
  const double c00 = oracle::sample_cross_covariance(panel, 0, 0, 0);
  const double c11 = oracle::sample_cross_covariance(panel, 1, 1, 0);
  EXPECT_LE(std::abs(oracle::sample_cross_covariance(panel, 0, 1, 0)) / std::sqrt(c00 * c11), 4 * se);
}

TEST(Simulate, TwoNodeCovariancesWithinThreeStandardErrors) {
  const auto model = two_node_model();
  const std::size_t length = 400'000;
  const auto panel = simulate(model, length, 9);
  const std::size_t horizon = 200;
  const auto r = oracle::first_order_autocovariances(model, horizon + 3);
  auto cov = [&](NodeId i, NodeId j, long lag) {
    return lag >= 0 ? r[static_cast<std::size_t>(lag)](i, j) : r[static_cast<std::size_t>(-lag)](j, i);
  };
  for (NodeId i = 0; i < 2; ++i) {
    for (NodeId j = 0; j < 2; ++j) {
      for (long tau = 0; tau <= 3; ++tau) {
        // Bartlett's large-sample variance of the lagged cross-covariance estimate.
        double var = 0.0;
        for (long k = -static_cast<long>(horizon); k <= static_cast<long>(horizon); ++k) {
          var += cov(i, i, k) * cov(j, j, k) + cov(i, j, k + tau) * cov(j, i, k - tau);
        }
        const double se = std::sqrt(var / static_cast<double>(length));
        EXPECT_NEAR(oracle::sample_cross_covariance(panel, i, j, static_cast<std::size_t>(tau)), cov(i, j, tau), 3 * se)
            << i << j << " lag " << tau;
      }
    }
  }
}

TEST(GenerativeModel, PermutationRelabelsSpectra) {
  const auto model = oracle::chain7_model();
  const std::vector<NodeId> perm{6, 2, 0, 5, 3, 1, 4};
  const auto p = model.permuted(perm);
  for (double w : {0.2, 1.7}) {
    const auto a = analytic_psd_at(model, w);
    const auto b = analytic_psd_at(p, w);
    for (NodeId i = 0; i < 7; ++i) {
      for (NodeId j = 0; j < 7; ++j) EXPECT_NEAR(std::abs(b(i, j) - a(perm[i], perm[j])), 0.0, 1e-12);
    }
  }
  EXPECT_EQ(p.labels()[0], "7");
}

TEST(TimeSeriesPanel, ValidateRejectsNonFinite) {
  TimeSeriesPanel panel({"a", "b"}, 4);
  EXPECT_NO_THROW(panel.validate());
  panel(1, 2) = std::nan("");
  EXPECT_THROW(panel.validate(), DataError);
}

}  // namespace
}  // namespace topolearn
