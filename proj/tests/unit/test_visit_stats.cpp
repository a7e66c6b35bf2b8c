#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "visitlab/error.hpp"
#include "visitlab/visit_stats.hpp"

using namespace visitlab;

namespace {

class ScriptStream final : public SymbolStream {
 public:
  explicit ScriptStream(std::vector<std::int64_t> seq) : seq_(std::move(seq)) {}
  void advance() override { ++t_; }
  std::size_t copies() const override { return 1; }
  std::int64_t symbol(std::size_t) const override { return seq_.at(t_); }

 private:
  std::vector<std::int64_t> seq_;
  std::size_t t_ = 0;
};

ClusterStats stats_of(const std::vector<std::uint8_t>& I, std::size_t K, std::size_t L) {
  ClusterStats s(K, L);
  s.accumulate(I);
  return s;
}

std::vector<std::uint8_t> random_indicator(std::mt19937_64& gen, std::size_t n, double p) {
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> I(n);
  for (auto& v : I) v = b(gen);
  return I;
}

}  // namespace

TEST(CountVisits, NeverHit) {
  ScriptStream s(std::vector<std::int64_t>(100, 0));
  EXPECT_EQ(count_visits(s, HalfLine{1}, 1.0, {0.25}), 0u);
}

TEST(CountVisits, HorizonArithmetic) {
  ScriptStream s(std::vector<std::int64_t>(100, 1));
  EXPECT_EQ(count_visits(s, HalfLine{1}, 1.0, {0.25}), 5u);  // i = 0..4
}

TEST(CountVisits, HandBuiltIndicator) {
  const std::vector<std::int64_t> seq{0, 2, 0, 0, 3, 1, 4, 0, 0, 0, 5, 2, 0, 1, 0, 6, 0, 0, 2, 0, 0, 0};
  ScriptStream s(seq);
  // horizon floor(1 / 0.05) = 20
  std::uint64_t direct = 0;
  for (std::size_t i = 0; i <= 20; ++i) direct += seq[i] >= 2;
  EXPECT_EQ(count_visits(s, HalfLine{2}, 1.0, {0.05}), direct);
}

TEST(CountVisits, HorizonGuard) {
  ScriptStream s({0});
  try {
    count_visits(s, HalfLine{1}, 10.0, {1e-9});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource);
  }
}

TEST(Alpha, SingleHitPerTrajectory) {
  std::vector<ClusterStats> batches;
  for (int b = 0; b < 8; ++b) {
    std::vector<std::uint8_t> I(100, 0);
    I[10 + b] = 1;
    batches.push_back(stats_of(I, 5, 30));
  }
  const AlphaEstimates a = estimate_alpha(batches, 1);
  EXPECT_DOUBLE_EQ(a.alpha[0], 1.0);
  for (std::size_t k = 1; k < a.alpha.size(); ++k) EXPECT_EQ(a.alpha[k], 0.0);
  for (std::size_t l = 1; l < a.alpha_hat.size(); ++l) EXPECT_EQ(a.alpha_hat[l], 0.0);
  EXPECT_DOUBLE_EQ(a.alpha_hat[0], 1.0);
}

TEST(Alpha, PeriodicReturns) {
  const std::size_t m = 4;
  std::vector<std::uint8_t> I(200, 0);
  for (std::size_t i = 0; i < I.size(); i += m) I[i] = 1;
  const ClusterStats s = stats_of(I, m, 2 * m);
  const AlphaEstimates a = estimate_alpha(std::span(&s, 1), 1);
  ASSERT_GE(a.alpha.size(), 3u);
  EXPECT_DOUBLE_EQ(a.alpha[2], 1.0);
  EXPECT_EQ(a.alpha[0], 0.0);
  EXPECT_EQ(a.alpha[1], 0.0);
}

TEST(Alpha, EntriesRespectLookahead) {
  // hits at 0 and 9 with N = 9: only the first has a full L = 5 window
  std::vector<std::uint8_t> I(10, 0);
  I[0] = I[9] = 1;
  const ClusterStats s = stats_of(I, 2, 5);
  EXPECT_EQ(s.entries_L(), 1u);
  EXPECT_EQ(s.hits(), 2u);
}

TEST(Alpha, TooFewEntries) {
  std::vector<std::uint8_t> I(50, 0);
  I[3] = 1;
  const ClusterStats s = stats_of(I, 2, 5);
  try {
    estimate_alpha(std::span(&s, 1), 10);
    FAIL();
  } catch (const InsufficientDataError& e) {
    EXPECT_EQ(e.count(), 1u);
  }
}

TEST(Alpha, SumsToOneAndHatNonincreasing) {
  std::mt19937_64 gen(21);
  std::vector<ClusterStats> batches;
  for (int b = 0; b < 16; ++b) batches.push_back(stats_of(random_indicator(gen, 500, 0.05), 6, 20));
  const AlphaEstimates a = estimate_alpha(batches, 1);
  EXPECT_NEAR(std::accumulate(a.alpha.begin(), a.alpha.end(), 0.0), 1.0, 1e-12);
  for (std::size_t l = 1; l < a.alpha_hat.size(); ++l) EXPECT_LE(a.alpha_hat[l], a.alpha_hat[l - 1]);
  EXPECT_DOUBLE_EQ(a.alpha_hat[0], 1.0);
}

TEST(AlphaHat, MatchesDirectCount) {
  std::mt19937_64 gen(4);
  const auto I = random_indicator(gen, 300, 0.1);
  const std::size_t K = 7;
  const ClusterStats s = stats_of(I, K, 15);
  const AlphaEstimates a = estimate_alpha_hat(std::span(&s, 1), 1);
  // direct: entries i with i + K <= N, count further hits in (i, i+K]
  const std::size_t N = I.size() - 1;
  std::vector<double> atleast(K + 2, 0.0);
  double entries = 0;
  for (std::size_t i = 0; i + K <= N; ++i) {
    if (!I[i]) continue;
    entries += 1;
    std::size_t c = 0;
    for (std::size_t j = i + 1; j <= i + K; ++j) c += I[j];
    for (std::size_t l = 0; l <= c; ++l) atleast[l] += 1;
  }
  for (std::size_t l = 0; l < a.alpha_hat.size(); ++l) EXPECT_NEAR(a.alpha_hat[l], atleast[l] / entries, 1e-15);
}

TEST(LambdaTilde, IsolatedHits) {
  std::vector<std::uint8_t> I(100, 0);
  for (std::size_t i = 10; i < 90; i += 12) I[i] = 1;
  const ClusterStats s = stats_of(I, 5, 5);
  const LambdaTildeEstimates l = estimate_lambda_tilde(std::span(&s, 1));
  EXPECT_DOUBLE_EQ(l.lambda_tilde[0], 1.0);
  for (std::size_t k = 1; k < l.lambda_tilde.size(); ++k) EXPECT_EQ(l.lambda_tilde[k], 0.0);
}

TEST(LambdaTilde, PartitionIdentity) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ClusterStats> batches;
    for (int b = 0; b < 4; ++b) batches.push_back(stats_of(random_indicator(gen, 400, 0.08), 1 + trial % 6, 10));
    const LambdaTildeEstimates l = estimate_lambda_tilde(batches);
    double s = 0.0;
    for (std::size_t k = 0; k < l.lambda_tilde.size(); ++k) s += (k + 1) * l.lambda_tilde[k];
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LambdaTilde, EdgeHitsDiscarded) {
  std::vector<std::uint8_t> I(20, 0);
  I[1] = I[18] = 1;
  const ClusterStats s = stats_of(I, 3, 3);
  EXPECT_EQ(s.interior_hits(), 0u);
  EXPECT_THROW(estimate_lambda_tilde(std::span(&s, 1)), InsufficientDataError);
}

TEST(Merge, CommutativeAndAssociative) {
  std::mt19937_64 gen(2);
  const auto a = stats_of(random_indicator(gen, 300, 0.1), 4, 12);
  const auto b = stats_of(random_indicator(gen, 200, 0.2), 4, 12);
  const auto c = stats_of(random_indicator(gen, 250, 0.05), 4, 12);
  ClusterStats ab = a, ba = b, ab_c = a, a_bc = a, bc = b;
  ab.merge(b);
  ba.merge(a);
  EXPECT_EQ(ab, ba);
  ab_c.merge(b);
  ab_c.merge(c);
  bc.merge(c);
  a_bc.merge(bc);
  EXPECT_EQ(ab_c, a_bc);

  WSampleSet x, y, pooled;
  for (std::uint64_t w : {0, 2, 2, 5}) x.add(w), pooled.add(w);
  for (std::uint64_t w : {1, 2, 7}) y.add(w), pooled.add(w);
  WSampleSet xy = x, yx = y;
  xy.merge(y);
  yx.merge(x);
  EXPECT_EQ(xy, yx);
  EXPECT_EQ(xy, pooled);
  EXPECT_EQ(empirical_pmf(xy).probs, empirical_pmf(pooled).probs);
}

TEST(EmpiricalPmf, PointMassAndEmpty) {
  WSampleSet one;
  one.add(3);
  const DiscretePMF p = empirical_pmf(one);
  EXPECT_EQ(p.probs, (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(p.tail_mass, 0.0);
  EXPECT_THROW(empirical_pmf(WSampleSet{}), InsufficientDataError);
}

TEST(EmpiricalPmf, SamplerConsistency) {
  const CompoundPoissonSpec spec{2.0, {0.3, 0.2, 0.1}};
  CompoundPoissonSampler sampler(spec);
  Rng rng(31);
  WSampleSet w;
  for (int i = 0; i < 1'000'000; ++i) w.add(sampler(rng));
  EXPECT_LE(tv_distance(empirical_pmf(w), cp_pmf(spec, 80)), 0.005);
}

TEST(Simulation, WorkerCountDoesNotMatter) {
  const HouseOfCardsSpec h = HouseOfCardsSpec::constant(0.5);
  SimulationOptions opt;
  opt.horizon = 500;
  opt.trajectories = 3000;
  opt.seed = 9;
  opt.K = 5;
  opt.L = 20;
  opt.batches = 32;
  opt.workers = 1;
  const SimulationResult a = simulate_visits(h, RunLength{6, 1}, opt);
  opt.workers = 4;
  const SimulationResult b = simulate_visits(h, RunLength{6, 1}, opt);
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.clusters, b.clusters);
  EXPECT_EQ(a.w_total().total(), 3000u);
}

TEST(Simulation, SingleTrajectory) {
  SimulationOptions opt;
  opt.horizon = 100;
  opt.trajectories = 1;
  opt.K = 2;
  opt.L = 5;
  const SimulationResult r = simulate_visits(HouseOfCardsSpec::constant(0.5), RunLength{3, 1}, opt);
  EXPECT_EQ(r.w_total().total(), 1u);
  EXPECT_EQ(r.w_total().counts().size(), 1u);
}

TEST(Simulation, ResourceGuard) {
  SimulationOptions opt;
  opt.horizon = 100'000'000;
  opt.trajectories = 1000;
  EXPECT_THROW(simulate_visits(HouseOfCardsSpec::constant(0.5), RunLength{3, 1}, opt), Error);
}
