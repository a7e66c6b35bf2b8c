#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "visitlab/error.hpp"
#include "visitlab/targets.hpp"
#include "visitlab/visit_stats.hpp"

using namespace visitlab;

namespace {

// Replays fixed sequences, one per copy.
class ScriptStream final : public SymbolStream {
 public:
  explicit ScriptStream(std::vector<std::vector<std::int64_t>> seqs) : seqs_(std::move(seqs)) {}
  void advance() override { ++t_; }
  std::size_t copies() const override { return seqs_.size(); }
  std::int64_t symbol(std::size_t copy) const override { return seqs_[copy].at(t_); }

 private:
  std::vector<std::vector<std::int64_t>> seqs_;
  std::size_t t_ = 0;
};

// The window starting at i, tested directly.
std::vector<std::uint8_t> brute_force(const std::vector<std::vector<std::int64_t>>& s, const TargetSpec& target,
                                      std::size_t horizon) {
  std::vector<std::uint8_t> out(horizon + 1, 0);
  for (std::size_t i = 0; i <= horizon; ++i) {
    bool in = true;
    if (const auto* c = std::get_if<Cylinder>(&target)) {
      for (std::size_t k = 0; k < c->word.size(); ++k) in = in && s[0][i + k] == c->word[k];
    } else if (const auto* r = std::get_if<RunLength>(&target)) {
      for (std::size_t k = 0; k < r->n; ++k) in = in && s[0][i + k] >= r->l;
    } else if (const auto* h = std::get_if<HalfLine>(&target)) {
      in = s[0][i] >= h->n;
    } else if (const auto* y = std::get_if<SyncCylinder>(&target)) {
      for (std::size_t k = 0; k < y->n; ++k)
        for (std::size_t c = 1; c < y->m; ++c) in = in && s[c][i + k] == s[0][i + k];
    }
    out[i] = in;
  }
  return out;
}

}  // namespace

TEST(Hits, ConstantStreamRunLength) {
  ScriptStream s({std::vector<std::int64_t>(30, 4)});
  const auto I = hits(s, RunLength{5, 3}, 20);
  EXPECT_EQ(I, std::vector<std::uint8_t>(21, 1));
}

TEST(Hits, IdenticalStreamsSync) {
  std::vector<std::int64_t> a{0, 1, 1, 0, 2, 1, 0, 0, 1, 2, 2, 1, 0, 1};
  ScriptStream s({a, a});
  EXPECT_EQ(hits(s, SyncCylinder{3, 2}, 10), std::vector<std::uint8_t>(11, 1));
}

TEST(Hits, CraftedSequenceMatchesBruteForce) {
  const std::vector<std::int64_t> seq{0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 0};
  const std::vector<TargetSpec> targets{Cylinder{{0, 0}},    Cylinder{{0, 0, 1}}, Cylinder{{0, 1, 0, 0}},
                                        RunLength{2, 0},     HalfLine{1},         Cylinder{{0, 0, 0}}};
  for (const auto& t : targets) {
    const std::size_t horizon = seq.size() - window_length(t);
    ScriptStream s({seq});
    EXPECT_EQ(hits(s, t, horizon), brute_force({seq}, t, horizon)) << describe(t);
  }
}

TEST(Hits, RandomSequencesMatchBruteForce) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> sym(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> a(60), b(60);
    for (auto& v : a) v = sym(gen);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = (gen() % 3 == 0) ? sym(gen) : a[i];
    std::vector<std::int64_t> w(1 + gen() % 4);
    for (auto& v : w) v = sym(gen) % 2;
    const std::vector<TargetSpec> targets{Cylinder{w}, RunLength{1 + gen() % 3, 1}, HalfLine{2},
                                          SyncCylinder{1 + gen() % 3, 2}};
    for (const auto& t : targets) {
      const std::size_t horizon = 60 - window_length(t);
      ScriptStream s({a, b});
      ASSERT_EQ(hits(s, t, horizon), brute_force({a, b}, t, horizon)) << describe(t);
    }
  }
}

TEST(Hits, TailWindowsNeverCounted) {
  // A hit needing symbols past the last generated one cannot appear.
  ScriptStream s({{1, 1, 1, 1}});
  const auto I = hits(s, RunLength{2, 1}, 2);
  EXPECT_EQ(I.size(), 3u);
}

TEST(Families, Nested) {
  std::mt19937_64 gen(5);
  const std::vector<TargetFamily> fams{
      {TargetFamily::Kind::cylinder, {0, 1}, true, 1, 2},
      {TargetFamily::Kind::run_length, {}, true, 1, 2},
      {TargetFamily::Kind::half_line, {}, true, 1, 2},
      {TargetFamily::Kind::sync_cylinder, {}, true, 1, 2},
  };
  for (const auto& f : fams)
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + gen() % 5;
      std::vector<std::int64_t> a(n + 1), b(n + 1);
      for (auto& v : a) v = static_cast<std::int64_t>(gen() % 2 + (f.kind == TargetFamily::Kind::half_line ? gen() % 6 : 0));
      for (std::size_t i = 0; i <= n; ++i) b[i] = gen() % 4 == 0 ? 1 - a[i] : a[i];
      const auto big = brute_force({a, b}, f.at(double(n)), 0);
      const auto small = brute_force({a, b}, f.at(double(n + 1)), 0);
      if (small[0]) EXPECT_TRUE(big[0]) << f.name() << ' ' << n;
    }
}

TEST(Measure, GeoDiagonalLebesgue) {
  const TargetMeasure m = measure_exact(GeoDiagonal{0.1, 2}, DoeblinChainSpec{0.5, 2});
  EXPECT_NEAR(m.value, 0.19, 1e-15);
  EXPECT_EQ(m.method, TargetMeasure::Method::exact);
  EXPECT_EQ(m.std_error, 0.0);
}

TEST(Measure, MarkovCylinderPathSum) {
  // Q(0,0) = 0.2 and pi(0) = 1/7 force Q(1,0) = 0.8/6
  const FiniteMarkovSpec m = make_markov(Matrix{{0.2, 0.8}, {0.8 / 6, 1 - 0.8 / 6}});
  ASSERT_NEAR(m.pi[0], 1.0 / 7, 1e-14);
  EXPECT_NEAR(measure_exact(Cylinder{{0, 0, 0}}, m).value, 0.2 * 0.2 / 7, 1e-15);
}

TEST(Measure, HocRunLength) {
  // n symbols >= 1 in a row: start at s >= 1, then survive n - 1 steps
  const HouseOfCardsSpec h = HouseOfCardsSpec::constant(0.5);
  EXPECT_NEAR(measure_exact(RunLength{3, 1}, h).value, 1.0 / 8, 1e-12);
  EXPECT_NEAR(measure_exact(RunLength{4, 1}, h).value, 1.0 / 16, 1e-12);
}

TEST(Measure, ExactAgreesWithMonteCarlo) {
  const std::vector<std::pair<TargetSpec, SystemSpec>> cases{
      {Cylinder{{0, 1, 1}}, make_markov(Matrix{{0.3, 0.7}, {0.4, 0.6}})},
      {RunLength{3, 1}, HouseOfCardsSpec::constant(0.4)},
      {RunLength{2, 2}, HouseOfCardsSpec::alternating(0.3, 0.6)},
      {HalfLine{3},
       [] {
         RegenerativeSpec r;
         r.p = SymbolLaw::geometric(1, 0.5);
         r.q = RegenerativeSpec::geometric_lengths(0.5);
         return SystemSpec{r};
       }()},
      {SyncCylinder{3, 2}, make_product_chain({Matrix{{0.2, 0.8}, {0.3, 0.7}}, Matrix{{0.8, 0.2}, {0.1, 0.9}}},
                                              {CouplingKind::maximal, 0.0})},
      {GeoDiagonal{0.05, 2}, DoeblinChainSpec{0.5, 2}},
      {Cylinder{{1, 1}}, FactorProductSpec{0.3}},
  };
  for (const auto& [target, system] : cases) {
    const TargetMeasure exact = measure_exact(target, system);
    ASSERT_EQ(exact.method, TargetMeasure::Method::exact) << describe(target);
    const TargetMeasure mc = measure_monte_carlo(target, system, {1'000'000, 77});
    EXPECT_NEAR(mc.value, exact.value, 4 * mc.std_error + 1e-12) << describe(target) << " on " << system_name(system);
  }
}

TEST(OuterMeasures, CylinderAtPoint) {
  const FiniteMarkovSpec m = make_markov(Matrix{{0.5, 0.5}, {0.5, 0.5}});
  TargetFamily f{TargetFamily::Kind::cylinder, {0}, true, 1, 2};
  const auto v = outer_measures(f, m, 6, 1, 6);
  for (std::size_t j = 1; j <= 6; ++j) EXPECT_NEAR(v[j - 1], std::pow(0.5, double(j)), 1e-15);
}

TEST(OuterMeasures, RunLengthUsesShorterRuns) {
  const HouseOfCardsSpec h = HouseOfCardsSpec::constant(0.5);
  TargetFamily f{TargetFamily::Kind::run_length, {}, true, 1, 2};
  const auto v = outer_measures(f, h, 5, 1, 5);
  for (std::size_t j = 1; j <= 5; ++j) EXPECT_NEAR(v[j - 1], measure_exact(RunLength{j, 1}, h).value, 1e-15);
}

TEST(OuterMeasures, HalfLineIsFlat) {
  RegenerativeSpec r;
  r.p = SymbolLaw::geometric(1, 0.5);
  r.q = RegenerativeSpec::geometric_lengths(0.5);
  TargetFamily f{TargetFamily::Kind::half_line, {}, true, 1, 2};
  const auto v = outer_measures(f, r, 6, 1, 6);
  for (double x : v) EXPECT_NEAR(x, measure_exact(HalfLine{6}, r).value, 1e-15);
}

TEST(Compatibility, CopyCountChecked) {
  EXPECT_THROW(check_compatible(make_markov(Matrix{{0.5, 0.5}, {0.5, 0.5}}), SyncCylinder{2, 2}), Error);
  EXPECT_THROW(check_compatible(HouseOfCardsSpec::constant(0.5), GeoDiagonal{0.1, 2}), Error);
  EXPECT_NO_THROW(check_compatible(DoeblinChainSpec{0.5, 2}, GeoDiagonal{0.1, 2}));
}
