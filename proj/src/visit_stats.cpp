#include "visitlab/visit_stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "visitlab/error.hpp"

namespace visitlab {

// ---------------------------------------------------------------- WSampleSet

void WSampleSet::add(std::uint64_t w, std::uint64_t times) {
  if (times == 0) return;
  counts_[w] += times;
  total_ += times;
}

void WSampleSet::merge(const WSampleSet& other, std::uint64_t weight) {
  for (const auto& [w, c] : other.counts_) add(w, c * weight);
}

double WSampleSet::mean() const {
  if (total_ == 0) return 0.0;
  double s = 0.0;
  for (const auto& [w, c] : counts_) s += static_cast<double>(w) * static_cast<double>(c);
  return s / static_cast<double>(total_);
}

// ---------------------------------------------------------------- ClusterStats

namespace {

void bump(std::vector<std::uint64_t>& v, std::size_t i, std::uint64_t by = 1) {
  if (v.size() <= i) v.resize(i + 1, 0);
  v[i] += by;
}

void add_into(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src, std::uint64_t weight) {
  if (dst.size() < src.size()) dst.resize(src.size(), 0);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i] * weight;
}

std::uint64_t sum(const std::vector<std::uint64_t>& v) {
  std::uint64_t s = 0;
  for (auto x : v) s += x;
  return s;
}

}  // namespace

void ClusterStats::accumulate(std::span<const std::uint8_t> ind) {
  const std::size_t n = ind.size();
  if (n == 0) return;
  // prefix[i] = hits among I_0..I_{i-1}
  std::vector<std::uint32_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + ind[i];
  const std::size_t last = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ind[i]) continue;
    ++hits_;
    if (i + L_ <= last) bump(further_L_, prefix[i + L_ + 1] - prefix[i + 1]);
    if (i + K_ <= last) bump(further_K_, prefix[i + K_ + 1] - prefix[i + 1]);
    if (i >= K_ && i + K_ <= last) bump(z_hist_, prefix[i + K_ + 1] - prefix[i - K_]);
  }
}

void ClusterStats::merge(const ClusterStats& other, std::uint64_t weight) {
  if (K_ != other.K_ || L_ != other.L_) fail(ErrorKind::invalid_input, "ClusterStats: merging different window radii");
  add_into(further_L_, other.further_L_, weight);
  add_into(further_K_, other.further_K_, weight);
  add_into(z_hist_, other.z_hist_, weight);
  hits_ += other.hits_ * weight;
}

std::uint64_t ClusterStats::entries_L() const { return sum(further_L_); }
std::uint64_t ClusterStats::entries_K() const { return sum(further_K_); }
std::uint64_t ClusterStats::interior_hits() const { return sum(z_hist_); }

// ---------------------------------------------------------------- bootstrap

std::vector<std::vector<std::uint32_t>> bootstrap_weights(std::size_t batches, std::size_t resamples,
                                                          std::uint64_t seed) {
  std::vector<std::vector<std::uint32_t>> w(resamples, std::vector<std::uint32_t>(batches, 0));
  if (batches == 0) return w;
  Rng rng(seed);
  for (auto& row : w)
    for (std::size_t i = 0; i < batches; ++i) ++row[rng.below(batches)];
  return w;
}

namespace {

ClusterStats merged(std::span<const ClusterStats> batches, const std::vector<std::uint32_t>* weights) {
  if (batches.empty()) fail(ErrorKind::insufficient_data, "no cluster batches");
  ClusterStats out(batches[0].K(), batches[0].L());
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const std::uint64_t w = weights ? (*weights)[b] : 1;
    if (w) out.merge(batches[b], w);
  }
  return out;
}

// Runs f on the pooled stats and on every bootstrap resample; returns the
// pooled value and per-coordinate standard deviations over resamples.
template <class F>
std::pair<std::vector<double>, std::vector<double>> with_bootstrap(std::span<const ClusterStats> batches,
                                                                   std::size_t resamples, std::uint64_t seed, F f) {
  const auto point = f(merged(batches, nullptr));
  std::vector<double> s1(point.size(), 0.0), s2(point.size(), 0.0);
  std::size_t used = 0;
  if (batches.size() >= 2) {
    for (const auto& w : bootstrap_weights(batches.size(), resamples, seed)) {
      std::vector<double> v;
      try {
        v = f(merged(batches, &w));
      } catch (const InsufficientDataError&) {
        continue;
      }
      v.resize(point.size(), 0.0);
      for (std::size_t i = 0; i < point.size(); ++i) {
        s1[i] += v[i];
        s2[i] += v[i] * v[i];
      }
      ++used;
    }
  }
  std::vector<double> se(point.size(), 0.0);
  if (used >= 2)
    for (std::size_t i = 0; i < point.size(); ++i) {
      const double m = s1[i] / static_cast<double>(used);
      se[i] = std::sqrt(std::max(0.0, (s2[i] - static_cast<double>(used) * m * m) / static_cast<double>(used - 1)));
    }
  return {point, se};
}

std::vector<double> fractions(const std::vector<std::uint64_t>& h) {
  const double total = static_cast<double>(sum(h));
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = static_cast<double>(h[i]) / total;
  return out;
}

// alpha_hat_l = P(at least l-1 further hits) from the exact-count histogram.
std::vector<double> upper_fractions(const std::vector<std::uint64_t>& h) {
  const std::uint64_t total = sum(h);
  std::vector<double> out(h.size());
  std::uint64_t acc = 0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i];
    out[i] = static_cast<double>(acc) / static_cast<double>(total);
  }
  if (!out.empty()) out[0] = 1.0;
  return out;
}

}  // namespace

AlphaEstimates estimate_alpha(std::span<const ClusterStats> batches, std::uint64_t min_entries, std::size_t resamples,
                              std::uint64_t seed) {
  const ClusterStats all = merged(batches, nullptr);
  if (all.entries_L() < std::max<std::uint64_t>(min_entries, 1))
    throw InsufficientDataError("estimate_alpha: too few entries to the target", all.entries_L());
  AlphaEstimates est = estimate_alpha_hat(batches, 1, resamples, seed);
  const std::size_t len = all.further_L().size();
  // alpha_k for k = 1..len, then extremal index and mean cluster.
  auto f = [&](const ClusterStats& s) {
    if (s.entries_L() == 0) throw InsufficientDataError("empty resample", 0);
    auto a = fractions(s.further_L());
    a.resize(len, 0.0);
    double total = 0.0;
    for (double x : a) total += x;
    a.push_back(a[0]);
    a.push_back(a[0] > 0 ? total / a[0] : 0.0);
    return a;
  };
  auto [point, se] = with_bootstrap(batches, resamples, seed, f);
  est.alpha.assign(point.begin(), point.begin() + static_cast<std::ptrdiff_t>(len));
  est.alpha_se.assign(se.begin(), se.begin() + static_cast<std::ptrdiff_t>(len));
  est.entries_L = all.entries_L();
  est.extremal_index = point[len];
  est.extremal_index_se = se[len];
  est.mean_cluster = point[len + 1];
  est.mean_cluster_se = se[len + 1];
  return est;
}

AlphaEstimates estimate_alpha_hat(std::span<const ClusterStats> batches, std::uint64_t min_entries,
                                  std::size_t resamples, std::uint64_t seed) {
  const ClusterStats all = merged(batches, nullptr);
  if (all.entries_K() < std::max<std::uint64_t>(min_entries, 1))
    throw InsufficientDataError("estimate_alpha_hat: too few entries to the target", all.entries_K());
  const std::size_t len = all.further_K().size();
  auto f = [&](const ClusterStats& s) {
    if (s.entries_K() == 0) throw InsufficientDataError("empty resample", 0);
    auto a = upper_fractions(s.further_K());
    a.resize(len, 0.0);
    return a;
  };
  auto [point, se] = with_bootstrap(batches, resamples, seed, f);
  AlphaEstimates est;
  est.alpha_hat = point;
  est.alpha_hat_se = se;
  est.entries_K = all.entries_K();
  return est;
}

LambdaTildeEstimates estimate_lambda_tilde(std::span<const ClusterStats> batches, std::size_t resamples,
                                           std::uint64_t seed) {
  const ClusterStats all = merged(batches, nullptr);
  if (all.interior_hits() == 0)
    throw InsufficientDataError("estimate_lambda_tilde: every hit was within K of a trajectory end", all.hits());
  const std::size_t len = std::max<std::size_t>(all.z_hist().size(), 2) - 1;
  auto f = [&](const ClusterStats& s) {
    if (s.interior_hits() == 0) throw InsufficientDataError("empty resample", 0);
    const double total = static_cast<double>(s.interior_hits());
    std::vector<double> lt(len + 1, 0.0);
    double rate = 0.0;
    for (std::size_t z = 1; z < s.z_hist().size() && z <= len; ++z) {
      lt[z - 1] = static_cast<double>(s.z_hist()[z]) / total / static_cast<double>(z);
      rate += lt[z - 1];
    }
    lt[len] = 1.0 / rate;
    return lt;
  };
  auto [point, se] = with_bootstrap(batches, resamples, seed, f);
  LambdaTildeEstimates est;
  est.lambda_tilde.assign(point.begin(), point.begin() + static_cast<std::ptrdiff_t>(len));
  est.se.assign(se.begin(), se.begin() + static_cast<std::ptrdiff_t>(len));
  est.hits = all.interior_hits();
  est.mean_cluster = point[len];
  est.mean_cluster_se = se[len];
  return est;
}

DiscretePMF empirical_pmf(const WSampleSet& samples) {
  if (samples.total() == 0) throw InsufficientDataError("empirical_pmf: no samples", 0);
  DiscretePMF pmf;
  pmf.probs.assign(samples.counts().rbegin()->first + 1, 0.0);
  const double total = static_cast<double>(samples.total());
  for (const auto& [w, c] : samples.counts()) pmf.probs[w] = static_cast<double>(c) / total;
  pmf.tail_mass = 0.0;
  return pmf;
}

std::uint64_t kac_horizon(double t, double mu) {
  if (!(mu > 0.0) || !(t > 0.0)) fail(ErrorKind::invalid_input, "Kac horizon needs t > 0 and mu > 0");
  const double n = std::floor(t / mu);
  if (n > static_cast<double>(kMaxHorizon))
    fail(ErrorKind::resource, "Kac horizon t/mu exceeds 1e9 steps; reduce t or use a larger target");
  return static_cast<std::uint64_t>(n);
}

std::uint64_t count_visits(SymbolStream& stream, const TargetSpec& target, double t, const TargetMeasure& mu) {
  const auto ind = hits(stream, target, kac_horizon(t, mu.value));
  std::uint64_t w = 0;
  for (auto b : ind) w += b;
  return w;
}

// ---------------------------------------------------------------- simulation

WSampleSet SimulationResult::w_total() const {
  WSampleSet out;
  for (const auto& s : w) out.merge(s);
  return out;
}

ClusterStats SimulationResult::clusters_total() const { return merged(clusters, nullptr); }

namespace {

// Concrete stream factories so the inner loop is statically dispatched.
struct StreamFactory {
  const SystemSpec& system;
  HocStationary hoc;

  explicit StreamFactory(const SystemSpec& s) : system(s) {
    if (const auto* h = std::get_if<HouseOfCardsSpec>(&s)) hoc = hoc_stationary(*h);
  }

  template <class F>
  void with_stream(std::uint64_t seed, F&& f) const {
    std::visit(
        [&](const auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, FiniteMarkovSpec>) { MarkovStream s(spec, seed); f(s); }
          else if constexpr (std::is_same_v<T, HouseOfCardsSpec>) { HocStream s(spec, hoc, seed); f(s); }
          else if constexpr (std::is_same_v<T, RegenerativeSpec>) { RegenerativeStream s(spec, seed); f(s); }
          else if constexpr (std::is_same_v<T, ProductChainSpec>) { ProductStream s(spec, seed); f(s); }
          else if constexpr (std::is_same_v<T, IntervalMapSpec>) { IntervalMapStream s(spec, seed); f(s); }
          else if constexpr (std::is_same_v<T, DoeblinChainSpec>) { DoeblinStream s(spec, seed); f(s); }
          else { FactorStream s(spec, seed); f(s); }
        },
        system);
  }
};

}  // namespace

SimulationResult simulate_visits(const SystemSpec& system, const TargetSpec& target, const SimulationOptions& opt) {
  check_compatible(system, target);
  if (opt.trajectories == 0) fail(ErrorKind::invalid_input, "simulation needs at least one trajectory");
  if (opt.horizon > kMaxHorizon) fail(ErrorKind::resource, "horizon exceeds 1e9 steps");
  if (static_cast<double>(opt.horizon) * static_cast<double>(opt.trajectories) > kMaxTotalSteps)
    fail(ErrorKind::resource, "horizon * trajectories exceeds 1e10 steps; lower samples or t");
  if (window_length(target) > opt.horizon + 1) fail(ErrorKind::invalid_input, "target window longer than the horizon");

  const std::size_t B = static_cast<std::size_t>(std::min<std::uint64_t>(std::max<std::size_t>(opt.batches, 1), opt.trajectories));
  const std::uint64_t M = opt.trajectories;
  SimulationResult res;
  res.w.resize(B);
  res.clusters.assign(B, ClusterStats(opt.K, opt.L));

  const StreamFactory factory(system);
  const Detector proto = make_detector(target);

  auto run_batch = [&](std::size_t b, std::vector<std::uint8_t>& buf) {
    const std::uint64_t lo = M * b / B, hi = M * (b + 1) / B;
    for (std::uint64_t j = lo; j < hi; ++j) {
      factory.with_stream(stream_seed(opt.seed, j), [&](auto& stream) {
        Detector det = proto;
        std::visit([&](auto& d) { fill_hits(stream, d, opt.horizon, buf); }, det);
      });
      std::uint64_t w = 0;
      for (auto x : buf) w += x;
      res.w[b].add(w);
      res.clusters[b].accumulate(buf);
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(B)));
  if (workers == 1) {
    std::vector<std::uint8_t> buf;
    for (std::size_t b = 0; b < B; ++b) run_batch(b, buf);
    return res;
  }
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (unsigned wk = 0; wk < workers; ++wk) {
    pool.emplace_back([&, wk] {
      std::vector<std::uint8_t> buf;
      try {
        for (std::size_t b = wk; b < B; b += workers) run_batch(b, buf);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return res;
}

}  // namespace visitlab
