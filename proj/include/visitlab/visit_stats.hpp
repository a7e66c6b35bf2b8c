#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "visitlab/compound.hpp"
#include "visitlab/systems.hpp"
#include "visitlab/targets.hpp"

namespace visitlab {

class WSampleSet {
 public:
  void add(std::uint64_t w, std::uint64_t times = 1);
  void merge(const WSampleSet& other, std::uint64_t weight = 1);

  const std::map<std::uint64_t, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  double mean() const;

  bool operator==(const WSampleSet&) const = default;

 private:
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Integer histograms only, so merging is exact and order-free.
class ClusterStats {
 public:
  ClusterStats() = default;
  ClusterStats(std::size_t K, std::size_t L) : K_(K), L_(L) {}

  // Consume one trajectory's indicators I_0..I_N.
  void accumulate(std::span<const std::uint8_t> indicators);
  void merge(const ClusterStats& other, std::uint64_t weight = 1);

  std::size_t K() const { return K_; }
  std::size_t L() const { return L_; }
  // [c] = entries followed by exactly c further hits within L (resp. K) steps.
  const std::vector<std::uint64_t>& further_L() const { return further_L_; }
  const std::vector<std::uint64_t>& further_K() const { return further_K_; }
  // [z] = interior hits whose two-sided K-window holds z hits (z >= 1).
  const std::vector<std::uint64_t>& z_hist() const { return z_hist_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t entries_L() const;
  std::uint64_t entries_K() const;
  std::uint64_t interior_hits() const;

  bool operator==(const ClusterStats&) const = default;

 private:
  std::size_t K_ = 0, L_ = 0;
  std::vector<std::uint64_t> further_L_, further_K_, z_hist_;
  std::uint64_t hits_ = 0;
};

struct AlphaEstimates {
  std::vector<double> alpha, alpha_se;          // alpha_k(L), k = 1, 2, ...
  std::vector<double> alpha_hat, alpha_hat_se;  // alpha_hat_l(K), l = 1, 2, ...
  std::uint64_t entries_L = 0, entries_K = 0;
  double extremal_index = 0.0, extremal_index_se = 0.0;
  double mean_cluster = 0.0, mean_cluster_se = 0.0;
};

struct LambdaTildeEstimates {
  std::vector<double> lambda_tilde, se;  // l = 1, 2, ...
  std::uint64_t hits = 0;
  double mean_cluster = 0.0, mean_cluster_se = 0.0;  // 1 / sum lambda_tilde
};

constexpr std::size_t kBootstrapResamples = 200;
constexpr std::uint64_t kBootstrapSeed = 0xb007'5742'a9ULL;

// weights[r][b] = multiplicity of batch b in bootstrap resample r.
std::vector<std::vector<std::uint32_t>> bootstrap_weights(std::size_t batches, std::size_t resamples,
                                                          std::uint64_t seed);

std::uint64_t kac_horizon(double t, double mu);
std::uint64_t count_visits(SymbolStream& stream, const TargetSpec& target, double t, const TargetMeasure& mu);

AlphaEstimates estimate_alpha(std::span<const ClusterStats> batches, std::uint64_t min_entries,
                              std::size_t resamples = kBootstrapResamples, std::uint64_t seed = kBootstrapSeed);
// Fills only the alpha_hat part.
AlphaEstimates estimate_alpha_hat(std::span<const ClusterStats> batches, std::uint64_t min_entries,
                                  std::size_t resamples = kBootstrapResamples, std::uint64_t seed = kBootstrapSeed);
LambdaTildeEstimates estimate_lambda_tilde(std::span<const ClusterStats> batches,
                                           std::size_t resamples = kBootstrapResamples,
                                           std::uint64_t seed = kBootstrapSeed);

DiscretePMF empirical_pmf(const WSampleSet& samples);

// ---------------------------------------------------------------- simulation

struct SimulationOptions {
  std::uint64_t horizon = 0;
  std::uint64_t trajectories = 1;
  std::uint64_t seed = 1;
  std::size_t K = 1, L = 1;
  std::size_t batches = 256;
  unsigned workers = 1;
};

struct SimulationResult {
  std::vector<WSampleSet> w;            // one per batch
  std::vector<ClusterStats> clusters;   // one per batch

  WSampleSet w_total() const;
  ClusterStats clusters_total() const;
};

constexpr std::uint64_t kMaxHorizon = 1'000'000'000ULL;
constexpr double kMaxTotalSteps = 1e10;

// Trajectory j uses stream_seed(seed, j) and lands in batch j * B / M, so
// the result does not depend on the number of workers.
SimulationResult simulate_visits(const SystemSpec& system, const TargetSpec& target, const SimulationOptions& opt);

}  // namespace visitlab
