#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "visitlab/rng.hpp"

namespace visitlab {

// Finite PMF on 0..kmax; whatever is not listed sits in tail_mass.
struct DiscretePMF {
  std::vector<double> probs;
  double tail_mass = 0.0;

  std::size_t kmax() const { return probs.empty() ? 0 : probs.size() - 1; }
  double at(std::size_t k) const { return k < probs.size() ? probs[k] : 0.0; }
  double total() const;
  void validate(double tol = 1e-12) const;

  nlohmann::json to_json() const;
  static DiscretePMF from_json(const nlohmann::json& j);
  std::string to_csv() const;
};

// Law of sum_{i<N} X_i with N ~ Poisson(t * sum lambda_tilde) and
// P(X = l) proportional to lambda_tilde[l-1].
struct CompoundPoissonSpec {
  double t = 1.0;
  std::vector<double> lambda_tilde;  // index l-1 holds the rate of size-l clusters

  double rate_sum() const;
  double total_rate() const { return t * rate_sum(); }
  void validate() const;
};

struct PolyaAeppliSpec {
  double t = 1.0;
  double p = 0.0;

  void validate() const;
  // Equivalent compound spec, truncated after L cluster sizes.
  CompoundPoissonSpec to_compound(std::size_t L) const;
};

DiscretePMF cp_pmf(const CompoundPoissonSpec& spec, std::size_t kmax);
DiscretePMF pa_pmf(double t, double p, std::size_t kmax);
DiscretePMF poisson_pmf(double mean, std::size_t kmax);

// Draws one value; many draws should go through CompoundPoissonSampler.
std::uint64_t cp_sample(const CompoundPoissonSpec& spec, std::uint64_t seed);

class CompoundPoissonSampler {
 public:
  explicit CompoundPoissonSampler(const CompoundPoissonSpec& spec);
  std::uint64_t operator()(Rng& rng) const;

 private:
  double total_rate_;
  std::vector<double> cdf_;  // cumulative cluster-size law
};

double tv_distance(const DiscretePMF& p, const DiscretePMF& q);

struct ClusterLaw {
  CompoundPoissonSpec spec;
  double extremal_index = 0.0;
  double mean_cluster = 0.0;
  std::vector<double> normalized;  // lambda_k = lambda_tilde_k / alpha_1
};

ClusterLaw cluster_law_from_alphas(std::span<const double> alpha, double t);

}  // namespace visitlab
