#include "visitlab/compound.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "visitlab/error.hpp"

namespace visitlab {

double DiscretePMF::total() const {
  double s = tail_mass;
  for (double p : probs) s += p;
  return s;
}

void DiscretePMF::validate(double tol) const {
  if (!(tail_mass >= 0.0)) fail(ErrorKind::invalid_spec, "PMF tail mass is negative");
  for (double p : probs)
    if (!(p >= 0.0)) fail(ErrorKind::invalid_spec, "PMF has a negative or NaN entry");
  if (std::abs(total() - 1.0) > tol)
    fail(ErrorKind::invalid_spec, "PMF does not sum to one");
}

nlohmann::json DiscretePMF::to_json() const {
  return {{"kmax", kmax()}, {"probs", probs}, {"tail_mass", tail_mass}};
}

DiscretePMF DiscretePMF::from_json(const nlohmann::json& j) {
  DiscretePMF pmf;
  pmf.probs = j.at("probs").get<std::vector<double>>();
  pmf.tail_mass = j.value("tail_mass", 0.0);
  if (j.contains("kmax") && j.at("kmax").get<std::size_t>() != pmf.kmax())
    fail(ErrorKind::invalid_input, "PMF json: kmax disagrees with probs length");
  return pmf;
}

std::string DiscretePMF::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "k,prob\n";
  for (std::size_t k = 0; k < probs.size(); ++k) os << k << ',' << probs[k] << '\n';
  return os.str();
}

double CompoundPoissonSpec::rate_sum() const {
  double s = 0.0;
  for (double l : lambda_tilde) s += l;
  return s;
}

void CompoundPoissonSpec::validate() const {
  if (!(t > 0.0) || !std::isfinite(t))
    fail(ErrorKind::invalid_spec, "compound Poisson: t must be positive and finite");
  for (double l : lambda_tilde)
    if (!(l >= 0.0) || !std::isfinite(l))
      fail(ErrorKind::invalid_spec, "compound Poisson: negative or non-finite rate");
}

void PolyaAeppliSpec::validate() const {
  if (!(t > 0.0) || !std::isfinite(t))
    fail(ErrorKind::invalid_spec, "Polya-Aeppli: t must be positive and finite");
  if (!(p >= 0.0 && p < 1.0))
    fail(ErrorKind::invalid_spec, "Polya-Aeppli: p must lie in [0,1)");
}

CompoundPoissonSpec PolyaAeppliSpec::to_compound(std::size_t L) const {
  validate();
  CompoundPoissonSpec spec{t, std::vector<double>(L)};
  double pw = 1.0;
  for (std::size_t l = 0; l < L; ++l) {
    spec.lambda_tilde[l] = (1 - p) * (1 - p) * pw;
    pw *= p;
  }
  return spec;
}

DiscretePMF cp_pmf(const CompoundPoissonSpec& spec, std::size_t kmax) {
  spec.validate();
  const auto& lt = spec.lambda_tilde;
  DiscretePMF pmf;
  pmf.probs.assign(kmax + 1, 0.0);
  pmf.probs[0] = std::exp(-spec.total_rate());
  // Stein recursion: k nu(k) = sum_l t l lambda_l nu(k - l).
  for (std::size_t k = 1; k <= kmax; ++k) {
    const std::size_t top = std::min(k, lt.size());
    double acc = 0.0;
    for (std::size_t l = 1; l <= top; ++l)
      acc += spec.t * static_cast<double>(l) * lt[l - 1] * pmf.probs[k - l];
    pmf.probs[k] = acc / static_cast<double>(k);
  }
  double s = 0.0;
  for (double p : pmf.probs) s += p;
  pmf.tail_mass = std::max(0.0, 1.0 - s);
  return pmf;
}

DiscretePMF pa_pmf(double t, double p, std::size_t kmax) {
  PolyaAeppliSpec{t, p}.validate();
  DiscretePMF pmf;
  pmf.probs.assign(kmax + 1, 0.0);
  const double q = 1.0 - p;
  pmf.probs[0] = std::exp(-q * t);
  const double log_a = std::log(q * q * t);
  const double log_p = p > 0.0 ? std::log(p) : 0.0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    double acc = 0.0;
    // Closed form: sum_j C(k-1, j-1) (q^2 t)^j / j! p^(k-j).
    for (std::size_t j = 1; j <= k; ++j) {
      if (p == 0.0 && j != k) continue;
      const double kk = static_cast<double>(k), jj = static_cast<double>(j);
      double lg = std::lgamma(kk) - std::lgamma(jj) - std::lgamma(kk - jj + 1.0) +
                  jj * log_a - std::lgamma(jj + 1.0);
      if (j != k) lg += (kk - jj) * log_p;
      acc += std::exp(lg);
    }
    pmf.probs[k] = pmf.probs[0] * acc;
  }
  double s = 0.0;
  for (double v : pmf.probs) s += v;
  pmf.tail_mass = std::max(0.0, 1.0 - s);
  return pmf;
}

DiscretePMF poisson_pmf(double mean, std::size_t kmax) {
  return cp_pmf(CompoundPoissonSpec{mean, {1.0}}, kmax);
}

CompoundPoissonSampler::CompoundPoissonSampler(const CompoundPoissonSpec& spec) {
  spec.validate();
  total_rate_ = spec.total_rate();
  const double sum = spec.rate_sum();
  double acc = 0.0;
  for (double l : spec.lambda_tilde) {
    acc += l;
    cdf_.push_back(sum > 0 ? acc / sum : 0.0);
  }
}

std::uint64_t CompoundPoissonSampler::operator()(Rng& rng) const {
  if (total_rate_ == 0.0) return 0;
  const std::uint64_t n = rng.poisson(total_rate_);
  std::uint64_t z = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    z += static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(
             it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1)) + 1;
  }
  return z;
}

std::uint64_t cp_sample(const CompoundPoissonSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return CompoundPoissonSampler(spec)(rng);
}

double tv_distance(const DiscretePMF& p, const DiscretePMF& q) {
  const std::size_t common = std::min(p.probs.size(), q.probs.size());
  double diff = 0.0;
  for (std::size_t k = 0; k < common; ++k) diff += std::abs(p.probs[k] - q.probs[k]);
  // Mass past the shared support cannot be matched, so count all of it.
  double rest = p.tail_mass + q.tail_mass;
  for (std::size_t k = common; k < p.probs.size(); ++k) rest += p.probs[k];
  for (std::size_t k = common; k < q.probs.size(); ++k) rest += q.probs[k];
  return std::clamp(0.5 * (diff + rest), 0.0, 1.0);
}

ClusterLaw cluster_law_from_alphas(std::span<const double> alpha, double t) {
  if (alpha.empty()) fail(ErrorKind::invalid_input, "cluster law: empty alpha sequence");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] >= 0.0) || !std::isfinite(alpha[k]))
      fail(ErrorKind::invalid_input, "cluster law: alpha must be finite and nonnegative");
    if (k > 0 && alpha[k] > alpha[k - 1])
      fail(ErrorKind::invalid_input, "cluster law: alpha must be nonincreasing");
  }
  if (alpha[0] == 0.0) fail(ErrorKind::invalid_input, "cluster law: alpha_1 is zero");

  ClusterLaw law;
  law.spec.t = t;
  law.spec.lambda_tilde.resize(alpha.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double next = k + 1 < alpha.size() ? alpha[k + 1] : 0.0;
    law.spec.lambda_tilde[k] = alpha[k] - next;
    sum += alpha[k];
  }
  law.spec.validate();
  law.extremal_index = alpha[0];
  law.mean_cluster = sum / alpha[0];
  law.normalized.reserve(alpha.size());
  for (double l : law.spec.lambda_tilde) law.normalized.push_back(l / alpha[0]);
  return law;
}

}  // namespace visitlab
