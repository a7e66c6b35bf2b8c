#include "visitlab/rng.hpp"

#include <cmath>
#include <limits>

#include "visitlab/error.hpp"

namespace visitlab {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorKind::invalid_input, "Rng::below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    fail(ErrorKind::invalid_input, "Rng::poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  // exp(-mean) underflows past ~745; split the mean, Poisson is additive.
  if (mean > 500.0) return poisson(mean / 2) + poisson(mean - mean / 2);
  double p = std::exp(-mean);
  double cdf = p;
  const double u = uniform();
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // remaining mass below double resolution
    cdf = next;
  }
  return k;
}

std::uint64_t Rng::geometric_failures(double success) {
  if (!(success > 0.0 && success <= 1.0))
    fail(ErrorKind::invalid_input, "Rng::geometric_failures: success must lie in (0,1]");
  if (success == 1.0) return 0;
  const double v = std::floor(std::log(uniform_pos()) / std::log1p(-success));
  return static_cast<std::uint64_t>(v);
}

}  // namespace visitlab
