#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "visitlab/systems.hpp"

namespace visitlab {

struct Cylinder {
  std::vector<std::int64_t> word;  // window must equal this word
};

struct RunLength {
  std::size_t n = 1;  // n consecutive symbols >= l
  std::int64_t l = 1;
};

struct HalfLine {
  std::int64_t n = 1;  // current symbol >= n
};

struct SyncCylinder {
  std::size_t n = 1;  // the first m copies agree on n consecutive symbols
  std::size_t m = 2;
};

struct GeoDiagonal {
  double delta = 0.1;  // the first m real coordinates lie within delta of each other
  std::size_t m = 2;
};

using TargetSpec = std::variant<Cylinder, RunLength, HalfLine, SyncCylinder, GeoDiagonal>;

std::size_t window_length(const TargetSpec& target);
std::string describe(const TargetSpec& target);
void validate(const TargetSpec& target);

// One-parameter nested family U_n (or U_delta).
struct TargetFamily {
  enum class Kind { cylinder, run_length, half_line, sync_cylinder, geo_diagonal };

  Kind kind = Kind::cylinder;
  std::vector<std::int64_t> word;  // cylinder: repeating pattern, or an explicit point prefix
  bool periodic = true;            // cylinder: word repeats forever
  std::int64_t l = 1;              // run_length threshold
  std::size_t m = 2;               // sync / geo copies

  TargetSpec at(double level) const;
  bool geometric() const { return kind == Kind::geo_diagonal; }
  std::string name() const;
};

// ---------------------------------------------------------------- detectors

// Each detector is fed the stream state at times 0, 1, 2, ... and answers
// whether the window ending at the current time lies in the target.

class CylinderDetector {
 public:
  explicit CylinderDetector(const Cylinder& c);
  std::size_t window() const { return word_.size(); }
  template <class S>
  bool push(const S& s) {
    const std::int64_t x = s.symbol(0);
    while (state_ > 0 && word_[state_] != x) state_ = fail_[state_];
    if (word_[state_] == x) ++state_;
    if (state_ == word_.size()) {
      state_ = fail_[state_];
      return true;
    }
    return false;
  }

 private:
  std::vector<std::int64_t> word_;
  std::vector<std::size_t> fail_;  // KMP failure function, size n+1
  std::size_t state_ = 0;
};

class RunLengthDetector {
 public:
  explicit RunLengthDetector(const RunLength& r) : n_(r.n), l_(r.l) {}
  std::size_t window() const { return n_; }
  template <class S>
  bool push(const S& s) {
    run_ = s.symbol(0) >= l_ ? run_ + 1 : 0;
    return run_ >= n_;
  }

 private:
  std::size_t n_;
  std::int64_t l_;
  std::size_t run_ = 0;
};

class HalfLineDetector {
 public:
  explicit HalfLineDetector(const HalfLine& h) : n_(h.n) {}
  std::size_t window() const { return 1; }
  template <class S>
  bool push(const S& s) {
    return s.symbol(0) >= n_;
  }

 private:
  std::int64_t n_;
};

class SyncDetector {
 public:
  explicit SyncDetector(const SyncCylinder& c) : n_(c.n), m_(c.m) {}
  std::size_t window() const { return n_; }
  template <class S>
  bool push(const S& s) {
    const std::int64_t first = s.symbol(0);
    bool agree = true;
    for (std::size_t i = 1; i < m_ && agree; ++i) agree = s.symbol(i) == first;
    run_ = agree ? run_ + 1 : 0;
    return run_ >= n_;
  }

 private:
  std::size_t n_, m_;
  std::size_t run_ = 0;
};

class GeoDetector {
 public:
  explicit GeoDetector(const GeoDiagonal& g) : delta_(g.delta), m_(g.m) {}
  std::size_t window() const { return 1; }
  template <class S>
  bool push(const S& s) {
    double lo = s.real(0), hi = lo;
    for (std::size_t i = 1; i < m_; ++i) {
      const double x = s.real(i);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return hi - lo <= delta_;
  }

 private:
  double delta_;
  std::size_t m_;
};

using Detector = std::variant<CylinderDetector, RunLengthDetector, HalfLineDetector, SyncDetector, GeoDetector>;

Detector make_detector(const TargetSpec& target);

// Throws unless the stream can feed the target (copy count, real coordinates).
void check_compatible(const SystemSpec& system, const TargetSpec& target);

// I_0..I_horizon; the stream is advanced through horizon + window - 1 so
// every counted window is complete.
template <class S, class D>
void fill_hits(S& stream, D& detector, std::uint64_t horizon, std::vector<std::uint8_t>& out) {
  const std::size_t w = detector.window();
  out.assign(horizon + 1, 0);
  const std::uint64_t last = horizon + w - 1;
  for (std::uint64_t s = 0; s <= last; ++s) {
    if (s > 0) stream.advance();
    const bool hit = detector.push(stream);
    if (s + 1 >= w) out[s + 1 - w] = hit ? 1 : 0;
  }
}

std::vector<std::uint8_t> hits(SymbolStream& stream, const TargetSpec& target, std::uint64_t horizon);

// ---------------------------------------------------------------- measures

struct TargetMeasure {
  enum class Method { exact, monte_carlo };

  double value = 0.0;
  Method method = Method::exact;
  double std_error = 0.0;
  std::string formula;
};

struct MonteCarloOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0x6d656173ULL;
};

TargetMeasure measure_exact(const TargetSpec& target, const SystemSpec& system,
                            const MonteCarloOptions& mc = {});
TargetMeasure measure_monte_carlo(const TargetSpec& target, const SystemSpec& system,
                                  const MonteCarloOptions& mc);

// Furstenberg factor: nu([z]) summed over the two lifts of z.
double factor_cylinder_measure(double epsilon, const std::vector<std::int64_t>& z);

// mu(U_n^j) for j in [j_from, j_to] (outer j-cylinder approximations).
std::vector<double> outer_measures(const TargetFamily& family, const SystemSpec& system, std::size_t n,
                                   std::size_t j_from, std::size_t j_to);

}  // namespace visitlab
