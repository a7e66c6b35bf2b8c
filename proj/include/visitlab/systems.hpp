#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "visitlab/linalg.hpp"
#include "visitlab/rational.hpp"
#include "visitlab/rng.hpp"

namespace visitlab {

// ---------------------------------------------------------------- House of Cards

struct HouseOfCardsSpec {
  enum class Form { constant, perturbed, alternating };

  Form form = Form::constant;
  double r_inf = 0.5;  // constant value, or limit of the perturbed family
  double c = 0.0;      // perturbed: r_i = clamp(r_inf + c/(i+1), 0, 1)
  double eps1 = 0.0;   // alternating: r_i = eps1 for odd i, eps2 for even i
  double eps2 = 0.0;

  static HouseOfCardsSpec constant(double r);
  static HouseOfCardsSpec perturbed(double r_inf, double c);
  static HouseOfCardsSpec alternating(double eps1, double eps2);

  double r(std::size_t i) const;
  // Lower bound on r_i over all i >= from.
  double r_floor(std::size_t from) const;
  // lim r_i, if it exists.
  std::optional<double> limit() const;
  void validate() const;
};

struct HocStationary {
  std::vector<double> pi;   // pi[0..cap)
  double tail_bound = 0.0;  // certified bound on the mass beyond the cap

  std::size_t cap() const { return pi.size(); }
};

HocStationary hoc_stationary(const HouseOfCardsSpec& spec, double tail_tol = 1e-12);

// ---------------------------------------------------------------- Regenerative

struct SymbolLaw {
  enum class Kind { table, geometric };

  Kind kind = Kind::geometric;
  std::vector<std::int64_t> symbols;  // table form
  std::vector<double> probs;
  std::int64_t first = 1;  // geometric form: P(a) = (1-theta) theta^(a-first), a >= first
  double theta = 0.5;

  static SymbolLaw geometric(std::int64_t first, double theta);
  static SymbolLaw table(std::vector<std::int64_t> symbols, std::vector<double> probs);

  double prob(std::int64_t a) const;
  double tail(std::int64_t n) const;  // P(A >= n)
  std::int64_t min_symbol() const;
  std::int64_t sample(Rng& rng) const;
  void validate() const;
};

struct RegenerativeSpec {
  enum class Lengths { shared, smith };

  SymbolLaw p;
  Lengths lengths = Lengths::shared;
  std::vector<double> q;  // shared form: q[k-1] = q(k)

  // q(k) = (1-theta) theta^(k-1), cut where the remaining tail is below tol.
  static std::vector<double> geometric_lengths(double theta, double tol = 1e-12);

  double nu_a(std::int64_t a) const;
  double nu() const;
  double q_a(std::int64_t a, std::int64_t k) const;
  // Stationary first-block laws.
  double p_bar(std::int64_t a) const;
  double q_bar(std::int64_t a, std::int64_t k) const;
  void validate() const;
};

// ---------------------------------------------------------------- Finite Markov

struct FiniteMarkovSpec {
  Matrix Q;
  std::vector<double> pi;

  std::size_t states() const { return Q.rows(); }
};

std::vector<double> markov_stationary(const Matrix& q);
FiniteMarkovSpec make_markov(const Matrix& q, bool require_positive = false);

// ---------------------------------------------------------------- Couplings

enum class CouplingKind { independent, maximal, parametrized };

struct Coupling {
  CouplingKind kind = CouplingKind::independent;
  double gamma = 0.0;
};

std::string to_string(CouplingKind kind);

// Marginal transition law of copy `which` from pair state (a1, a2) under the
// parametrized coupling: (1-gamma) Q_i(a_i, .) + gamma * (other coordinate).
double param_marginal(const Matrix& own, std::size_t which, std::size_t a1, std::size_t a2,
                      std::size_t b, double gamma);

Matrix build_qdelta(const std::vector<Matrix>& components, const Coupling& coupling);

struct ProductChainSpec {
  std::vector<Matrix> components;
  Coupling coupling;
  FiniteMarkovSpec joint;  // chain on M^m pair states
  std::size_t alphabet = 0;

  std::size_t copies() const { return components.size(); }
  std::size_t encode(const std::vector<std::size_t>& coords) const;
  std::vector<std::size_t> decode(std::size_t state) const;
};

ProductChainSpec make_product_chain(const std::vector<Matrix>& components, const Coupling& coupling);

// ---------------------------------------------------------------- Interval maps

struct IntervalMapSpec {
  std::vector<Rational> breaks;      // 0 = b_0 < ... < b_M = 1
  std::vector<Rational> slopes;      // branch i: T(x) = slope_i x + intercept_i on I_i
  std::vector<Rational> intercepts;
  bool exact = true;                 // false if any datum came from a binary float
  std::size_t copies = 1;

  // derived
  std::vector<std::vector<Rational>> Q;
  std::vector<Rational> h;
  std::vector<Rational> lengths;

  std::size_t branches() const { return slopes.size(); }
  Matrix q_double() const;
  std::vector<double> h_double() const;
  // Itinerary chain P(i -> j) = Q_ij lambda(I_j) / lambda(I_i).
  FiniteMarkovSpec itinerary_chain() const;
};

IntervalMapSpec make_interval_map(std::vector<Rational> breaks, std::vector<Rational> slopes,
                                  std::vector<Rational> intercepts, std::size_t copies = 1,
                                  bool exact = true);
std::vector<Rational> interval_map_invariant(const IntervalMapSpec& spec);

// ---------------------------------------------------------------- Doeblin, factor

struct DoeblinChainSpec {
  double eta = 0.5;
  std::size_t copies = 2;

  double density(double x, double y) const;
  double lower() const { return 1.0 - eta; }
  double upper() const { return 1.0 + eta; }
  void validate() const;
};

struct FactorProductSpec {
  double epsilon = 0.3;
  void validate() const;
};

using SystemSpec = std::variant<FiniteMarkovSpec, HouseOfCardsSpec, RegenerativeSpec,
                                ProductChainSpec, IntervalMapSpec, DoeblinChainSpec,
                                FactorProductSpec>;

std::string system_name(const SystemSpec& spec);

// ---------------------------------------------------------------- Streams

// A stationary trajectory positioned at time 0 on construction; advance()
// moves one step. Symbols are per copy; real coordinates exist only for
// interval-map and Doeblin systems.
class SymbolStream {
 public:
  virtual ~SymbolStream() = default;
  virtual void advance() = 0;
  virtual std::size_t copies() const = 0;
  virtual std::int64_t symbol(std::size_t copy = 0) const = 0;
  virtual bool has_reals() const { return false; }
  virtual double real(std::size_t copy) const;
};

class MarkovStream final : public SymbolStream {
 public:
  MarkovStream(const FiniteMarkovSpec& spec, std::uint64_t seed);
  void advance() override { state_ = step(state_); }
  std::size_t copies() const override { return 1; }
  std::int64_t symbol(std::size_t = 0) const override { return static_cast<std::int64_t>(state_); }
  std::size_t state() const { return state_; }

 private:
  std::size_t step(std::size_t from);
  Rng rng_;
  std::size_t n_;
  std::vector<double> cdf_;  // row-major cumulative rows
  std::size_t state_;
};

class HocStream final : public SymbolStream {
 public:
  HocStream(const HouseOfCardsSpec& spec, const HocStationary& stationary, std::uint64_t seed);
  HocStream(const HouseOfCardsSpec& spec, std::uint64_t seed);
  void advance() override {
    state_ = rng_.uniform() < spec_.r(static_cast<std::size_t>(state_)) ? 0 : state_ + 1;
  }
  std::size_t copies() const override { return 1; }
  std::int64_t symbol(std::size_t = 0) const override { return state_; }

 private:
  void start(const HocStationary& stationary);
  HouseOfCardsSpec spec_;
  Rng rng_;
  std::int64_t state_ = 0;
};

class RegenerativeStream final : public SymbolStream {
 public:
  RegenerativeStream(const RegenerativeSpec& spec, std::uint64_t seed);
  void advance() override;
  std::size_t copies() const override { return 1; }
  std::int64_t symbol(std::size_t = 0) const override { return symbol_; }

 private:
  std::int64_t draw_length(std::int64_t a);
  RegenerativeSpec spec_;
  Rng rng_;
  std::vector<double> q_cdf_;
  std::vector<double> qbar_cdf_;
  std::int64_t symbol_ = 0;
  std::int64_t remaining_ = 0;  // steps left in the current block after this one
};

class ProductStream final : public SymbolStream {
 public:
  ProductStream(const ProductChainSpec& spec, std::uint64_t seed);
  void advance() override;
  std::size_t copies() const override { return m_; }
  std::int64_t symbol(std::size_t copy = 0) const override {
    return static_cast<std::int64_t>(coords_[state_ * m_ + copy]);
  }

 private:
  MarkovStream chain_;
  std::size_t m_;
  std::vector<std::size_t> coords_;
  std::size_t state_;
};

class IntervalMapStream final : public SymbolStream {
 public:
  IntervalMapStream(const IntervalMapSpec& spec, std::uint64_t seed);
  void advance() override;
  std::size_t copies() const override { return x_.size(); }
  std::int64_t symbol(std::size_t copy = 0) const override { return static_cast<std::int64_t>(branch_[copy]); }
  bool has_reals() const override { return true; }
  double real(std::size_t copy) const override { return x_[copy]; }

 private:
  std::size_t locate(double x) const;
  Rng rng_;
  std::vector<double> breaks_, slopes_, intercepts_;
  std::vector<double> x_;
  std::vector<std::size_t> branch_;
};

class DoeblinStream final : public SymbolStream {
 public:
  DoeblinStream(const DoeblinChainSpec& spec, std::uint64_t seed);
  void advance() override;
  std::size_t copies() const override { return x_.size(); }
  std::int64_t symbol(std::size_t = 0) const override { return 0; }
  bool has_reals() const override { return true; }
  double real(std::size_t copy) const override { return x_[copy]; }

 private:
  double eta_;
  Rng rng_;
  std::vector<double> x_;
};

class FactorStream final : public SymbolStream {
 public:
  FactorStream(const FactorProductSpec& spec, std::uint64_t seed);
  void advance() override {
    cur_ = next_;
    next_ = draw();
  }
  std::size_t copies() const override { return 1; }
  std::int64_t symbol(std::size_t = 0) const override { return cur_ * next_; }

 private:
  std::int64_t draw() { return rng_.uniform() < eps_ ? 1 : -1; }
  double eps_;
  Rng rng_;
  std::int64_t cur_, next_;
};

std::unique_ptr<SymbolStream> stationary_stream(const SystemSpec& spec, std::uint64_t seed);

}  // namespace visitlab
