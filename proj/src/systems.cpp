#include "visitlab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "visitlab/error.hpp"

namespace visitlab {

// ---------------------------------------------------------------- House of Cards

HouseOfCardsSpec HouseOfCardsSpec::constant(double r) {
  HouseOfCardsSpec s;
  s.form = Form::constant;
  s.r_inf = r;
  s.validate();
  return s;
}

HouseOfCardsSpec HouseOfCardsSpec::perturbed(double r_inf, double c) {
  HouseOfCardsSpec s;
  s.form = Form::perturbed;
  s.r_inf = r_inf;
  s.c = c;
  s.validate();
  return s;
}

HouseOfCardsSpec HouseOfCardsSpec::alternating(double eps1, double eps2) {
  HouseOfCardsSpec s;
  s.form = Form::alternating;
  s.eps1 = eps1;
  s.eps2 = eps2;
  s.validate();
  return s;
}

double HouseOfCardsSpec::r(std::size_t i) const {
  switch (form) {
    case Form::constant: return r_inf;
    case Form::perturbed: return std::clamp(r_inf + c / static_cast<double>(i + 1), 0.0, 1.0);
    case Form::alternating: return (i % 2 == 1) ? eps1 : eps2;
  }
  return r_inf;
}

double HouseOfCardsSpec::r_floor(std::size_t from) const {
  switch (form) {
    case Form::constant: return r_inf;
    case Form::perturbed: return c >= 0 ? std::clamp(r_inf, 0.0, 1.0) : r(from);
    case Form::alternating: return std::min(eps1, eps2);
  }
  return 0.0;
}

std::optional<double> HouseOfCardsSpec::limit() const {
  if (form == Form::alternating && eps1 != eps2) return std::nullopt;
  if (form == Form::alternating) return eps1;
  return std::clamp(r_inf, 0.0, 1.0);
}

void HouseOfCardsSpec::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (form == Form::alternating) {
    if (!in01(eps1) || !in01(eps2))
      fail(ErrorKind::invalid_spec, "House of Cards: alternating rates must lie in [0,1]");
  } else if (!in01(r_inf) || !std::isfinite(c)) {
    fail(ErrorKind::invalid_spec, "House of Cards: r_inf must lie in [0,1]");
  }
}

HocStationary hoc_stationary(const HouseOfCardsSpec& spec, double tail_tol) {
  spec.validate();
  constexpr std::size_t kHardCap = 10'000'000;
  std::vector<double> w{1.0};
  double sum = 1.0;
  double tail = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double next = w[k] * (1.0 - spec.r(k));
    if (next == 0.0) break;
    const double floor = spec.r_floor(k + 1);
    // Geometric domination of the remaining weights once r_i >= floor.
    if (floor > 0.0 && next / floor <= tail_tol * sum) {
      tail = next / floor / sum;
      break;
    }
    if (w.size() >= kHardCap)
      fail(ErrorKind::non_stationary,
           "House of Cards: stationarity sum does not converge (reset rates not bounded away from 0)");
    w.push_back(next);
    sum += next;
  }
  HocStationary out;
  out.pi.reserve(w.size());
  for (double v : w) out.pi.push_back(v / sum);
  out.tail_bound = tail;
  return out;
}

// ---------------------------------------------------------------- Regenerative

SymbolLaw SymbolLaw::geometric(std::int64_t first, double theta) {
  SymbolLaw s;
  s.kind = Kind::geometric;
  s.first = first;
  s.theta = theta;
  s.validate();
  return s;
}

SymbolLaw SymbolLaw::table(std::vector<std::int64_t> symbols, std::vector<double> probs) {
  SymbolLaw s;
  s.kind = Kind::table;
  s.symbols = std::move(symbols);
  s.probs = std::move(probs);
  s.validate();
  return s;
}

double SymbolLaw::prob(std::int64_t a) const {
  if (kind == Kind::geometric)
    return a < first ? 0.0 : (1 - theta) * std::pow(theta, static_cast<double>(a - first));
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == a) return probs[i];
  return 0.0;
}

double SymbolLaw::tail(std::int64_t n) const {
  if (kind == Kind::geometric) return n <= first ? 1.0 : std::pow(theta, static_cast<double>(n - first));
  double s = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] >= n) s += probs[i];
  return s;
}

std::int64_t SymbolLaw::min_symbol() const {
  if (kind == Kind::geometric) return first;
  return *std::min_element(symbols.begin(), symbols.end());
}

std::int64_t SymbolLaw::sample(Rng& rng) const {
  if (kind == Kind::geometric)
    return first + static_cast<std::int64_t>(rng.geometric_failures(1.0 - theta));
  double u = rng.uniform();
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (u < probs[i]) return symbols[i];
    u -= probs[i];
  }
  return symbols.back();
}

void SymbolLaw::validate() const {
  if (kind == Kind::geometric) {
    if (!(theta >= 0.0 && theta < 1.0))
      fail(ErrorKind::invalid_spec, "symbol law: geometric theta must lie in [0,1)");
    return;
  }
  if (symbols.empty() || symbols.size() != probs.size())
    fail(ErrorKind::invalid_spec, "symbol law: table needs matching symbols and probabilities");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) fail(ErrorKind::invalid_spec, "symbol law: negative probability");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) fail(ErrorKind::invalid_spec, "symbol law: probabilities do not sum to one");
}

std::vector<double> RegenerativeSpec::geometric_lengths(double theta, double tol) {
  if (!(theta > 0.0 && theta < 1.0))
    fail(ErrorKind::invalid_spec, "geometric block lengths need theta in (0,1)");
  std::vector<double> q;
  double tail = 1.0;  // P(length >= k)
  while (tail >= tol) {
    q.push_back(tail * (1 - theta));
    tail *= theta;
  }
  // Fold the remainder into the last atom so q sums to one.
  q.back() += tail;
  return q;
}

double RegenerativeSpec::nu_a(std::int64_t a) const {
  if (lengths == Lengths::smith) return 2.0;  // (a+1)/a + (1 - 1/a)
  (void)a;
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) s += static_cast<double>(k + 1) * q[k];
  return s;
}

double RegenerativeSpec::nu() const {
  // nu_a does not depend on a in either supported length form.
  return nu_a(p.min_symbol());
}

double RegenerativeSpec::q_a(std::int64_t a, std::int64_t k) const {
  if (k < 1) return 0.0;
  if (lengths == Lengths::smith) {
    const double inv = 1.0 / static_cast<double>(a);
    if (k == a + 1) return inv;
    if (k == 1) return 1.0 - inv;
    return 0.0;
  }
  return static_cast<std::size_t>(k) <= q.size() ? q[static_cast<std::size_t>(k) - 1] : 0.0;
}

double RegenerativeSpec::p_bar(std::int64_t a) const { return p.prob(a) * nu_a(a) / nu(); }

double RegenerativeSpec::q_bar(std::int64_t a, std::int64_t k) const {
  if (k < 1) return 0.0;
  if (lengths == Lengths::smith) {
    if (k == 1) return 0.5;
    return k <= a + 1 ? 1.0 / (2.0 * static_cast<double>(a)) : 0.0;
  }
  double s = 0.0;
  for (std::size_t l = static_cast<std::size_t>(k); l <= q.size(); ++l) s += q[l - 1];
  return s / nu_a(a);
}

void RegenerativeSpec::validate() const {
  p.validate();
  if (lengths == Lengths::smith) {
    if (p.min_symbol() < 1) fail(ErrorKind::invalid_spec, "Smith regenerative form needs symbols >= 1");
    return;
  }
  if (q.empty()) fail(ErrorKind::invalid_spec, "regenerative: empty block-length law");
  double s = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) fail(ErrorKind::invalid_spec, "regenerative: negative block-length probability");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) fail(ErrorKind::invalid_spec, "regenerative: block lengths do not sum to one");
}

// ---------------------------------------------------------------- Finite Markov

std::vector<double> markov_stationary(const Matrix& q) {
  require_stochastic(q);
  if (!is_irreducible(q)) fail(ErrorKind::structure, "markov_stationary: transition matrix is reducible");
  const std::size_t n = q.rows();
  // (Q^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Matrix a(n, n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = q(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  a(n - 1, n) = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) fail(ErrorKind::numeric, "markov_stationary: singular system");
    for (std::size_t c = 0; c <= n; ++c) std::swap(a(col, c), a(piv, c));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a(r, col) == 0.0) continue;
      const double f = a(r, col) / a(col, col);
      for (std::size_t c = col; c <= n; ++c) a(r, c) -= f * a(col, c);
    }
  }
  std::vector<double> pi(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pi[i] = std::max(0.0, a(i, n) / a(i, i));
    s += pi[i];
  }
  for (double& v : pi) v /= s;
  return pi;
}

FiniteMarkovSpec make_markov(const Matrix& q, bool require_positive) {
  if (require_positive)
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = 0; j < q.cols(); ++j)
        if (!(q(i, j) > 0.0)) fail(ErrorKind::invalid_spec, "Markov chain must have strictly positive entries");
  return FiniteMarkovSpec{q, markov_stationary(q)};
}

// ---------------------------------------------------------------- Couplings

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::independent: return "independent";
    case CouplingKind::maximal: return "maximal";
    case CouplingKind::parametrized: return "parametrized";
  }
  return "?";
}

double param_marginal(const Matrix& own, std::size_t which, std::size_t a1, std::size_t a2,
                      std::size_t b, double gamma) {
  const std::size_t mine = which == 0 ? a1 : a2;
  const std::size_t other = which == 0 ? a2 : a1;
  const double one = (1 - gamma) * own(mine, 1) + gamma * static_cast<double>(other);
  return b == 1 ? one : 1.0 - one;
}

namespace {

void check_components(const std::vector<Matrix>& comps, const Coupling& coupling) {
  if (comps.size() < 2) fail(ErrorKind::shape, "coupling needs at least two components");
  for (const auto& c : comps) {
    if (!c.square() || c.rows() != comps[0].rows())
      fail(ErrorKind::shape, "coupled components must share one alphabet");
    require_stochastic(c);
  }
  if (coupling.kind == CouplingKind::parametrized) {
    if (comps.size() != 2 || comps[0].rows() != 2)
      fail(ErrorKind::unsupported, "parametrized coupling is defined for two chains on {0,1} only");
    if (!(coupling.gamma >= 0.0 && coupling.gamma <= 1.0))
      fail(ErrorKind::invalid_spec, "parametrized coupling: gamma must lie in [0,1]");
  }
}

}  // namespace

Matrix build_qdelta(const std::vector<Matrix>& comps, const Coupling& coupling) {
  check_components(comps, coupling);
  const std::size_t n = comps[0].rows();
  Matrix d(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      switch (coupling.kind) {
        case CouplingKind::independent: {
          double v = 1.0;
          for (const auto& c : comps) v *= c(a, b);
          d(a, b) = v;
          break;
        }
        case CouplingKind::maximal: {
          double v = comps[0](a, b);
          for (const auto& c : comps) v = std::min(v, c(a, b));
          d(a, b) = v;
          break;
        }
        case CouplingKind::parametrized:
          d(a, b) = param_marginal(comps[0], 0, a, a, b, coupling.gamma) *
                    param_marginal(comps[1], 1, a, a, b, coupling.gamma);
          break;
      }
    }
  return d;
}

std::size_t ProductChainSpec::encode(const std::vector<std::size_t>& coords) const {
  std::size_t s = 0;
  for (std::size_t c : coords) s = s * alphabet + c;
  return s;
}

std::vector<std::size_t> ProductChainSpec::decode(std::size_t state) const {
  std::vector<std::size_t> coords(copies());
  for (std::size_t i = coords.size(); i-- > 0;) {
    coords[i] = state % alphabet;
    state /= alphabet;
  }
  return coords;
}

ProductChainSpec make_product_chain(const std::vector<Matrix>& comps, const Coupling& coupling) {
  check_components(comps, coupling);
  ProductChainSpec spec;
  spec.components = comps;
  spec.coupling = coupling;
  spec.alphabet = comps[0].rows();
  const std::size_t m = comps.size(), M = spec.alphabet;
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= M;

  Matrix joint(total, total);
  for (std::size_t s = 0; s < total; ++s) {
    const auto a = spec.decode(s);
    const bool diagonal = std::all_of(a.begin(), a.end(), [&](std::size_t v) { return v == a[0]; });
    std::vector<double> mins(M), residual_mass(1, 0.0);
    if (coupling.kind == CouplingKind::maximal && diagonal) {
      double agree = 0.0;
      for (std::size_t b = 0; b < M; ++b) {
        mins[b] = comps[0](a[0], b);
        for (const auto& c : comps) mins[b] = std::min(mins[b], c(a[0], b));
        agree += mins[b];
      }
      residual_mass[0] = 1.0 - agree;
    }
    for (std::size_t t = 0; t < total; ++t) {
      const auto b = spec.decode(t);
      double v = 1.0;
      if (coupling.kind == CouplingKind::parametrized) {
        v = param_marginal(comps[0], 0, a[0], a[1], b[0], coupling.gamma) *
            param_marginal(comps[1], 1, a[0], a[1], b[1], coupling.gamma);
      } else if (coupling.kind == CouplingKind::maximal && diagonal) {
        const bool agree = std::all_of(b.begin(), b.end(), [&](std::size_t v2) { return v2 == b[0]; });
        const double R = residual_mass[0];
        if (agree) {
          v = mins[b[0]];
        } else if (R <= 0.0) {
          v = 0.0;
        } else {
          // Disagreeing moves split the leftover mass as a product of the
          // normalized residuals; each marginal stays exact.
          v = R;
          for (std::size_t i = 0; i < m; ++i) v *= (comps[i](a[0], b[i]) - mins[b[i]]) / R;
        }
      } else {
        for (std::size_t i = 0; i < m; ++i) v *= comps[i](a[i], b[i]);
      }
      joint(s, t) = v;
    }
  }
  spec.joint = make_markov(joint);
  return spec;
}

// ---------------------------------------------------------------- Interval maps

namespace {

std::vector<Rational> solve_rational(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) fail(ErrorKind::numeric, "singular rational system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

Rational abs_r(const Rational& r) { return r < 0 ? Rational(-r) : r; }

}  // namespace

std::vector<Rational> interval_map_invariant(const IntervalMapSpec& spec) {
  const std::size_t n = spec.branches();
  if (spec.Q.size() != n) fail(ErrorKind::structure, "interval map: Markov matrix not built");
  // h (Q - I) = 0, with the last equation replaced by sum h_i lambda_i = 1.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n));
  std::vector<Rational> b(n, Rational(0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) a[j][i] = spec.Q[i][j] - (i == j ? Rational(1) : Rational(0));
  for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = spec.lengths[i];
  b[n - 1] = 1;
  return solve_rational(std::move(a), std::move(b));
}

IntervalMapSpec make_interval_map(std::vector<Rational> breaks, std::vector<Rational> slopes,
                                  std::vector<Rational> intercepts, std::size_t copies, bool exact) {
  const std::size_t n = slopes.size();
  if (n == 0 || breaks.size() != n + 1 || intercepts.size() != n)
    fail(ErrorKind::shape, "interval map: need M+1 breakpoints and M slopes/intercepts");
  if (breaks.front() != 0 || breaks.back() != 1)
    fail(ErrorKind::invalid_spec, "interval map: breakpoints must run from 0 to 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(breaks[i] < breaks[i + 1])) fail(ErrorKind::invalid_spec, "interval map: breakpoints must increase");
    if (!(abs_r(slopes[i]) > 1)) fail(ErrorKind::invalid_spec, "interval map: every branch must be expanding");
  }
  if (copies == 0) fail(ErrorKind::invalid_spec, "interval map: copies must be >= 1");

  IntervalMapSpec spec;
  spec.breaks = std::move(breaks);
  spec.slopes = std::move(slopes);
  spec.intercepts = std::move(intercepts);
  spec.copies = copies;
  spec.exact = exact;
  spec.Q.assign(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    spec.lengths.push_back(spec.breaks[i + 1] - spec.breaks[i]);
    Rational lo = spec.slopes[i] * spec.breaks[i] + spec.intercepts[i];
    Rational hi = spec.slopes[i] * spec.breaks[i + 1] + spec.intercepts[i];
    if (hi < lo) std::swap(lo, hi);
    const bool lo_ok = std::find(spec.breaks.begin(), spec.breaks.end(), lo) != spec.breaks.end();
    const bool hi_ok = std::find(spec.breaks.begin(), spec.breaks.end(), hi) != spec.breaks.end();
    if (!lo_ok || !hi_ok)
      fail(ErrorKind::structure, "interval map: image of branch " + std::to_string(i) +
                                     " is not a union of partition intervals");
    const Rational inv = 1 / abs_r(spec.slopes[i]);
    for (std::size_t j = 0; j < n; ++j)
      if (spec.breaks[j] >= lo && spec.breaks[j + 1] <= hi) spec.Q[i][j] = inv;
  }
  spec.h = interval_map_invariant(spec);
  return spec;
}

Matrix IntervalMapSpec::q_double() const {
  Matrix m(branches(), branches());
  for (std::size_t i = 0; i < branches(); ++i)
    for (std::size_t j = 0; j < branches(); ++j) m(i, j) = to_double(Q[i][j]);
  return m;
}

std::vector<double> IntervalMapSpec::h_double() const {
  std::vector<double> out;
  for (const auto& v : h) out.push_back(to_double(v));
  return out;
}

FiniteMarkovSpec IntervalMapSpec::itinerary_chain() const {
  const std::size_t n = branches();
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = to_double(Q[i][j] * lengths[j] / lengths[i]);
  return make_markov(p);
}

// ---------------------------------------------------------------- Doeblin, factor

double DoeblinChainSpec::density(double x, double y) const {
  return 1.0 + eta * std::cos(2.0 * std::numbers::pi * (y - x));
}

void DoeblinChainSpec::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorKind::invalid_spec, "Doeblin kernel: eta must lie in (0,1)");
  if (copies < 1) fail(ErrorKind::invalid_spec, "Doeblin kernel: copies must be >= 1");
}

void FactorProductSpec::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(ErrorKind::invalid_spec, "factor process: epsilon must lie in (0,1)");
  if (epsilon == 0.5) fail(ErrorKind::parameter, "factor process: epsilon = 1/2 is excluded");
}

std::string system_name(const SystemSpec& spec) {
  static const char* names[] = {"markov",       "house_of_cards", "regenerative", "product_markov",
                                "interval_map", "doeblin",        "furstenberg"};
  return names[spec.index()];
}

// ---------------------------------------------------------------- Streams

double SymbolStream::real(std::size_t) const {
  fail(ErrorKind::unsupported, "this system has no real-valued coordinates");
}

namespace {

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += p[i];
    c[i] = s;
  }
  return c;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  const double x = u * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

MarkovStream::MarkovStream(const FiniteMarkovSpec& spec, std::uint64_t seed)
    : rng_(seed), n_(spec.states()), cdf_(n_ * n_) {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      s += spec.Q(i, j);
      cdf_[i * n_ + j] = s;
    }
  }
  state_ = pick(cumulative(spec.pi), rng_.uniform());
}

std::size_t MarkovStream::step(std::size_t from) {
  const double* row = cdf_.data() + from * n_;
  const double u = rng_.uniform() * row[n_ - 1];
  for (std::size_t j = 0; j + 1 < n_; ++j)
    if (u < row[j]) return j;
  return n_ - 1;
}

HocStream::HocStream(const HouseOfCardsSpec& spec, const HocStationary& stationary, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
  start(stationary);
}

HocStream::HocStream(const HouseOfCardsSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
  start(hoc_stationary(spec));
}

void HocStream::start(const HocStationary& stationary) {
  double u = rng_.uniform();
  std::size_t k = 0;
  while (k + 1 < stationary.pi.size() && u >= stationary.pi[k]) {
    u -= stationary.pi[k];
    ++k;
  }
  state_ = static_cast<std::int64_t>(k);
}

RegenerativeStream::RegenerativeStream(const RegenerativeSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
  if (spec.lengths == RegenerativeSpec::Lengths::shared) {
    q_cdf_ = cumulative(spec.q);
    std::vector<double> qbar(spec.q.size());
    for (std::size_t k = 1; k <= spec.q.size(); ++k) qbar[k - 1] = spec.q_bar(spec.p.min_symbol(), static_cast<std::int64_t>(k));
    qbar_cdf_ = cumulative(qbar);
  }
  // p_bar = p here: nu_a is the same for every symbol in both length forms.
  symbol_ = spec.p.sample(rng_);
  std::int64_t k;
  if (spec.lengths == RegenerativeSpec::Lengths::smith) {
    k = rng_.uniform() < 0.5 ? 1 : 2 + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(symbol_)));
  } else {
    k = static_cast<std::int64_t>(pick(qbar_cdf_, rng_.uniform())) + 1;
  }
  remaining_ = k - 1;
}

std::int64_t RegenerativeStream::draw_length(std::int64_t a) {
  if (spec_.lengths == RegenerativeSpec::Lengths::smith)
    return rng_.uniform() * static_cast<double>(a) < 1.0 ? a + 1 : 1;
  return static_cast<std::int64_t>(pick(q_cdf_, rng_.uniform())) + 1;
}

void RegenerativeStream::advance() {
  if (remaining_ > 0) {
    --remaining_;
    return;
  }
  symbol_ = spec_.p.sample(rng_);
  remaining_ = draw_length(symbol_) - 1;
}

ProductStream::ProductStream(const ProductChainSpec& spec, std::uint64_t seed)
    : chain_(spec.joint, seed), m_(spec.copies()) {
  const std::size_t total = spec.joint.states();
  coords_.resize(total * m_);
  for (std::size_t s = 0; s < total; ++s) {
    const auto c = spec.decode(s);
    std::copy(c.begin(), c.end(), coords_.begin() + static_cast<std::ptrdiff_t>(s * m_));
  }
  state_ = chain_.state();
}

void ProductStream::advance() {
  chain_.advance();
  state_ = chain_.state();
}

IntervalMapStream::IntervalMapStream(const IntervalMapSpec& spec, std::uint64_t seed) : rng_(seed) {
  for (const auto& b : spec.breaks) breaks_.push_back(to_double(b));
  for (const auto& s : spec.slopes) slopes_.push_back(to_double(s));
  for (const auto& c : spec.intercepts) intercepts_.push_back(to_double(c));
  std::vector<double> weight;
  for (std::size_t i = 0; i < spec.branches(); ++i) weight.push_back(to_double(spec.h[i] * spec.lengths[i]));
  const auto cdf = cumulative(weight);
  for (std::size_t c = 0; c < spec.copies; ++c) {
    const std::size_t i = pick(cdf, rng_.uniform());
    const double x = breaks_[i] + rng_.uniform() * (breaks_[i + 1] - breaks_[i]);
    x_.push_back(x);
    branch_.push_back(locate(x));
  }
}

std::size_t IntervalMapStream::locate(double x) const {
  const auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
  return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

void IntervalMapStream::advance() {
  static const double kBelowOne = std::nextafter(1.0, 0.0);
  for (std::size_t c = 0; c < x_.size(); ++c) {
    const std::size_t i = branch_[c];
    const double y = std::clamp(slopes_[i] * x_[c] + intercepts_[i], 0.0, kBelowOne);
    x_[c] = y;
    branch_[c] = locate(y);
  }
}

DoeblinStream::DoeblinStream(const DoeblinChainSpec& spec, std::uint64_t seed) : eta_(spec.eta), rng_(seed) {
  spec.validate();
  for (std::size_t c = 0; c < spec.copies; ++c) x_.push_back(rng_.uniform());
}

void DoeblinStream::advance() {
  const double bound = 1.0 + eta_;
  for (double& x : x_) {
    for (;;) {
      const double y = rng_.uniform();
      const double accept = (1.0 + eta_ * std::cos(2.0 * std::numbers::pi * (y - x))) / bound;
      if (rng_.uniform() < accept) {
        x = y;
        break;
      }
    }
  }
}

FactorStream::FactorStream(const FactorProductSpec& spec, std::uint64_t seed) : eps_(spec.epsilon), rng_(seed) {
  spec.validate();
  cur_ = draw();
  next_ = draw();
}

std::unique_ptr<SymbolStream> stationary_stream(const SystemSpec& spec, std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> std::unique_ptr<SymbolStream> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FiniteMarkovSpec>) return std::make_unique<MarkovStream>(s, seed);
        else if constexpr (std::is_same_v<T, HouseOfCardsSpec>) return std::make_unique<HocStream>(s, seed);
        else if constexpr (std::is_same_v<T, RegenerativeSpec>) return std::make_unique<RegenerativeStream>(s, seed);
        else if constexpr (std::is_same_v<T, ProductChainSpec>) return std::make_unique<ProductStream>(s, seed);
        else if constexpr (std::is_same_v<T, IntervalMapSpec>) return std::make_unique<IntervalMapStream>(s, seed);
        else if constexpr (std::is_same_v<T, DoeblinChainSpec>) return std::make_unique<DoeblinStream>(s, seed);
        else return std::make_unique<FactorStream>(s, seed);
      },
      spec);
}

}  // namespace visitlab
