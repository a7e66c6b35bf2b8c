#include "visitlab/predictions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "visitlab/error.hpp"
#include "visitlab/targets.hpp"

namespace visitlab {

std::string PredictionResult::family_name() const {
  switch (family) {
    case Family::polya_aeppli: return "polya-aeppli";
    case Family::poisson: return "poisson";
    case Family::general: return "general";
  }
  return "general";
}

namespace {

// Geometric parameter if alpha_l = (1-p) p^(l-1) holds on every listed term.
std::optional<double> geometric_shape(const std::vector<double>& alpha) {
  const double p = 1.0 - alpha[0];
  if (p < 0.0 || p >= 1.0) return std::nullopt;
  double expect = alpha[0];
  for (double a : alpha) {
    if (std::abs(a - expect) > 1e-12 * std::max(expect, 1e-300) + 1e-300) return std::nullopt;
    expect *= p;
  }
  return p;
}

PredictionResult pa_prediction(double p, double t, std::string provenance) {
  std::vector<double> alpha;
  const std::size_t L = geometric_terms(p);
  double a = 1.0 - p;
  for (std::size_t l = 0; l < L; ++l, a *= p) alpha.push_back(a);
  return prediction_from_alpha(std::move(alpha), t, std::move(provenance));
}

std::vector<std::int64_t> primitive_root(const std::vector<std::int64_t>& w) {
  const std::size_t m = w.size();
  for (std::size_t d = 1; d < m; ++d) {
    if (m % d) continue;
    bool ok = true;
    for (std::size_t i = d; i < m && ok; ++i) ok = w[i] == w[i - d];
    if (ok) return {w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d)};
  }
  return w;
}

}  // namespace

std::size_t geometric_terms(double p, std::size_t cap) {
  if (p <= 0.0) return 1;
  const double L = std::ceil(std::log(1e-12) / std::log(p)) + 1;
  return std::clamp<std::size_t>(static_cast<std::size_t>(L), 1, cap);
}

PredictionResult prediction_from_alpha(std::vector<double> alpha, double t, std::string provenance) {
  const ClusterLaw law = cluster_law_from_alphas(alpha, t);
  PredictionResult r;
  r.cp_spec = law.spec;
  r.extremal_index = law.extremal_index;
  r.mean_cluster = law.mean_cluster;
  r.notes.push_back(std::move(provenance));
  if (auto p = geometric_shape(alpha)) {
    r.p = *p;
    r.family = *p == 0.0 ? PredictionResult::Family::poisson : PredictionResult::Family::polya_aeppli;
  }
  r.alpha = std::move(alpha);
  return r;
}

PredictionResult predict_hoc(double r_inf, double t, std::size_t L) {
  if (!(r_inf > 0.0 && r_inf < 1.0))
    fail(ErrorKind::degenerate, "predict_hoc: r_inf must lie strictly between 0 and 1");
  if (L == 0) fail(ErrorKind::invalid_input, "predict_hoc: L must be >= 1");
  std::vector<double> alpha(L);
  double a = r_inf;
  for (std::size_t k = 0; k < L; ++k, a *= 1.0 - r_inf) alpha[k] = a;
  auto r = prediction_from_alpha(std::move(alpha), t, "House of Cards: alpha_{k+1} = r_inf (1 - r_inf)^k");
  // Truncation keeps the shape exactly geometric, so the tag always holds.
  r.family = PredictionResult::Family::polya_aeppli;
  r.p = 1.0 - r_inf;
  return r;
}

PredictionResult predict_regenerative(const std::vector<double>& q, double t) {
  if (q.empty()) fail(ErrorKind::invalid_input, "predict_regenerative: empty block-length law");
  double nu = 0.0, m3 = 0.0, total = 0.0;
  for (std::size_t k = 1; k <= q.size(); ++k) {
    const double qk = q[k - 1];
    if (!(qk >= 0.0)) fail(ErrorKind::invalid_input, "predict_regenerative: negative probability");
    const double kk = static_cast<double>(k);
    nu += kk * qk;
    m3 += kk * kk * kk * qk;
    total += qk;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::invalid_input, "predict_regenerative: q does not sum to one");
  std::vector<double> alpha(q.size());
  double tail = 0.0;
  for (std::size_t k = q.size(); k-- > 0;) {
    tail += q[k];
    alpha[k] = tail / nu;
  }
  auto r = prediction_from_alpha(std::move(alpha), t, "regenerative blocks: lambda_k = q(k) / sum k q(k)");
  // A heavy truncated tail hints that the third moment may be infinite.
  const double last = static_cast<double>(q.size());
  if (last * last * last * q.back() > 1e-3 * m3)
    r.notes.push_back("warning: third moment of q is dominated by the truncation point; it may be infinite");
  return r;
}

PredictionResult predict_periodic_cylinder(const FiniteMarkovSpec& chain, const std::vector<std::int64_t>& word,
                                           double t) {
  if (word.empty()) fail(ErrorKind::invalid_input, "periodic cylinder: empty word");
  const auto root = primitive_root(word);
  const auto n = static_cast<std::int64_t>(chain.states());
  double p = 1.0;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto a = root[i], b = root[(i + 1) % root.size()];
    if (a < 0 || a >= n || b < 0 || b >= n) fail(ErrorKind::structure, "periodic cylinder: symbol outside the alphabet");
    const double q = chain.Q(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    if (!(q > 0.0)) fail(ErrorKind::structure, "periodic cylinder: word is not admissible");
    p *= q;
  }
  std::ostringstream prov;
  prov << "periodic point of period " << root.size() << ": p = prod Q(s_i, s_{i+1})";
  if (root.size() != word.size()) prov << " (word reduced to its primitive period)";
  if (p >= 1.0) fail(ErrorKind::degenerate, "periodic cylinder: p = 1, the orbit is deterministic");
  return pa_prediction(p, t, prov.str());
}

PredictionResult predict_aperiodic(double t) {
  return prediction_from_alpha({1.0}, t, "aperiodic point: W is Poisson(t)");
}

PredictionResult predict_sync_markov(const Matrix& qdelta, double t) {
  const double rho = spectral_radius(qdelta);
  if (rho >= 1.0 - 1e-12)
    fail(ErrorKind::degenerate, "synchronisation: spectral radius of Q^Delta is 1; copies never separate");
  return pa_prediction(rho, t, "synchronisation: p = spectral radius of Q^Delta");
}

bool is_param_example(const Matrix& q1, const Matrix& q2) {
  const Matrix e1{{0.2, 0.8}, {0.3, 0.7}}, e2{{0.8, 0.2}, {0.1, 0.9}};
  auto same = [](const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j)
        if (std::abs(a(i, j) - b(i, j)) > 1e-15) return false;
    return true;
  };
  return same(q1, e1) && same(q2, e2);
}

double param_closed_form(double g) {
  const double disc = 2401 + 7996 * g + 3006 * g * g - 7604 * g * g * g + 4201 * g * g * g * g;
  return (79 + 2 * g + 19 * g * g + std::sqrt(disc)) / 200;
}

ParamCouplingPrediction predict_param_coupling(const Matrix& q1, const Matrix& q2, double gamma, double t) {
  if (q1.rows() != 2 || q2.rows() != 2)
    fail(ErrorKind::unsupported, "parametrized coupling needs the binary alphabet {0,1}");
  const Matrix qd = build_qdelta({q1, q2}, Coupling{CouplingKind::parametrized, gamma});
  const double rho = spectral_radius(qd);
  ParamCouplingPrediction out;
  if (rho >= 1.0 - 1e-12) {
    out.result.family = PredictionResult::Family::general;
    out.result.p = rho;
    out.result.notes.push_back("degenerate: spectral radius 1, the copies stay synchronised");
  } else {
    out.result = pa_prediction(rho, t, "parametrized coupling: p = spectral radius of Q^Delta_gamma");
  }
  out.result.p = rho;
  if (is_param_example(q1, q2)) {
    out.closed_form = param_closed_form(gamma);
    out.closed_form_agrees = std::abs(*out.closed_form - rho) < 1e-10;
    std::ostringstream os;
    os.precision(12);
    os << "closed form " << *out.closed_form << " vs spectral " << rho
       << (out.closed_form_agrees ? " (agree)" : " (DISAGREE)");
    out.result.notes.push_back(os.str());
  }
  return out;
}

// ---------------------------------------------------------------- interval maps

namespace {

template <class T, class Conv>
std::pair<T, T> diagonal_sum(const IntervalMapSpec& map, std::size_t k, Conv conv) {
  const std::size_t n = map.branches();
  std::vector<T> h(n), lam(n), inv_slope(n);
  std::vector<std::vector<T>> q2(n, std::vector<T>(n));
  for (std::size_t a = 0; a < n; ++a) {
    h[a] = conv(map.h[a]);
    lam[a] = conv(map.lengths[a]);
    const Rational s = map.slopes[a] < 0 ? Rational(-map.slopes[a]) : map.slopes[a];
    inv_slope[a] = conv(Rational(1) / s);
    for (std::size_t b = 0; b < n; ++b) q2[a][b] = conv(map.Q[a][b] * map.Q[a][b]);
  }
  T den = 0;
  for (std::size_t a = 0; a < n; ++a) den += h[a] * h[a] * lam[a];
  if (k == 0) return {den, den};
  // v(a_i) carries h^2_{a_1} prod Q^2 along the word so far.
  std::vector<T> v(n);
  for (std::size_t a = 0; a < n; ++a) v[a] = h[a] * h[a];
  for (std::size_t step = 1; step < k; ++step) {
    std::vector<T> w(n, T(0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (q2[a][b] != 0) w[b] += v[a] * q2[a][b];
    v = std::move(w);
  }
  T num = 0;
  for (std::size_t b = 0; b < n; ++b) num += v[b] * lam[b] * inv_slope[b];
  return {num, den};
}

}  // namespace

GeometricAlpha geometric_alpha(const IntervalMapSpec& map, std::size_t k) {
  if (map.h.size() != map.branches()) fail(ErrorKind::structure, "geometric_alpha: map has no invariant density");
  GeometricAlpha out;
  if (map.exact) {
    auto [num, den] = diagonal_sum<Rational>(map, k, [](const Rational& r) { return r; });
    out.value = num / den;
    out.approx = to_double(out.value);
    out.exact = true;
  } else {
    auto [num, den] = diagonal_sum<double>(map, k, [](const Rational& r) { return to_double(r); });
    out.approx = num / den;
    out.value = Rational(0);
    out.exact = false;
  }
  return out;
}

PredictionResult predict_geometric_interval(const IntervalMapSpec& map, double t, std::size_t count) {
  std::vector<double> hat;
  for (std::size_t k = 0; k <= count; ++k) {
    auto [num, den] = diagonal_sum<double>(map, k, [](const Rational& r) { return to_double(r); });
    hat.push_back(num / den);
  }
  std::vector<double> alpha(count);
  for (std::size_t l = 0; l < count; ++l) alpha[l] = std::max(0.0, hat[l] - hat[l + 1]);
  auto r = prediction_from_alpha(std::move(alpha), t,
                                 "geometric diagonal of two uncoupled copies: alpha_l = hat_l - hat_{l+1}");
  r.notes.push_back(map.exact ? "alpha_hat from exact cylinder lengths" : "alpha_hat in floating point (inexact map data)");
  return r;
}

// ---------------------------------------------------------------- factor process

FurstenbergRatio furstenberg_ratio(double epsilon, const std::vector<std::int64_t>& z) {
  FactorProductSpec{epsilon}.validate();
  FurstenbergRatio r;
  r.nu_z = factor_cylinder_measure(epsilon, z);
  std::vector<std::int64_t> one_z{1};
  one_z.insert(one_z.end(), z.begin(), z.end());
  r.nu_1z = factor_cylinder_measure(epsilon, one_z);
  r.ratio = r.nu_1z / r.nu_z;
  return r;
}

double furstenberg_cylinder_ratio(double epsilon, const std::vector<std::int64_t>& y, std::size_t n) {
  if (y.empty() || n == 0) fail(ErrorKind::invalid_input, "furstenberg_cylinder_ratio: empty word or n = 0");
  FactorProductSpec{epsilon}.validate();
  // log nu of the length-len prefix of y^infinity; logs keep long words
  // away from underflow.
  const double le = std::log(epsilon), lf = std::log1p(-epsilon);
  auto log_nu = [&](std::size_t len) {
    double plus = 1, minus = 0;
    std::int64_t x = 1;
    for (std::size_t i = 0; i < len; ++i) {
      x *= y[i % y.size()];
      (x == 1 ? plus : minus) += 1;
    }
    const double u = plus * le + minus * lf, v = minus * le + plus * lf;
    const double hi = std::max(u, v);
    return hi + std::log1p(std::exp(std::min(u, v) - hi));
  };
  return std::exp(log_nu(n + y.size()) - log_nu(n));
}

FurstenbergPrediction predict_furstenberg(double epsilon, const std::vector<std::int64_t>& y, double t) {
  FactorProductSpec{epsilon}.validate();
  if (y.empty()) fail(ErrorKind::invalid_input, "predict_furstenberg: empty word");
  for (auto s : y)
    if (s != 1 && s != -1) fail(ErrorKind::invalid_input, "predict_furstenberg: symbols must be +1 or -1");
  const auto root = primitive_root(y);
  const std::size_t m = root.size();

  // Lift of y starting at +1; count +1 over one period of y.
  std::size_t plus = 0;
  std::int64_t x = 1, sign = 1;
  for (auto s : root) {
    plus += x == 1;
    x *= s;
    sign *= s;
  }
  const double e = epsilon, f = 1 - epsilon;
  const double kk = static_cast<double>(plus), rest = static_cast<double>(m - plus);
  const double a = std::pow(e, kk) * std::pow(f, rest);
  const double b = std::pow(f, kk) * std::pow(e, rest);
  // Dominant lift: the one whose +1 density sits on the same side of 1/2 as epsilon.
  const double density = kk / static_cast<double>(m);
  const double case_value = density == 0.5 ? a : (((density > 0.5) == (e > 0.5)) ? a : b);

  FurstenbergPrediction out;
  out.case_value = case_value;
  out.lift_plus = plus;
  // The subdominant lift decays like (min(a,b)/max(a,b))^(n/m); check far
  // enough out that it is below 1e-12.
  std::size_t n_check = 80;
  if (a != b) {
    const double per_period = std::abs(std::log(a / b));
    n_check = std::max<std::size_t>(n_check, m * static_cast<std::size_t>(std::ceil(28.0 / per_period) + 1));
  }
  n_check = std::min<std::size_t>(n_check, 100000);
  out.check_n = n_check;
  out.exact_value = furstenberg_cylinder_ratio(epsilon, root, n_check);
  if (std::abs(out.exact_value - case_value) > 1e-8) {
    std::ostringstream os;
    os.precision(12);
    os << "predict_furstenberg: case formula " << case_value << " disagrees with the exact ratio "
       << out.exact_value << " at n = " << n_check;
    if (sign == -1)
      os << "; the lift has period 2m and the ratio alternates (n + m gives "
         << furstenberg_cylinder_ratio(epsilon, root, n_check + m) << "), so no limit exists";
    fail(ErrorKind::numeric, os.str());
  }
  std::ostringstream prov;
  prov << "factor of i.i.d. signs: p = eps^k (1-eps)^(m-k) with k = " << plus << " (+1 count of the lift), m = " << m;
  out.result = pa_prediction(case_value, t, prov.str());
  out.result.notes.push_back("exact ratio at n = " + std::to_string(n_check) + " agrees within 1e-8");
  return out;
}

RenyiPressure renyi_pressure_markov(const Matrix& q, double order) {
  require_stochastic(q);
  if (!(order > 0.0)) fail(ErrorKind::invalid_input, "renyi_pressure_markov: q must be positive");
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j)
      if (!(q(i, j) > 0.0)) fail(ErrorKind::unsupported, "renyi_pressure_markov: Q must be strictly positive");
  RenyiPressure r;
  r.pressure = std::log(spectral_radius(hadamard_power(q, 1.0 + order)));
  r.renyi = -r.pressure / order;
  return r;
}

// ---------------------------------------------------------------- Stein bracket

double MixingRate::operator()(double k) const {
  if (kind == Kind::exponential) return c * std::pow(rate, std::max(k, 0.0));
  return c * std::pow(std::max(k, 1.0), -rate);
}

double MixingRate::tail(std::size_t from) const {
  if (kind == Kind::exponential) {
    if (!(rate > 0.0 && rate < 1.0)) fail(ErrorKind::invalid_input, "exponential mixing rate must lie in (0,1)");
    return c * std::pow(rate, static_cast<double>(from)) / (1.0 - rate);
  }
  if (!(rate > 1.0)) fail(ErrorKind::invalid_input, "polynomial mixing needs exponent > 1 for a finite tail sum");
  // Direct sum, then Euler-Maclaurin for the remainder.
  const std::size_t start = std::max<std::size_t>(from, 1), stop = start + 2000;
  double s = 0.0;
  for (std::size_t j = start; j < stop; ++j) s += std::pow(static_cast<double>(j), -rate);
  const double x = static_cast<double>(stop);
  s += std::pow(x, 1.0 - rate) / (rate - 1.0) + 0.5 * std::pow(x, -rate) + rate / 12.0 * std::pow(x, -rate - 1.0);
  if (from == 0) s += 1.0;  // phi(0) is defined as phi(1)
  return c * s;
}

SteinBracket stein_bracket(const SteinBracketInputs& in, SteinMode mode, std::size_t grid) {
  if (!(in.mu > 0.0 && in.mu <= 1.0)) fail(ErrorKind::invalid_input, "stein_bracket: mu(U) must lie in (0,1]");
  if (in.outer.size() < in.n) fail(ErrorKind::invalid_input, "stein_bracket: need mu(U^j) for j = 1..n");
  for (double v : in.outer)
    if (!(v > 0.0 && v <= 1.0)) fail(ErrorKind::invalid_input, "stein_bracket: outer measures must lie in (0,1]");
  const double upper = in.t / in.mu;
  const double K = static_cast<double>(in.K);
  if (!(K < upper)) fail(ErrorKind::parameter, "stein_bracket: K must be below t / mu(U)");

  std::vector<std::uint64_t> deltas;
  for (std::size_t i = 1; i < grid; ++i) {
    const double d = K * std::pow(upper / K, static_cast<double>(i) / static_cast<double>(grid));
    const auto di = static_cast<std::uint64_t>(std::llround(d));
    if (static_cast<double>(di) > K && static_cast<double>(di) < upper && (deltas.empty() || deltas.back() != di))
      deltas.push_back(di);
  }
  if (deltas.empty()) fail(ErrorKind::parameter, "stein_bracket: no integer Delta strictly between K and t / mu(U)");

  const std::size_t half = in.K / 2;
  double outer_sum = 0.0;
  for (std::size_t j = std::max<std::size_t>(half, 1); j <= in.n; ++j) outer_sum += in.outer[j - 1];
  const double fixed = outer_sum + (mode == SteinMode::phi ? in.mixing.tail(half) : 0.0);

  SteinBracket best{std::numeric_limits<double>::infinity(), 0};
  for (auto d : deltas) {
    const double lag = static_cast<double>(d) - static_cast<double>(in.n);
    const double mix = mode == SteinMode::phi ? K * in.mixing(lag) / in.mu : in.mixing(lag);
    const double v = mix + static_cast<double>(d) * in.mu + fixed;
    if (v < best.value) best = {v, d};
  }
  best.value *= in.t;
  return best;
}

double doeblin_alpha2_bound(double K, double upper, double delta) {
  if (!(K > 0 && upper > 0 && delta > 0)) fail(ErrorKind::invalid_input, "doeblin_alpha2_bound: arguments must be positive");
  return 2.0 * K * upper * (2.0 * delta);
}

std::vector<double> renewal_ratio_sequence(const HouseOfCardsSpec& spec, std::size_t n_from, std::size_t n_to) {
  if (n_from < 1 || n_from > n_to) fail(ErrorKind::invalid_input, "renewal_ratio_sequence: bad n range");
  const auto st = hoc_stationary(spec);
  const std::size_t cap = st.cap();
  // lp[i] = sum_{s < i} log(1 - r_s)
  std::vector<double> lp(cap + n_to + 2, 0.0);
  for (std::size_t i = 0; i + 1 < lp.size(); ++i) lp[i + 1] = lp[i] + std::log1p(-spec.r(i));
  auto log_mass = [&](std::size_t n) {
    // log sum_j pi(j) prod_{i=j}^{j+n-1} (1 - r_i)
    std::vector<double> terms;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cap; ++j) {
      const double v = std::log(st.pi[j]) + lp[j + n] - lp[j];
      terms.push_back(v);
      mx = std::max(mx, v);
    }
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : terms) s += std::exp(v - mx);
    return mx + std::log(s);
  };
  std::vector<double> out;
  for (std::size_t n = n_from; n <= n_to; ++n) out.push_back(std::exp(log_mass(n + 1) - log_mass(n)));
  return out;
}

}  // namespace visitlab
