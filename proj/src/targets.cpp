#include "visitlab/targets.hpp"

#include <cmath>
#include <sstream>

#include "visitlab/error.hpp"

namespace visitlab {

std::size_t window_length(const TargetSpec& target) {
  return std::visit(
      [](const auto& t) -> std::size_t {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Cylinder>) return t.word.size();
        else if constexpr (std::is_same_v<T, RunLength> || std::is_same_v<T, SyncCylinder>) return t.n;
        else return 1;
      },
      target);
}

std::string describe(const TargetSpec& target) {
  std::ostringstream os;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          os << "Cylinder[";
          for (std::size_t i = 0; i < t.word.size(); ++i) os << (i ? "," : "") << t.word[i];
          os << "]";
        } else if constexpr (std::is_same_v<T, RunLength>) {
          os << "RunLength(n=" << t.n << ",l=" << t.l << ")";
        } else if constexpr (std::is_same_v<T, HalfLine>) {
          os << "HalfLine(n=" << t.n << ")";
        } else if constexpr (std::is_same_v<T, SyncCylinder>) {
          os << "SyncCylinder(n=" << t.n << ",m=" << t.m << ")";
        } else {
          os << "GeoDiagonal(delta=" << t.delta << ",m=" << t.m << ")";
        }
      },
      target);
  return os.str();
}

void validate(const TargetSpec& target) {
  std::visit(
      [](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Cylinder>) {
          if (t.word.empty()) fail(ErrorKind::invalid_spec, "cylinder word must be nonempty");
        } else if constexpr (std::is_same_v<T, RunLength>) {
          if (t.n < 1) fail(ErrorKind::invalid_spec, "run length n must be >= 1");
        } else if constexpr (std::is_same_v<T, SyncCylinder>) {
          if (t.n < 1 || t.m < 2) fail(ErrorKind::invalid_spec, "sync cylinder needs n >= 1 and m >= 2");
        } else if constexpr (std::is_same_v<T, GeoDiagonal>) {
          if (!(t.delta > 0.0) || t.m < 2) fail(ErrorKind::invalid_spec, "geometric diagonal needs delta > 0 and m >= 2");
        }
      },
      target);
}

TargetSpec TargetFamily::at(double level) const {
  const auto n = static_cast<std::size_t>(std::llround(level));
  if (kind != Kind::geo_diagonal && (level < 1 || std::abs(level - static_cast<double>(n)) > 1e-9))
    fail(ErrorKind::invalid_spec, "target level must be a positive integer");
  TargetSpec out;
  switch (kind) {
    case Kind::cylinder: {
      if (word.empty()) fail(ErrorKind::invalid_spec, "cylinder family needs a word");
      if (!periodic && n > word.size())
        fail(ErrorKind::invalid_spec, "cylinder level exceeds the length of the supplied point");
      Cylinder c;
      for (std::size_t i = 0; i < n; ++i) c.word.push_back(word[i % word.size()]);
      out = c;
      break;
    }
    case Kind::run_length: out = RunLength{n, l}; break;
    case Kind::half_line: out = HalfLine{static_cast<std::int64_t>(n)}; break;
    case Kind::sync_cylinder: out = SyncCylinder{n, m}; break;
    case Kind::geo_diagonal: out = GeoDiagonal{level, m}; break;
  }
  validate(out);
  return out;
}

std::string TargetFamily::name() const {
  switch (kind) {
    case Kind::cylinder: return periodic ? "cylinder(periodic point)" : "cylinder(point)";
    case Kind::run_length: return "run_length";
    case Kind::half_line: return "half_line";
    case Kind::sync_cylinder: return "sync_cylinder";
    case Kind::geo_diagonal: return "geo_diagonal";
  }
  return "?";
}

CylinderDetector::CylinderDetector(const Cylinder& c) : word_(c.word), fail_(c.word.size() + 1, 0) {
  if (word_.empty()) fail(ErrorKind::invalid_spec, "cylinder word must be nonempty");
  for (std::size_t k = 1, b = 0; k < word_.size(); ++k) {
    while (b > 0 && word_[k] != word_[b]) b = fail_[b];
    if (word_[k] == word_[b]) ++b;
    fail_[k + 1] = b;
  }
}

Detector make_detector(const TargetSpec& target) {
  validate(target);
  return std::visit(
      [](const auto& t) -> Detector {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, Cylinder>) return CylinderDetector(t);
        else if constexpr (std::is_same_v<T, RunLength>) return RunLengthDetector(t);
        else if constexpr (std::is_same_v<T, HalfLine>) return HalfLineDetector(t);
        else if constexpr (std::is_same_v<T, SyncCylinder>) return SyncDetector(t);
        else return GeoDetector(t);
      },
      target);
}

namespace {

std::size_t copies_of(const SystemSpec& system) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ProductChainSpec>) return s.copies();
        else if constexpr (std::is_same_v<T, IntervalMapSpec> || std::is_same_v<T, DoeblinChainSpec>) return s.copies;
        else return 1;
      },
      system);
}

bool has_reals(const SystemSpec& system) {
  return std::holds_alternative<IntervalMapSpec>(system) || std::holds_alternative<DoeblinChainSpec>(system);
}

}  // namespace

void check_compatible(const SystemSpec& system, const TargetSpec& target) {
  validate(target);
  const std::size_t copies = copies_of(system);
  if (const auto* s = std::get_if<SyncCylinder>(&target); s && s->m > copies)
    fail(ErrorKind::unsupported, "sync target needs " + std::to_string(s->m) + " copies, system has " +
                                     std::to_string(copies));
  if (const auto* g = std::get_if<GeoDiagonal>(&target)) {
    if (!has_reals(system)) fail(ErrorKind::unsupported, "geometric diagonal needs a real-valued system");
    if (g->m > copies) fail(ErrorKind::unsupported, "geometric diagonal needs more copies than the system has");
  }
  if (std::holds_alternative<DoeblinChainSpec>(system) && !std::holds_alternative<GeoDiagonal>(target))
    fail(ErrorKind::unsupported, "Doeblin chains only support geometric diagonal targets");
}

std::vector<std::uint8_t> hits(SymbolStream& stream, const TargetSpec& target, std::uint64_t horizon) {
  if (window_length(target) > horizon + 1)
    fail(ErrorKind::invalid_input, "hits: window longer than the horizon");
  auto det = make_detector(target);
  std::vector<std::uint8_t> out;
  std::visit([&](auto& d) { fill_hits(stream, d, horizon, out); }, det);
  return out;
}

// ---------------------------------------------------------------- measures

double factor_cylinder_measure(double epsilon, const std::vector<std::int64_t>& z) {
  // Lift starting at +1; the other lift is its negation.
  std::size_t plus = 1, minus = 0;
  std::int64_t x = 1;
  for (std::int64_t zi : z) {
    if (zi != 1 && zi != -1) fail(ErrorKind::invalid_input, "factor cylinder: symbols must be +1 or -1");
    x *= zi;
    (x == 1 ? plus : minus) += 1;
  }
  const double e = epsilon, f = 1.0 - epsilon;
  const double a = static_cast<double>(plus), b = static_cast<double>(minus);
  return std::pow(e, a) * std::pow(f, b) + std::pow(e, b) * std::pow(f, a);
}

namespace {

TargetMeasure exact(double v, std::string formula) {
  return TargetMeasure{v, TargetMeasure::Method::exact, 0.0, std::move(formula)};
}

std::vector<double> markov_path_vector(const FiniteMarkovSpec& m, const std::vector<char>& allowed, std::size_t n) {
  std::vector<double> v(m.states(), 0.0);
  for (std::size_t a = 0; a < m.states(); ++a) v[a] = allowed[a] ? m.pi[a] : 0.0;
  for (std::size_t step = 1; step < n; ++step) {
    v = row_times(v, m.Q);
    for (std::size_t a = 0; a < v.size(); ++a)
      if (!allowed[a]) v[a] = 0.0;
  }
  return v;
}

double markov_cylinder(const FiniteMarkovSpec& m, const std::vector<std::int64_t>& w) {
  const auto n = static_cast<std::int64_t>(m.states());
  for (auto s : w)
    if (s < 0 || s >= n) return 0.0;
  double p = m.pi[static_cast<std::size_t>(w[0])];
  for (std::size_t i = 1; i < w.size(); ++i)
    p *= m.Q(static_cast<std::size_t>(w[i - 1]), static_cast<std::size_t>(w[i]));
  return p;
}

double sync_measure(const FiniteMarkovSpec& joint, const ProductChainSpec& shape, std::size_t n,
                    const Matrix& qdelta) {
  std::vector<double> v(shape.alphabet);
  for (std::size_t a = 0; a < shape.alphabet; ++a)
    v[a] = joint.pi[shape.encode(std::vector<std::size_t>(shape.copies(), a))];
  for (std::size_t step = 1; step < n; ++step) v = row_times(v, qdelta);
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

std::optional<TargetMeasure> try_exact(const TargetSpec& target, const SystemSpec& system) {
  using R = std::optional<TargetMeasure>;
  if (const auto* m = std::get_if<FiniteMarkovSpec>(&system)) {
    if (const auto* c = std::get_if<Cylinder>(&target))
      return exact(markov_cylinder(*m, c->word), "pi(w1) prod Q(w_i, w_i+1)");
    if (const auto* r = std::get_if<RunLength>(&target)) {
      std::vector<char> ok(m->states());
      for (std::size_t a = 0; a < ok.size(); ++a) ok[a] = static_cast<std::int64_t>(a) >= r->l;
      const auto v = markov_path_vector(*m, ok, r->n);
      double s = 0.0;
      for (double x : v) s += x;
      return exact(s, "restricted path sum over states >= l");
    }
    if (const auto* h = std::get_if<HalfLine>(&target)) {
      double s = 0.0;
      for (std::size_t a = 0; a < m->states(); ++a)
        if (static_cast<std::int64_t>(a) >= h->n) s += m->pi[a];
      return exact(s, "sum_{a>=n} pi(a)");
    }
    return R{};
  }
  if (const auto* hoc = std::get_if<HouseOfCardsSpec>(&system)) {
    const auto st = hoc_stationary(*hoc);
    if (const auto* r = std::get_if<RunLength>(&target)) {
      double s = 0.0;
      for (std::size_t k = static_cast<std::size_t>(std::max<std::int64_t>(r->l, 0)); k < st.cap(); ++k) {
        double p = st.pi[k];
        for (std::size_t i = k; i + 2 <= k + r->n; ++i) p *= 1.0 - hoc->r(i);
        s += p;
      }
      return exact(s, "sum_{s>=l} pi(s) prod_{i=s}^{s+n-2} (1-r_i)");
    }
    if (const auto* c = std::get_if<Cylinder>(&target)) {
      const auto& w = c->word;
      if (w[0] < 0 || static_cast<std::size_t>(w[0]) >= st.cap()) return exact(0.0, "HoC path probability");
      double p = st.pi[static_cast<std::size_t>(w[0])];
      for (std::size_t i = 1; i < w.size(); ++i) {
        const auto from = static_cast<std::size_t>(w[i - 1]);
        if (w[i] == 0) p *= hoc->r(from);
        else if (w[i] == w[i - 1] + 1) p *= 1.0 - hoc->r(from);
        else p = 0.0;
      }
      return exact(p, "HoC path probability");
    }
    if (const auto* h = std::get_if<HalfLine>(&target)) {
      double s = 0.0;
      for (std::size_t k = static_cast<std::size_t>(std::max<std::int64_t>(h->n, 0)); k < st.cap(); ++k) s += st.pi[k];
      return exact(s, "sum_{a>=n} pi(a)");
    }
    return R{};
  }
  if (const auto* reg = std::get_if<RegenerativeSpec>(&system)) {
    if (const auto* h = std::get_if<HalfLine>(&target)) {
      // p_bar = p in both supported forms.
      return exact(reg->p.tail(h->n), "sum_{a>=n} p_bar(a)");
    }
    return R{};
  }
  if (const auto* prod = std::get_if<ProductChainSpec>(&system)) {
    if (const auto* s = std::get_if<SyncCylinder>(&target); s && s->m == prod->copies())
      return exact(sync_measure(prod->joint, *prod, s->n, build_qdelta(prod->components, prod->coupling)),
                   "diagonal stationary mass times (Q^Delta)^(n-1)");
    return R{};
  }
  if (const auto* im = std::get_if<IntervalMapSpec>(&system)) {
    const auto chain = im->itinerary_chain();
    if (const auto* c = std::get_if<Cylinder>(&target); c && im->copies == 1)
      return exact(markov_cylinder(chain, c->word), "itinerary chain cylinder");
    if (const auto* s = std::get_if<SyncCylinder>(&target); s && s->m == im->copies) {
      const std::vector<Matrix> comps(im->copies, chain.Q);
      ProductChainSpec shape;
      shape.components = comps;
      shape.alphabet = chain.states();
      // Independent copies: the joint stationary law is a product.
      FiniteMarkovSpec joint;
      std::size_t total = 1;
      for (std::size_t i = 0; i < im->copies; ++i) total *= shape.alphabet;
      joint.pi.assign(total, 1.0);
      for (std::size_t st = 0; st < total; ++st)
        for (std::size_t a : shape.decode(st)) joint.pi[st] *= chain.pi[a];
      return exact(sync_measure(joint, shape, s->n, build_qdelta(comps, Coupling{})),
                   "independent itinerary chains, diagonal path sum");
    }
    return R{};
  }
  if (const auto* d = std::get_if<DoeblinChainSpec>(&system)) {
    if (const auto* g = std::get_if<GeoDiagonal>(&target); g && g->m <= d->copies) {
      const double dl = std::min(g->delta, 1.0);
      const double m = static_cast<double>(g->m);
      return exact(m * std::pow(dl, m - 1) - (m - 1) * std::pow(dl, m),
                   "range of m Lebesgue points <= delta: m d^(m-1) - (m-1) d^m");
    }
    return R{};
  }
  if (const auto* f = std::get_if<FactorProductSpec>(&system)) {
    if (const auto* c = std::get_if<Cylinder>(&target))
      return exact(factor_cylinder_measure(f->epsilon, c->word), "sum over the two lifts");
    return R{};
  }
  return R{};
}

template <class S, class D>
bool first_window_hit(S& stream, D& det) {
  bool hit = false;
  for (std::size_t s = 0; s < det.window(); ++s) {
    if (s > 0) stream.advance();
    hit = det.push(stream);
  }
  return hit;
}

}  // namespace

TargetMeasure measure_monte_carlo(const TargetSpec& target, const SystemSpec& system, const MonteCarloOptions& mc) {
  check_compatible(system, target);
  if (mc.samples == 0) fail(ErrorKind::invalid_input, "monte carlo measure needs samples >= 1");
  std::uint64_t count = 0;
  for (std::uint64_t i = 0; i < mc.samples; ++i) {
    auto stream = stationary_stream(system, stream_seed(mc.seed, i));
    auto det = make_detector(target);
    count += std::visit([&](auto& d) { return first_window_hit(*stream, d); }, det) ? 1 : 0;
  }
  if (count == 0)
    throw InsufficientDataError("monte carlo measure: target never observed; raise samples", count);
  const double n = static_cast<double>(mc.samples);
  const double p = static_cast<double>(count) / n;
  return TargetMeasure{p, TargetMeasure::Method::monte_carlo, std::sqrt(p * (1 - p) / n),
                       "monte carlo over stationary windows"};
}

TargetMeasure measure_exact(const TargetSpec& target, const SystemSpec& system, const MonteCarloOptions& mc) {
  check_compatible(system, target);
  if (auto m = try_exact(target, system)) {
    if (!(m->value > 0.0))
      fail(ErrorKind::invalid_spec, "target " + describe(target) + " has zero measure");
    return *m;
  }
  return measure_monte_carlo(target, system, mc);
}

std::vector<double> outer_measures(const TargetFamily& family, const SystemSpec& system, std::size_t n,
                                   std::size_t j_from, std::size_t j_to) {
  if (family.geometric()) fail(ErrorKind::unsupported, "outer approximations need a symbolic target family");
  if (j_from < 1 || j_from > j_to) fail(ErrorKind::invalid_input, "outer_measures: empty or invalid j range");
  std::vector<double> out;
  for (std::size_t j = j_from; j <= j_to; ++j) {
    // Nested families: U_n^j = U_j for cylinders, runs and synchronisation;
    // a half-line target is its own j-approximation.
    const double level = family.kind == TargetFamily::Kind::half_line ? static_cast<double>(n)
                                                                       : static_cast<double>(std::min(j, n));
    out.push_back(measure_exact(family.at(level), system).value);
  }
  return out;
}

}  // namespace visitlab
