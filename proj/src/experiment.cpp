#include "visitlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "visitlab/error.hpp"
#include "visitlab/visit_stats.hpp"

namespace visitlab {

using nlohmann::json;

namespace {

constexpr std::size_t kReportTerms = 20;  // alpha / lambda entries echoed per table
constexpr double kPredictedTail = 1e-10;

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::vector<double> head(const std::vector<double>& v, std::size_t n = kReportTerms) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size()))};
}

json canonical_config(const json& raw) {
  json c = raw;
  if (c.is_object()) {
    c.erase("workers");
    c.erase("output");
  }
  return c;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json envelope(Verb v, const ExperimentConfig& cfg, json body, const Timer& timer) {
  json r;
  r["schema_version"] = kReportSchemaVersion;
  r["verb"] = to_string(v);
  r["library"] = {{"name", "visitlab"}, {"version", VISITLAB_VERSION}};
  r["config_hash"] = config_hash(cfg.raw);
  r["body"] = std::move(body);
  r["meta"] = {{"workers", cfg.workers},
               {"wall_clock_seconds", timer.seconds()},
               {"timestamp", utc_timestamp()}};
  return r;
}

json base_body(const ExperimentConfig& cfg) {
  return {{"config", canonical_config(cfg.raw)},
          {"system", system_name(cfg.system)},
          {"target_family", cfg.family.name()},
          {"t", cfg.t},
          {"seed", cfg.seed},
          {"samples", cfg.samples},
          {"L", cfg.L},
          {"batches", cfg.batches},
          {"conventions",
           {{"horizon", "N = floor(t / mu(U)); visits counted at times 0..N"},
            {"windows", "a visit at time i uses symbols i..i+w-1, all generated"},
            {"lambda_edge", "hits within K of either trajectory end are excluded from z-counts"},
            {"alpha_edge", "entries with fewer than L (or K) steps of lookahead are excluded"},
            {"bootstrap", "batch-level resampling, 200 resamples, percentile band"}}}};
}

json prediction_json(const PredictionResult& p, const DiscretePMF& pmf) {
  json j = {{"family", p.family_name()},
            {"extremal_index", p.extremal_index},
            {"mean_cluster", p.mean_cluster},
            {"cluster_rate", p.cp_spec.total_rate()},
            {"alpha", head(p.alpha)},
            {"lambda_tilde", head(p.cp_spec.lambda_tilde)},
            {"notes", p.notes},
            {"pmf", pmf.to_json()}};
  if (p.family == PredictionResult::Family::polya_aeppli) j["p"] = p.p;
  return j;
}

DiscretePMF predicted_pmf(const PredictionResult& p, std::size_t at_least) {
  std::size_t k = std::max<std::size_t>(at_least, 32);
  DiscretePMF pmf = cp_pmf(p.cp_spec, k);
  while (pmf.tail_mass > kPredictedTail && k < 20000) {
    k *= 2;
    pmf = cp_pmf(p.cp_spec, k);
  }
  return pmf;
}

std::string method_name(TargetMeasure::Method m) {
  return m == TargetMeasure::Method::exact ? "exact" : "monte_carlo";
}

json measure_json(const TargetMeasure& m) {
  return {{"value", m.value}, {"method", method_name(m.method)}, {"std_error", m.std_error}, {"formula", m.formula}};
}

std::string level_label(const TargetFamily& f) { return f.geometric() ? "delta" : "n"; }

std::string histogram_csv(const WSampleSet& w) {
  std::ostringstream os;
  os << "w,count\n";
  for (const auto& [k, c] : w.counts()) os << k << ',' << c << '\n';
  return os.str();
}

// Everything measured at one sweep level.
struct LevelRun {
  double level = 0.0;
  TargetSpec target;
  TargetMeasure measure;
  std::uint64_t horizon = 0;
  std::size_t K = 0;
  SimulationResult sim;
  DiscretePMF empirical;
};

LevelRun prepare_level(const ExperimentConfig& cfg, double level) {
  LevelRun run;
  run.level = level;
  run.target = cfg.family.at(level);
  check_compatible(cfg.system, run.target);
  MonteCarloOptions mc;
  mc.samples = cfg.measure_samples;
  mc.seed = stream_seed(cfg.seed, 0x6d75ULL);
  run.measure = measure_exact(run.target, cfg.system, mc);
  run.horizon = kac_horizon(cfg.t, run.measure.value);
  run.K = cfg.K.at(level);
  if (!(static_cast<double>(run.K) < cfg.t / run.measure.value))
    fail(ErrorKind::config, "K = " + std::to_string(run.K) + " is not below t / mu(U) at level " +
                                std::to_string(level));
  const double steps = static_cast<double>(run.horizon + window_length(run.target)) * static_cast<double>(cfg.samples);
  if (steps > kMaxTotalSteps) {
    std::ostringstream os;
    os << "resource guard: horizon * samples = " << steps << " exceeds " << kMaxTotalSteps << " steps";
    fail(ErrorKind::resource, os.str());
  }
  return run;
}

void simulate_level(const ExperimentConfig& cfg, LevelRun& run, std::size_t level_index) {
  SimulationOptions opt;
  opt.horizon = run.horizon;
  opt.trajectories = cfg.samples;
  opt.seed = stream_seed(cfg.seed, level_index);
  opt.K = run.K;
  opt.L = cfg.L;
  opt.batches = cfg.batches;
  opt.workers = cfg.workers;
  run.sim = simulate_visits(cfg.system, run.target, opt);
  run.empirical = empirical_pmf(run.sim.w_total());
}

json estimates_json(const ExperimentConfig& cfg, const LevelRun& run) {
  json j;
  const auto& batches = run.sim.clusters;
  try {
    const AlphaEstimates a = estimate_alpha(batches, cfg.min_entries);
    j["alpha"] = {{"L", cfg.L},
                  {"entries", a.entries_L},
                  {"values", head(a.alpha)},
                  {"se", head(a.alpha_se)},
                  {"extremal_index", a.extremal_index},
                  {"extremal_index_se", a.extremal_index_se},
                  {"mean_cluster", a.mean_cluster},
                  {"mean_cluster_se", a.mean_cluster_se}};
    j["alpha_hat"] = {{"K", run.K}, {"entries", a.entries_K}, {"values", head(a.alpha_hat)}, {"se", head(a.alpha_hat_se)}};
  } catch (const InsufficientDataError& e) {
    j["alpha"] = {{"error", e.what()}, {"entries", e.count()}};
  }
  try {
    const LambdaTildeEstimates l = estimate_lambda_tilde(batches);
    j["lambda_tilde"] = {{"K", run.K},
                         {"hits", l.hits},
                         {"values", head(l.lambda_tilde)},
                         {"se", head(l.se)},
                         {"mean_cluster", l.mean_cluster},
                         {"mean_cluster_se", l.mean_cluster_se}};
  } catch (const InsufficientDataError& e) {
    j["lambda_tilde"] = {{"error", e.what()}, {"hits", e.count()}};
  }
  return j;
}

json empirical_json(const ExperimentConfig& cfg, const LevelRun& run) {
  const WSampleSet w = run.sim.w_total();
  json j = {{"samples", w.total()}, {"w_mean", w.mean()}, {"pmf", run.empirical.to_json()}};
  j["estimates"] = estimates_json(cfg, run);
  return j;
}

struct TvBand {
  double value = 0.0, lo = 0.0, hi = 0.0;
};

TvBand tv_with_band(const LevelRun& run, const DiscretePMF& predicted, std::uint64_t seed) {
  TvBand b;
  b.value = tv_distance(run.empirical, predicted);
  const auto weights = bootstrap_weights(run.sim.w.size(), kBootstrapResamples, seed);
  std::vector<double> tvs;
  tvs.reserve(weights.size());
  for (const auto& wr : weights) {
    WSampleSet merged;
    for (std::size_t i = 0; i < wr.size(); ++i)
      if (wr[i] > 0) merged.merge(run.sim.w[i], wr[i]);
    if (merged.total() == 0) continue;
    tvs.push_back(tv_distance(empirical_pmf(merged), predicted));
  }
  if (tvs.empty()) {
    b.lo = b.hi = b.value;
    return b;
  }
  std::sort(tvs.begin(), tvs.end());
  auto pct = [&](double q) {
    const double pos = q * static_cast<double>(tvs.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < tvs.size() ? tvs[i] * (1 - frac) + tvs[i + 1] * frac : tvs[i];
  };
  b.lo = pct(0.025);
  b.hi = pct(0.975);
  return b;
}

std::optional<json> stein_json(const ExperimentConfig& cfg, const LevelRun& run) {
  if (!cfg.mixing || cfg.family.geometric()) return std::nullopt;
  try {
    SteinBracketInputs in;
    in.mixing = *cfg.mixing;
    in.mu = run.measure.value;
    in.n = static_cast<std::size_t>(run.level);
    in.outer = outer_measures(cfg.family, cfg.system, in.n, 1, in.n);
    in.K = run.K;
    in.t = cfg.t;
    const SteinBracket s = stein_bracket(in, cfg.mixing_mode);
    return json{{"value", s.value}, {"argmin_delta", s.argmin_delta}};
  } catch (const Error& e) {
    return json{{"error", e.what()}};
  }
}

bool is_periodic_word(const TargetFamily& f) { return f.kind == TargetFamily::Kind::cylinder && f.periodic; }

RunOutcome run_pipeline(const ExperimentConfig& cfg, Verb verb) {
  Timer timer;
  const bool with_prediction = verb != Verb::simulate;
  std::optional<PredictionResult> pred;
  json extras;
  if (with_prediction) pred = predict_for(cfg, &extras);

  RunOutcome out;
  json body = base_body(cfg);
  if (pred) {
    const DiscretePMF pmf = predicted_pmf(*pred, 0);
    body["prediction"] = prediction_json(*pred, pmf);
    if (!extras.is_null()) body["prediction"]["extras"] = extras;
  }
  body["tolerance"] = cfg.tolerance;
  json levels = json::array();
  std::ostringstream summary;
  summary << level_label(cfg.family)
          << ",mu,horizon,K,w_mean,tv,tv_lo,tv_hi,extremal_index_hat,alpha_hat_2,mean_cluster_hat,pass\n";
  bool all_pass = true;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    LevelRun run = prepare_level(cfg, cfg.levels[i]);
    simulate_level(cfg, run, i);
    json lv = {{"level", run.level},
               {"target", describe(run.target)},
               {"measure", measure_json(run.measure)},
               {"horizon", run.horizon},
               {"K", run.K}};
    lv["empirical"] = empirical_json(cfg, run);
    const std::string tag = std::to_string(i);
    out.csv["empirical_pmf_" + tag + ".csv"] = run.empirical.to_csv();
    out.csv["w_histogram_" + tag + ".csv"] = histogram_csv(run.sim.w_total());
    if (pred) {
      const DiscretePMF pmf = predicted_pmf(*pred, run.empirical.kmax());
      const TvBand tv = tv_with_band(run, pmf, stream_seed(kBootstrapSeed, i));
      const bool pass = tv.value <= cfg.tolerance;
      all_pass = all_pass && pass;
      lv["tv"] = {{"value", tv.value}, {"band_lo", tv.lo}, {"band_hi", tv.hi}};
      lv["pass"] = pass;
      if (auto s = stein_json(cfg, run)) lv["stein_bracket"] = *s;
      out.csv["predicted_pmf_" + tag + ".csv"] = pmf.to_csv();

      const json& est = lv["empirical"]["estimates"];
      auto num = [](const json& j, const char* key) -> std::string {
        if (!j.contains(key)) return "";
        std::ostringstream os;
        os.precision(10);
        os << j.at(key).get<double>();
        return os.str();
      };
      std::string a2;
      if (est["alpha_hat"].contains("values") && est["alpha_hat"]["values"].size() >= 2) {
        std::ostringstream os;
        os.precision(10);
        os << est["alpha_hat"]["values"][1].get<double>();
        a2 = os.str();
      }
      summary.precision(10);
      summary << run.level << ',' << run.measure.value << ',' << run.horizon << ',' << run.K << ','
              << lv["empirical"]["w_mean"].get<double>() << ',' << tv.value << ',' << tv.lo << ',' << tv.hi << ','
              << num(est["alpha"], "extremal_index") << ',' << a2 << ','
              << num(est["lambda_tilde"], "mean_cluster") << ',' << (pass ? "true" : "false") << '\n';
    }
    levels.push_back(std::move(lv));
  }
  body["levels"] = std::move(levels);
  if (pred) {
    body["pass"] = all_pass;
    out.pass = all_pass;
    out.exit_code = all_pass ? 0 : 2;
    out.csv["predicted_pmf.csv"] = predicted_pmf(*pred, 0).to_csv();
  }
  if (verb == Verb::sweep) out.csv["sweep.csv"] = summary.str();
  out.report = envelope(verb, cfg, std::move(body), timer);
  return out;
}

}  // namespace

std::string to_string(Verb v) {
  switch (v) {
    case Verb::predict: return "predict";
    case Verb::simulate: return "simulate";
    case Verb::compare: return "compare";
    case Verb::bound: return "bound";
    case Verb::sweep: return "sweep";
  }
  return "?";
}

Verb parse_verb(const std::string& s) {
  for (Verb v : {Verb::predict, Verb::simulate, Verb::compare, Verb::bound, Verb::sweep})
    if (to_string(v) == s) return v;
  fail(ErrorKind::config, "unknown verb '" + s + "'");
}

std::string supported_pairs() {
  return "markov/cylinder, house_of_cards/run_length, regenerative(shared lengths)/half_line, "
         "product_markov/sync_cylinder, interval_map/cylinder, interval_map/sync_cylinder, "
         "interval_map/geo_diagonal, doeblin/geo_diagonal, furstenberg/cylinder";
}

PredictionResult predict_for(const ExperimentConfig& cfg, json* extras) {
  using Kind = TargetFamily::Kind;
  const TargetFamily& f = cfg.family;
  const double t = cfg.t;
  auto unsupported = [&]() -> PredictionResult {
    fail(ErrorKind::unsupported, "no prediction rule for " + system_name(cfg.system) + "/" + f.name() +
                                     "; supported pairs: " + supported_pairs());
  };
  return std::visit(
      overloaded{
          [&](const FiniteMarkovSpec& m) -> PredictionResult {
            if (f.kind != Kind::cylinder) return unsupported();
            return f.periodic ? predict_periodic_cylinder(m, f.word, t) : predict_aperiodic(t);
          },
          [&](const HouseOfCardsSpec& h) -> PredictionResult {
            if (f.kind != Kind::run_length || f.l != 1) return unsupported();
            const auto lim = h.limit();
            if (!lim)
              fail(ErrorKind::unsupported,
                   "house_of_cards: r_i has no limit, so W_n has no limiting law (see the renewal ratio)");
            PredictionResult r = predict_hoc(*lim, t, geometric_terms(*lim));
            if (h.form != HouseOfCardsSpec::Form::constant) r.notes.push_back("limit law for r_i -> r_inf");
            return r;
          },
          [&](const RegenerativeSpec& g) -> PredictionResult {
            if (f.kind != Kind::half_line || g.lengths != RegenerativeSpec::Lengths::shared) return unsupported();
            return predict_regenerative(g.q, t);
          },
          [&](const ProductChainSpec& p) -> PredictionResult {
            if (f.kind != Kind::sync_cylinder || f.m != p.copies()) return unsupported();
            if (p.coupling.kind == CouplingKind::parametrized) {
              ParamCouplingPrediction pc = predict_param_coupling(p.components[0], p.components[1], p.coupling.gamma, t);
              if (extras && pc.closed_form)
                *extras = {{"closed_form_p", *pc.closed_form}, {"closed_form_agrees", pc.closed_form_agrees}};
              return pc.result;
            }
            return predict_sync_markov(build_qdelta(p.components, p.coupling), t);
          },
          [&](const IntervalMapSpec& m) -> PredictionResult {
            if (f.kind == Kind::geo_diagonal && f.m == 2 && m.copies == 2) return predict_geometric_interval(m, t);
            const FiniteMarkovSpec chain = m.itinerary_chain();
            if (f.kind == Kind::sync_cylinder && f.m == m.copies)
              return predict_sync_markov(build_qdelta(std::vector<Matrix>(m.copies, chain.Q), Coupling{}), t);
            if (f.kind == Kind::cylinder && m.copies == 1)
              return f.periodic ? predict_periodic_cylinder(chain, f.word, t) : predict_aperiodic(t);
            return unsupported();
          },
          [&](const DoeblinChainSpec& d) -> PredictionResult {
            if (f.kind != Kind::geo_diagonal || f.m != d.copies) return unsupported();
            PredictionResult r = predict_aperiodic(t);
            r.notes.push_back("density bounded in [" + std::to_string(d.lower()) + ", " + std::to_string(d.upper()) +
                              "]; clusters vanish as delta -> 0");
            return r;
          },
          [&](const FactorProductSpec& e) -> PredictionResult {
            if (!is_periodic_word(f)) return unsupported();
            FurstenbergPrediction fp = predict_furstenberg(e.epsilon, f.word, t);
            if (extras)
              *extras = {{"case_value", fp.case_value}, {"exact_value", fp.exact_value}, {"lift_plus", fp.lift_plus}};
            return fp.result;
          },
      },
      cfg.system);
}

RunOutcome cmd_predict(const ExperimentConfig& cfg) {
  Timer timer;
  json extras;
  const PredictionResult pred = predict_for(cfg, &extras);
  const DiscretePMF pmf = predicted_pmf(pred, 0);
  RunOutcome out;
  json body = base_body(cfg);
  body["prediction"] = prediction_json(pred, pmf);
  if (!extras.is_null()) body["prediction"]["extras"] = extras;
  out.csv["predicted_pmf.csv"] = pmf.to_csv();
  out.report = envelope(Verb::predict, cfg, std::move(body), timer);
  return out;
}

RunOutcome cmd_simulate(const ExperimentConfig& cfg) { return run_pipeline(cfg, Verb::simulate); }
RunOutcome cmd_compare(const ExperimentConfig& cfg) { return run_pipeline(cfg, Verb::compare); }
RunOutcome cmd_sweep(const ExperimentConfig& cfg) { return run_pipeline(cfg, Verb::sweep); }

RunOutcome cmd_bound(const ExperimentConfig& cfg) {
  Timer timer;
  if (!cfg.mixing) fail(ErrorKind::config, "bound: the config declares no mixing sequence");
  if (cfg.family.geometric()) fail(ErrorKind::unsupported, "bound: needs a symbolic (cylinder-type) target family");
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(12);
  csv << "n,K,mu,argmin_delta,bracket\n";
  std::vector<double> values;
  for (double level : cfg.levels) {
    const TargetSpec target = cfg.family.at(level);
    check_compatible(cfg.system, target);
    MonteCarloOptions mc;
    mc.samples = cfg.measure_samples;
    mc.seed = stream_seed(cfg.seed, 0x6d75ULL);
    const TargetMeasure mu = measure_exact(target, cfg.system, mc);
    SteinBracketInputs in;
    in.mixing = *cfg.mixing;
    in.mu = mu.value;
    in.n = static_cast<std::size_t>(level);
    in.outer = outer_measures(cfg.family, cfg.system, in.n, 1, in.n);
    in.K = cfg.K.at(level);
    in.t = cfg.t;
    const SteinBracket s = stein_bracket(in, cfg.mixing_mode);
    values.push_back(s.value);
    rows.push_back({{"n", in.n}, {"K", in.K}, {"mu", mu.value}, {"argmin_delta", s.argmin_delta}, {"bracket", s.value}});
    csv << in.n << ',' << in.K << ',' << mu.value << ',' << s.argmin_delta << ',' << s.value << '\n';
  }
  bool strict = true, nonincreasing = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    strict = strict && values[i] < values[i - 1];
    nonincreasing = nonincreasing && values[i] <= values[i - 1];
  }
  json body = base_body(cfg);
  body["mode"] = cfg.mixing_mode == SteinMode::phi ? "phi" : "psi";
  body["rows"] = std::move(rows);
  body["monotonicity"] = {{"strictly_decreasing", strict}, {"nonincreasing", nonincreasing}};
  RunOutcome out;
  out.csv["bound.csv"] = csv.str();
  out.report = envelope(Verb::bound, cfg, std::move(body), timer);
  return out;
}

RunOutcome run_verb(Verb v, const ExperimentConfig& cfg) {
  switch (v) {
    case Verb::predict: return cmd_predict(cfg);
    case Verb::simulate: return cmd_simulate(cfg);
    case Verb::compare: return cmd_compare(cfg);
    case Verb::bound: return cmd_bound(cfg);
    case Verb::sweep: return cmd_sweep(cfg);
  }
  fail(ErrorKind::config, "unknown verb");
}

void write_outputs(const RunOutcome& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::config, "cannot create output directory '" + dir + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) fail(ErrorKind::config, "cannot write '" + name + "' in '" + dir + "'");
    f << text;
  };
  put("report.json", out.report.dump(2) + "\n");
  for (const auto& [name, text] : out.csv) put(name, text);
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind() == ErrorKind::resource ? 4 : 3;
  return 1;
}

}  // namespace visitlab
