#include "visitlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "visitlab/error.hpp"

namespace visitlab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::config, what); }

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing key '" + key + "'");
  return j.at(key);
}

std::uint64_t json_count(const json& j, const std::string& what) {
  const double v = json_number(j, what);
  if (!(v >= 0) || v != std::floor(v) || v > 1.8e19) bad(what + " must be a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

Matrix json_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what + " must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) bad(what + " rows must be arrays");
    std::vector<double> row;
    for (const auto& v : r) row.push_back(json_number(v, what));
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

std::vector<std::int64_t> json_word(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what + " must be a nonempty array of integers");
  std::vector<std::int64_t> w;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad(what + " must hold integers");
    w.push_back(v.get<std::int64_t>());
  }
  return w;
}

}  // namespace

double json_number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(parse_rational(j.get<std::string>()));
  bad(what + ": expected a number or a rational string");
}

Rational json_rational(const json& j, const std::string& what, bool& exact) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) {
    // A binary float is not the decimal the user typed; keep it but flag it.
    exact = false;
    return Rational(j.get<double>());
  }
  bad(what + ": expected a number or a rational string");
}

SystemSpec parse_system(const json& j) {
  const std::string type = need(j, "type", "system").get<std::string>();
  if (type == "markov") {
    return make_markov(json_matrix(need(j, "Q", "markov"), "markov.Q"), j.value("require_positive", false));
  }
  if (type == "house_of_cards") {
    const std::string form = j.value("form", "constant");
    if (form == "constant") return HouseOfCardsSpec::constant(json_number(need(j, "r", "house_of_cards"), "r"));
    if (form == "perturbed")
      return HouseOfCardsSpec::perturbed(json_number(need(j, "r_inf", "house_of_cards"), "r_inf"),
                                         json_number(need(j, "c", "house_of_cards"), "c"));
    if (form == "alternating")
      return HouseOfCardsSpec::alternating(json_number(need(j, "eps1", "house_of_cards"), "eps1"),
                                           json_number(need(j, "eps2", "house_of_cards"), "eps2"));
    bad("house_of_cards.form must be constant, perturbed or alternating");
  }
  if (type == "regenerative") {
    RegenerativeSpec spec;
    const json& sym = need(j, "symbols", "regenerative");
    const std::string sform = sym.value("form", "geometric");
    if (sform == "geometric") {
      spec.p = SymbolLaw::geometric(sym.value("first", std::int64_t{1}), json_number(need(sym, "theta", "symbols"), "theta"));
    } else if (sform == "table") {
      std::vector<double> probs;
      for (const auto& v : need(sym, "probs", "symbols")) probs.push_back(json_number(v, "symbols.probs"));
      spec.p = SymbolLaw::table(json_word(need(sym, "values", "symbols"), "symbols.values"), std::move(probs));
    } else {
      bad("regenerative.symbols.form must be geometric or table");
    }
    const json& len = need(j, "lengths", "regenerative");
    const std::string lform = len.value("form", "geometric");
    if (lform == "smith") {
      spec.lengths = RegenerativeSpec::Lengths::smith;
    } else if (lform == "geometric") {
      spec.q = RegenerativeSpec::geometric_lengths(json_number(need(len, "theta", "lengths"), "theta"));
    } else if (lform == "table") {
      for (const auto& v : need(len, "probs", "lengths")) spec.q.push_back(json_number(v, "lengths.probs"));
    } else {
      bad("regenerative.lengths.form must be geometric, table or smith");
    }
    spec.validate();
    return spec;
  }
  if (type == "product_markov") {
    std::vector<Matrix> comps;
    for (const auto& q : need(j, "components", "product_markov")) comps.push_back(json_matrix(q, "components"));
    Coupling c;
    const std::string kind = j.value("coupling", "independent");
    if (kind == "independent") c.kind = CouplingKind::independent;
    else if (kind == "maximal") c.kind = CouplingKind::maximal;
    else if (kind == "parametrized") {
      c.kind = CouplingKind::parametrized;
      c.gamma = json_number(need(j, "gamma", "product_markov"), "gamma");
    } else bad("product_markov.coupling must be independent, maximal or parametrized");
    return make_product_chain(comps, c);
  }
  if (type == "interval_map") {
    bool exact = true;
    auto list = [&](const char* key) {
      std::vector<Rational> out;
      for (const auto& v : need(j, key, "interval_map")) out.push_back(json_rational(v, key, exact));
      return out;
    };
    auto breaks = list("breaks");
    auto slopes = list("slopes");
    auto intercepts = list("intercepts");
    return make_interval_map(std::move(breaks), std::move(slopes), std::move(intercepts),
                             j.value("copies", std::size_t{1}), exact);
  }
  if (type == "doeblin") {
    DoeblinChainSpec d{json_number(need(j, "eta", "doeblin"), "eta"), j.value("copies", std::size_t{2})};
    d.validate();
    return d;
  }
  if (type == "furstenberg") {
    FactorProductSpec f{json_number(need(j, "epsilon", "furstenberg"), "epsilon")};
    f.validate();
    return f;
  }
  bad("unknown system type '" + type + "'");
}

TargetFamily parse_target(const json& j) {
  const std::string fam = need(j, "family", "target").get<std::string>();
  TargetFamily t;
  if (fam == "cylinder") {
    t.kind = TargetFamily::Kind::cylinder;
    t.word = json_word(need(j, "word", "target"), "target.word");
    t.periodic = j.value("periodic", true);
  } else if (fam == "run_length") {
    t.kind = TargetFamily::Kind::run_length;
    t.l = j.value("l", std::int64_t{1});
  } else if (fam == "half_line") {
    t.kind = TargetFamily::Kind::half_line;
  } else if (fam == "sync_cylinder") {
    t.kind = TargetFamily::Kind::sync_cylinder;
    t.m = j.value("m", std::size_t{2});
  } else if (fam == "geo_diagonal") {
    t.kind = TargetFamily::Kind::geo_diagonal;
    t.m = j.value("m", std::size_t{2});
  } else {
    bad("unknown target family '" + fam + "'");
  }
  return t;
}

std::size_t RadiusRule::at(double level) const {
  if (divisor == 0) return fixed;
  return std::max<std::size_t>(1, static_cast<std::size_t>(level) / divisor);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) bad("config must be a JSON object");
  const int version = j.value("schema_version", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion)
    bad("unsupported schema_version " + std::to_string(version) + " (expected " +
        std::to_string(kConfigSchemaVersion) + ")");
  ExperimentConfig c;
  c.raw = j;
  try {
    c.system = parse_system(need(j, "system", "config"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    bad(std::string("system: ") + e.what());
  }
  c.family = parse_target(need(j, "target", "config"));
  const json& levels = need(j, "levels", "config");
  if (!levels.is_array() || levels.empty()) bad("levels must be a nonempty array");
  for (const auto& v : levels) c.levels.push_back(json_number(v, "levels"));
  for (double lv : c.levels) {
    try {
      (void)c.family.at(lv);
    } catch (const Error& e) {
      bad(std::string("levels: ") + e.what());
    }
  }
  if (j.contains("t")) c.t = json_number(j.at("t"), "t");
  if (!(c.t > 0)) bad("t must be positive");
  if (j.contains("K")) {
    const json& k = j.at("K");
    if (k.is_string()) {
      const std::string s = k.get<std::string>();
      if (s.rfind("n/", 0) != 0) bad("K must be an integer or of the form \"n/d\"");
      c.K.divisor = static_cast<std::size_t>(std::stoul(s.substr(2)));
      if (c.K.divisor == 0) bad("K: divisor must be positive");
    } else {
      c.K.fixed = json_count(k, "K");
    }
  }
  if (j.contains("L")) c.L = json_count(j.at("L"), "L");
  if (j.contains("samples")) c.samples = json_count(j.at("samples"), "samples");
  if (c.samples < 1) bad("samples must be >= 1");
  if (j.contains("seed")) c.seed = json_count(j.at("seed"), "seed");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, json_count(j.at("workers"), "workers")));
  if (j.contains("tolerance")) c.tolerance = json_number(j.at("tolerance"), "tolerance");
  if (j.contains("batches")) c.batches = json_count(j.at("batches"), "batches");
  if (j.contains("measure_samples")) c.measure_samples = json_count(j.at("measure_samples"), "measure_samples");
  if (j.contains("min_entries")) c.min_entries = json_count(j.at("min_entries"), "min_entries");
  if (j.contains("output")) c.out_dir = j.at("output").value("dir", c.out_dir);
  if (j.contains("mixing")) {
    const json& m = j.at("mixing");
    MixingRate r;
    const std::string kind = m.value("kind", "exponential");
    if (kind == "exponential") r.kind = MixingRate::Kind::exponential;
    else if (kind == "polynomial") r.kind = MixingRate::Kind::polynomial;
    else bad("mixing.kind must be exponential or polynomial");
    if (m.contains("c")) r.c = json_number(m.at("c"), "mixing.c");
    r.rate = json_number(need(m, "rate", "mixing"), "mixing.rate");
    c.mixing = r;
    const std::string mode = m.value("mode", "phi");
    if (mode == "phi") c.mixing_mode = SteinMode::phi;
    else if (mode == "psi") c.mixing_mode = SteinMode::psi;
    else bad("mixing.mode must be phi or psi");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    bad("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const json& raw) {
  json canon = raw;
  if (canon.is_object()) {
    canon.erase("workers");
    canon.erase("output");
  }
  const std::string text = canon.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace visitlab
