#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "visitlab/compound.hpp"
#include "visitlab/config.hpp"
#include "visitlab/error.hpp"
#include "visitlab/experiment.hpp"
#include "visitlab/predictions.hpp"

namespace py = pybind11;
using namespace visitlab;

namespace {

using Rows = std::vector<std::vector<double>>;

py::dict prediction_dict(const PredictionResult& r) {
  py::dict d;
  d["family"] = r.family_name();
  d["alpha"] = r.alpha;
  d["lambda_tilde"] = r.cp_spec.lambda_tilde;
  d["t"] = r.cp_spec.t;
  d["extremal_index"] = r.extremal_index;
  d["mean_cluster"] = r.mean_cluster;
  d["cluster_rate"] = r.cp_spec.total_rate();
  if (r.family == PredictionResult::Family::polya_aeppli) d["p"] = r.p;
  return d;
}

Coupling coupling_of(const std::string& kind, double gamma) {
  if (kind == "independent") return {CouplingKind::independent, 0.0};
  if (kind == "maximal") return {CouplingKind::maximal, 0.0};
  if (kind == "parametrized") return {CouplingKind::parametrized, gamma};
  throw Error(ErrorKind::invalid_input, "unknown coupling '" + kind + "'");
}

std::vector<Matrix> matrices(const std::vector<Rows>& comps) {
  std::vector<Matrix> out;
  for (const auto& c : comps) out.push_back(Matrix::from_rows(c));
  return out;
}

// Python passes configs as JSON text; the json module does the conversion
// on that side.
RunOutcome run_json(const std::string& verb, const std::string& config_json) {
  return run_verb(parse_verb(verb), parse_config(nlohmann::json::parse(config_json)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compound Poisson visit statistics";
  m.attr("__version__") = VISITLAB_VERSION;

  py::register_exception<Error>(m, "VisitlabError", PyExc_RuntimeError);

  m.def("pa_pmf", [](double t, double p, std::size_t kmax) { return pa_pmf(t, p, kmax).probs; },
        py::arg("t"), py::arg("p"), py::arg("kmax"));
  m.def("cp_pmf",
        [](double t, std::vector<double> lambda_tilde, std::size_t kmax) {
          return cp_pmf({t, std::move(lambda_tilde)}, kmax).probs;
        },
        py::arg("t"), py::arg("lambda_tilde"), py::arg("kmax"));
  m.def("cp_sample",
        [](double t, std::vector<double> lambda_tilde, std::size_t count, std::uint64_t seed) {
          CompoundPoissonSampler sampler({t, std::move(lambda_tilde)});
          Rng rng(seed);
          std::vector<std::uint64_t> out(count);
          for (auto& v : out) v = sampler(rng);
          return out;
        },
        py::arg("t"), py::arg("lambda_tilde"), py::arg("count"), py::arg("seed"));
  m.def("tv_distance",
        [](std::vector<double> p, std::vector<double> q) { return tv_distance({std::move(p), 0.0}, {std::move(q), 0.0}); },
        py::arg("p"), py::arg("q"));

  m.def("spectral_radius", [](const Rows& a) { return spectral_radius(Matrix::from_rows(a)); });
  m.def("build_qdelta",
        [](const std::vector<Rows>& comps, const std::string& coupling, double gamma) {
          return build_qdelta(matrices(comps), coupling_of(coupling, gamma)).to_rows();
        },
        py::arg("components"), py::arg("coupling") = "independent", py::arg("gamma") = 0.0);

  m.def("predict_hoc", [](double r, double t, std::size_t L) { return prediction_dict(predict_hoc(r, t, L)); },
        py::arg("r"), py::arg("t"), py::arg("L") = 200);
  m.def("predict_sync_markov",
        [](const Rows& qdelta, double t) { return prediction_dict(predict_sync_markov(Matrix::from_rows(qdelta), t)); },
        py::arg("qdelta"), py::arg("t") = 1.0);
  m.def("predict_param_coupling",
        [](const Rows& q1, const Rows& q2, double gamma, double t) {
          const auto r = predict_param_coupling(Matrix::from_rows(q1), Matrix::from_rows(q2), gamma, t);
          py::dict d = prediction_dict(r.result);
          d["closed_form"] = r.closed_form ? py::cast(*r.closed_form) : py::none();
          d["closed_form_agrees"] = r.closed_form_agrees;
          return d;
        },
        py::arg("q1"), py::arg("q2"), py::arg("gamma"), py::arg("t") = 1.0);
  m.def("geometric_alpha",
        [](const std::vector<std::string>& breaks, const std::vector<std::string>& slopes,
           const std::vector<std::string>& intercepts, std::size_t k) {
          auto rat = [](const std::vector<std::string>& v) {
            std::vector<Rational> out;
            for (const auto& s : v) out.push_back(parse_rational(s));
            return out;
          };
          const GeometricAlpha a = geometric_alpha(make_interval_map(rat(breaks), rat(slopes), rat(intercepts)), k);
          return py::make_tuple(to_string(a.value), a.approx);
        },
        py::arg("breaks"), py::arg("slopes"), py::arg("intercepts"), py::arg("k"),
        "Exact value as a 'p/q' string plus its float approximation.");
  m.def("predict_furstenberg",
        [](double eps, const std::vector<std::int64_t>& y, double t) {
          const auto r = predict_furstenberg(eps, y, t);
          py::dict d = prediction_dict(r.result);
          d["exact_value"] = r.exact_value;
          return d;
        },
        py::arg("epsilon"), py::arg("word"), py::arg("t") = 1.0);
  m.def("renewal_ratio_sequence",
        [](const std::string& form, double a, double b, std::size_t n_from, std::size_t n_to) {
          HouseOfCardsSpec spec = form == "constant"    ? HouseOfCardsSpec::constant(a)
                                  : form == "perturbed" ? HouseOfCardsSpec::perturbed(a, b)
                                                        : HouseOfCardsSpec::alternating(a, b);
          return renewal_ratio_sequence(spec, n_from, n_to);
        },
        py::arg("form"), py::arg("a"), py::arg("b") = 0.0, py::arg("n_from"), py::arg("n_to"));

  m.def("config_hash", [](const std::string& config_json) { return config_hash(nlohmann::json::parse(config_json)); });
  m.def("run",
        [](const std::string& verb, const std::string& config_json) {
          RunOutcome out;
          {
            py::gil_scoped_release release;
            out = run_json(verb, config_json);
          }
          return py::make_tuple(out.report.dump(), out.csv, out.exit_code);
        },
        py::arg("verb"), py::arg("config_json"));
}
