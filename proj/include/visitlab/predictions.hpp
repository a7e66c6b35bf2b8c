#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "visitlab/compound.hpp"
#include "visitlab/linalg.hpp"
#include "visitlab/rational.hpp"
#include "visitlab/systems.hpp"

namespace visitlab {

struct PredictionResult {
  enum class Family { polya_aeppli, poisson, general };

  std::vector<double> alpha;
  CompoundPoissonSpec cp_spec;
  Family family = Family::general;
  double p = 0.0;  // geometric parameter when family == polya_aeppli
  double extremal_index = 0.0;
  double mean_cluster = 0.0;
  std::vector<std::string> notes;

  std::string family_name() const;
};

// Builds the result from alpha, tagging Poisson / Polya-Aeppli when alpha
// has that exact shape.
PredictionResult prediction_from_alpha(std::vector<double> alpha, double t, std::string provenance);

// Number of alpha terms needed before a geometric tail drops below 1e-12.
std::size_t geometric_terms(double p, std::size_t cap = 4000);

PredictionResult predict_hoc(double r_inf, double t, std::size_t L);
PredictionResult predict_regenerative(const std::vector<double>& q, double t);
PredictionResult predict_periodic_cylinder(const FiniteMarkovSpec& chain, const std::vector<std::int64_t>& word,
                                           double t);
PredictionResult predict_aperiodic(double t);
PredictionResult predict_sync_markov(const Matrix& qdelta, double t);

struct ParamCouplingPrediction {
  PredictionResult result;
  std::optional<double> closed_form;  // only for the worked example matrices
  bool closed_form_agrees = true;
};

bool is_param_example(const Matrix& q1, const Matrix& q2);
double param_closed_form(double gamma);
ParamCouplingPrediction predict_param_coupling(const Matrix& q1, const Matrix& q2, double gamma, double t);

struct GeometricAlpha {
  Rational value;       // meaningful when exact
  double approx = 0.0;
  bool exact = true;
};

GeometricAlpha geometric_alpha(const IntervalMapSpec& map, std::size_t k);
// alpha_hat_1 .. alpha_hat_{count}, turned into a compound law.
PredictionResult predict_geometric_interval(const IntervalMapSpec& map, double t, std::size_t count = 200);

struct FurstenbergRatio {
  double nu_z = 0.0;
  double nu_1z = 0.0;
  double ratio = 0.0;
};

FurstenbergRatio furstenberg_ratio(double epsilon, const std::vector<std::int64_t>& z);
// nu(A_{n+m}) / nu(A_n) along the periodic point y^infinity.
double furstenberg_cylinder_ratio(double epsilon, const std::vector<std::int64_t>& y, std::size_t n);

struct FurstenbergPrediction {
  PredictionResult result;
  double case_value = 0.0;   // from the case formula
  double exact_value = 0.0;  // from the exact ratio at n = check_n
  std::size_t check_n = 80;
  std::size_t lift_plus = 0; // +1 count over one period of the lift
};

FurstenbergPrediction predict_furstenberg(double epsilon, const std::vector<std::int64_t>& y, double t);

struct RenyiPressure {
  double pressure = 0.0;
  double renyi = 0.0;
};

RenyiPressure renyi_pressure_markov(const Matrix& q, double order);

struct MixingRate {
  enum class Kind { exponential, polynomial };

  Kind kind = Kind::exponential;
  double c = 1.0;
  double rate = 0.5;  // theta for c*theta^k, gamma for c*k^-gamma

  double operator()(double k) const;
  double tail(std::size_t from) const;  // sum_{j >= from}
};

struct SteinBracketInputs {
  MixingRate mixing;
  double mu = 0.0;
  std::vector<double> outer;  // outer[j - 1] = mu(U^j), j = 1..n
  std::size_t n = 1;
  std::size_t K = 1;
  double t = 1.0;
};

enum class SteinMode { phi, psi };

struct SteinBracket {
  double value = 0.0;
  std::uint64_t argmin_delta = 0;
};

SteinBracket stein_bracket(const SteinBracketInputs& in, SteinMode mode, std::size_t grid = 400);

double doeblin_alpha2_bound(double K, double upper, double delta);

std::vector<double> renewal_ratio_sequence(const HouseOfCardsSpec& spec, std::size_t n_from, std::size_t n_to);

}  // namespace visitlab
