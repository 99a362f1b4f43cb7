#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rda/energy.hpp"
#include "rda/path.hpp"
#include "rda/solver.hpp"

namespace rda {

/// Runs fn(i) for i in [0, count) on a small worker pool. Results must be
/// written to slot i by the callee; ordering of side effects is unspecified.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned max_workers = 0);

/// Tempered family of initial-data spheres. radius(tau) = r0 for fixed_ball,
/// r0 exp(beta sqrt|tau|) for subexponential_growth; either way
/// e^{-b|tau|} radius(tau) -> 0 for every b > 0.
struct TemperedFamilySpec {
    enum class Kind { fixed_ball, subexponential_growth };
    Kind kind = Kind::fixed_ball;
    double radius_0 = 1.0;
    double growth_beta = 0.0;
    /// Concentrate the initial bumps near the box edge instead of the centre.
    bool edge_concentrated = false;

    double radius(double tau) const;
};

std::string to_string(TemperedFamilySpec::Kind k);
TemperedFamilySpec::Kind family_kind_from_string(const std::string& s);

/// Deterministic smooth direction (u, v) from the seed, scaled so that
/// |u|_{H1}^2 + |v|^2 = radius^2. State time is set to tau.
StateUV initial_on_sphere(const DiscreteProblem& prob, const TemperedFamilySpec& family, double tau,
                          std::uint64_t seed);

/// R(w) = c (1 + r(w)) with r truncated at t_cut.
double estimate_R(const SamplePath& path, const ModelConfig& model, double t_cut, double c = 1.0);
double estimate_R(const ShiftedView& path, const ModelConfig& model, double t_cut, double c = 1.0);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------

struct TemperednessResult {
    std::uint64_t seed = 0;
    std::vector<double> times;   // t >= 0
    std::vector<double> log_R;   // log R(theta_{-t} w)
    std::vector<double> betas;
    std::vector<double> slopes;  // slope of log(e^{-beta t} R(theta_{-t} w))
    bool all_negative = false;
};

struct TemperednessOptions {
    std::vector<double> betas{0.01, 0.1, 1.0};
    double t_max = 100.0;
    double t_step = 1.0;
    double truncation = 160.0;  // R integrates over [-truncation, 0]
    double calibration_c = 1.0;
};

TemperednessResult temperedness_probe(const SamplePath& path, const ModelConfig& model,
                                      const TemperednessOptions& opt);

// ---------------------------------------------------------------------------

struct AbsorptionOptions {
    std::size_t burn_in = 2;   // leading taus excluded from the bound
    double band = 1.0;         // tolerance band around the most-negative-tau value
    double r_truncation = 160.0;
    double calibration_c = 1.0;
};

struct AbsorptionResult {
    std::uint64_t seed = 0;
    std::vector<double> taus;
    std::vector<double> radius;
    std::vector<double> uv_norm_sq;        // |u(0)|_{H1}^2 + |v(0)|^2
    std::vector<double> uz_norm_sq;        // |u(0)|_{H1}^2 + |z(0)|^2
    std::vector<double> integral_bound;    // int_tau^0 e^{sigma xi} (|u|_{H1}^2 + |v|^2)
    double limit_value = 0.0;              // uz at the most negative tau
    double fitted_bound = 0.0;             // max uz beyond burn-in
    double R_estimate = 0.0;
    double bound_over_R = 0.0;
    /// First tau from which every later value stays within (1 + band) * limit.
    double entered_at = 0.0;
    double integral_entered_at = 0.0;
    bool absorbed = false;          // entered no later than the burn-in index
    bool integral_bounded = false;  // integral entered within the first half of tau_list

    std::optional<double> monotone_decay_from;  // tau* beyond which uz is nonincreasing in |tau|
};

AbsorptionResult absorption_experiment(const TemperedFamilySpec& family,
                                       std::span<const double> tau_list, const SamplePath& path,
                                       const DiscreteProblem& prob, const SolveSpec& spec,
                                       const AbsorptionOptions& opt = {});

// ---------------------------------------------------------------------------

struct TailSeries {
    double tau = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> tail;  // [k index][time index], |u|^2+|grad u|^2+|v|^2 beyond k
};

struct TailAttainment {
    std::optional<double> k;
    std::optional<double> fitted_T;
    double infimum = 0.0;  // min over k of max_t tail e^{sigma t} at the most negative tau
};

struct TailResult {
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::vector<double> k_list;
    std::vector<TailSeries> series;
    TailAttainment attained;
    bool nonincreasing_in_k = false;
    bool strictly_decreasing_in_k = false;
};

TailResult tail_experiment(double epsilon, std::span<const double> k_list,
                           std::span<const double> tau_list, const TemperedFamilySpec& family,
                           const SamplePath& path, const DiscreteProblem& prob,
                           const SolveSpec& spec);

/// Smallest k with tail e^{sigma t} <= epsilon at every recorded t for the
/// longest run of most-negative taus (ending at T).
TailAttainment attained_k(const TailResult& r, double epsilon, double sigma);

// ---------------------------------------------------------------------------

struct PullbackResult {
    std::uint64_t seed = 0;
    std::vector<double> taus;
    std::vector<double> distances;  // d(state(0; tau_n), state(0; tau_{n+1})) in H1 x L2
    std::vector<std::size_t> non_monotone_at;
    bool decreasing_trend = false;
};

PullbackResult pullback_convergence_experiment(const TemperedFamilySpec& family,
                                               std::span<const double> tau_list,
                                               const SamplePath& path, const DiscreteProblem& prob,
                                               const SolveSpec& spec);

// ---------------------------------------------------------------------------

struct CocycleSplit {
    double s = 0.0;
    double t = 0.0;
};

struct CocycleResult {
    std::uint64_t seed = 0;
    std::vector<CocycleSplit> splits;
    std::vector<double> defects;  // relative, H1 x L2 on (u, z)
    double max_defect = 0.0;
    bool pass = false;
};

/// Phi(t+s, w, x) vs Phi(t, theta_s w, Phi(s, w, x)). Splits must align with
/// the solver step and path grid.
CocycleResult cocycle_experiment(std::span<const CocycleSplit> splits, const SamplePath& path,
                                 const StateUZ& x0, const DiscreteProblem& prob,
                                 const SolveSpec& spec, double tolerance = 1e-10);

// ---------------------------------------------------------------------------

/// Exact single-mode flow for f = 0, g = 0, h = eta * mode, w(t) = sin t:
/// y' = M y + c sin t solved with exp(M t) and the periodic particular solution.
struct ModeReference {
    double alpha, delta, lambda_prime, mu, eta;
    std::array<double, 2> at(double t, std::array<double, 2> y0) const;
};

struct ModeStudyRow {
    double dt = 0.0;
    double max_error = 0.0;          // max over t = 1..t_final of the L2 x L2 error
    double max_residual_diff = 0.0;  // energy identity, recorded every step
    double max_residual_int = 0.0;
};

struct ModeStudy {
    Scheme scheme = Scheme::semi_implicit;
    int mode = 1;
    double eta = 0.0;
    std::vector<ModeStudyRow> rows;
    std::vector<double> error_orders;
    std::vector<double> residual_orders;
};

ModeStudy mode_convergence_study(const Grid& grid, double alpha, double lambda, int mode, double eta,
                                 Scheme scheme, std::span<const double> dts, double t_final = 10.0);

// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    bool passed = false;
    double margin = 0.0;  // measured value minus threshold, sign so that >= 0 passes
    bool asserted = true; // informational checks do not affect the exit status
};

struct ExperimentReport {
    std::string experiment;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    nlohmann::json per_seed = nlohmann::json::array();
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;

    /// True when every asserted check passed.
    bool all_pass() const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const TemperednessResult& r);
nlohmann::json to_json(const AbsorptionResult& r);
nlohmann::json to_json(const TailResult& r);
nlohmann::json to_json(const PullbackResult& r);
nlohmann::json to_json(const CocycleResult& r);
nlohmann::json to_json(const ModeStudy& r);

}  // namespace rda
