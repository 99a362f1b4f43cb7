#include "rda/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rda/io.hpp"
#include "rda/rng.hpp"

namespace rda {

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned max_workers) {
    if (count == 0) return;
    unsigned workers = max_workers ? max_workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = count;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                // Report the lowest failing index so errors do not depend on scheduling.
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double TemperedFamilySpec::radius(double tau) const {
    if (kind == Kind::fixed_ball) return radius_0;
    return radius_0 * std::exp(growth_beta * std::sqrt(std::abs(tau)));
}

std::string to_string(TemperedFamilySpec::Kind k) {
    return k == TemperedFamilySpec::Kind::fixed_ball ? "fixed_ball" : "subexponential_growth";
}

TemperedFamilySpec::Kind family_kind_from_string(const std::string& s) {
    if (s == "fixed_ball") return TemperedFamilySpec::Kind::fixed_ball;
    if (s == "subexponential_growth") return TemperedFamilySpec::Kind::subexponential_growth;
    throw std::invalid_argument("unknown family kind '" + s + "'");
}

namespace {

constexpr int kBumps = 6;
constexpr std::uint64_t kDirectionStream = 0x1d17;

Field bump_field(const Grid& grid, const CounterRng& rng, std::uint64_t base, bool edge) {
    const double L = grid.half_width;
    Field f(grid);
    for (int j = 0; j < kBumps; ++j) {
        const std::uint64_t c = base + 8 * static_cast<std::uint64_t>(j);
        const double amp = rng.normal(c);
        const double width = 1.0 + 1.5 * rng.uniform(c + 1);
        std::array<double, 3> centre{};
        for (int a = 0; a < grid.dim; ++a) {
            const double r = rng.uniform(c + 2 + static_cast<std::uint64_t>(a));
            if (edge) {
                const double sign = rng.uniform(c + 5 + static_cast<std::uint64_t>(a)) < 0.5 ? -1.0 : 1.0;
                centre[static_cast<std::size_t>(a)] = sign * L * (0.6 + 0.25 * r);
            } else {
                centre[static_cast<std::size_t>(a)] = L * 0.25 * (2.0 * r - 1.0);
            }
        }
        const double inv = 1.0 / (2.0 * width * width);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto idx = grid.multi_index(i);
            double r2 = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                const double d = grid.coord(idx[static_cast<std::size_t>(a)]) - centre[static_cast<std::size_t>(a)];
                r2 += d * d;
            }
            f[i] += amp * std::exp(-r2 * inv);
        }
    }
    return f;
}

double tail_sum(const Field& u, const Field& v, const TailWeights& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += w.node[i] * (u[i] * u[i] + v[i] * v[i]);
    return acc * u.grid().cell_volume() + weighted_grad_norm_sq(u, w);
}

double h1_sq(const Field& u) { return inner(u, u) + grad_norm_sq(u); }

void require_decreasing(std::span<const double> taus, const char* what) {
    if (taus.empty()) throw std::invalid_argument(std::string(what) + ": tau_list is empty");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (taus[i] > 0.0) throw std::invalid_argument(std::string(what) + ": tau must be <= 0");
        if (i > 0 && !(taus[i] < taus[i - 1])) {
            throw std::invalid_argument(std::string(what) + ": tau_list must be strictly decreasing");
        }
    }
}

void require_covers(const SamplePath& path, double a, double b, const char* what) {
    if (!path.covers(a) || !path.covers(b)) {
        throw std::out_of_range(std::string(what) + ": path does not cover [" + io::format_double(a) +
                                ", " + io::format_double(b) + "]");
    }
}

}  // namespace

StateUV initial_on_sphere(const DiscreteProblem& prob, const TemperedFamilySpec& family, double tau,
                          std::uint64_t seed) {
    if (!(family.radius_0 >= 0.0) || !(family.growth_beta >= 0.0)) {
        throw std::invalid_argument("family: radius_0 and growth_beta must be nonnegative");
    }
    const CounterRng rng(seed, kDirectionStream);
    Field u = bump_field(prob.grid, rng, 0, family.edge_concentrated);
    Field v = bump_field(prob.grid, rng, 1024, family.edge_concentrated);
    const double norm = product_norm(u, v);
    const double scale = norm > 0.0 ? family.radius(tau) / norm : 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] *= scale;
        v[i] *= scale;
    }
    return StateUV{std::move(u), std::move(v), tau};
}

double estimate_R(const SamplePath& path, const ModelConfig& model, double t_cut, double c) {
    return c * (1.0 + tempered_integral(path, model.derived.sigma, model.nl.gamma(), t_cut).value);
}

double estimate_R(const ShiftedView& path, const ModelConfig& model, double t_cut, double c) {
    return c * (1.0 + tempered_integral(path, model.derived.sigma, model.nl.gamma(), t_cut).value);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: x values are all equal");
    return sxy / sxx;
}

TemperednessResult temperedness_probe(const SamplePath& path, const ModelConfig& model,
                                      const TemperednessOptions& opt) {
    if (!(opt.t_step > 0.0) || !(opt.t_max > 0.0) || !(opt.truncation > 0.0)) {
        throw std::invalid_argument("temperedness probe: t_step, t_max and truncation must be positive");
    }
    TemperednessResult r;
    r.seed = path.seed();
    r.betas = opt.betas;
    const auto count = static_cast<std::size_t>(std::floor(opt.t_max / opt.t_step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) * opt.t_step;
        const ShiftedView view = shift(path, -t);
        r.times.push_back(t);
        r.log_R.push_back(std::log(estimate_R(view, model, -opt.truncation, opt.calibration_c)));
    }
    r.all_negative = true;
    for (double beta : opt.betas) {
        std::vector<double> y(count);
        for (std::size_t i = 0; i < count; ++i) y[i] = r.log_R[i] - beta * r.times[i];
        const double slope = fit_slope(r.times, y);
        r.slopes.push_back(slope);
        r.all_negative = r.all_negative && slope < 0.0;
    }
    return r;
}

AbsorptionResult absorption_experiment(const TemperedFamilySpec& family,
                                       std::span<const double> tau_list, const SamplePath& path,
                                       const DiscreteProblem& prob, const SolveSpec& spec,
                                       const AbsorptionOptions& opt) {
    require_decreasing(tau_list, "absorption");
    require_covers(path, tau_list.back(), 0.0, "absorption");
    const NoiseSignal noise(path);
    const double sigma = prob.model.derived.sigma;

    AbsorptionResult r;
    r.seed = path.seed();
    r.taus.assign(tau_list.begin(), tau_list.end());
    const std::size_t m = tau_list.size();
    r.radius.resize(m);
    r.uv_norm_sq.resize(m);
    r.uz_norm_sq.resize(m);
    r.integral_bound.resize(m);

    parallel_for(m, [&](std::size_t i) {
        const double tau = tau_list[i];
        const StateUV init = initial_on_sphere(prob, family, tau, path.seed());
        double integral = 0.0;
        double prev_t = 0.0, prev_val = 0.0;
        bool first = true;
        const Observer obs = [&](const StateUV& s) {
            const double val = std::exp(sigma * s.t) * (h1_sq(s.u) + inner(s.v, s.v));
            if (!first) integral += 0.5 * (s.t - prev_t) * (val + prev_val);
            first = false;
            prev_t = s.t;
            prev_val = val;
        };
        std::optional<StateUV> result;
        try {
            result = evolve(init, tau, 0.0, noise, prob, spec, std::span(&obs, 1));
        } catch (const DivergenceError& e) {
            throw DivergenceError(e, "absorption from tau=" + io::format_double(tau));
        }
        const StateUV& fin = *result;
        const Field z = reconstruct_z(fin, noise, prob);
        r.radius[i] = family.radius(tau);
        r.uv_norm_sq[i] = h1_sq(fin.u) + inner(fin.v, fin.v);
        r.uz_norm_sq[i] = h1_sq(fin.u) + inner(z, z);
        r.integral_bound[i] = integral;
    });

    r.limit_value = r.uz_norm_sq.back();
    const std::size_t start = std::min(opt.burn_in, m - 1);
    r.fitted_bound = *std::max_element(r.uz_norm_sq.begin() + static_cast<std::ptrdiff_t>(start),
                                       r.uz_norm_sq.end());
    const double band = 1.0 + opt.band;
    auto entry = [band](const std::vector<double>& xs) {
        std::size_t i = xs.size() - 1;
        while (i > 0 && xs[i - 1] <= band * xs.back()) --i;
        return i;
    };
    const std::size_t uz_entry = entry(r.uz_norm_sq);
    const std::size_t int_entry = entry(r.integral_bound);
    r.entered_at = r.taus[uz_entry];
    r.integral_entered_at = r.taus[int_entry];
    r.absorbed = uz_entry <= start;
    r.integral_bounded = int_entry <= m / 2;

    const double t_cut = -opt.r_truncation;
    if (path.covers(t_cut)) {
        r.R_estimate = estimate_R(path, prob.model, t_cut, opt.calibration_c);
        r.bound_over_R = r.fitted_bound / r.R_estimate;
    }

    std::size_t from = m - 1;
    while (from > 0 && r.uz_norm_sq[from] <= r.uz_norm_sq[from - 1] * (1.0 + 1e-12)) --from;
    if (from + 1 < m) r.monotone_decay_from = r.taus[from];
    return r;
}

TailResult tail_experiment(double epsilon, std::span<const double> k_list,
                           std::span<const double> tau_list, const TemperedFamilySpec& family,
                           const SamplePath& path, const DiscreteProblem& prob,
                           const SolveSpec& spec) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("tails: epsilon must be positive");
    if (k_list.empty()) throw std::invalid_argument("tails: k_list is empty");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        if (!(k_list[i] > 0.0) || (i > 0 && !(k_list[i] > k_list[i - 1]))) {
            throw std::invalid_argument("tails: k_list must be positive and increasing");
        }
    }
    if (!(k_list.back() * std::numbers::sqrt2 < prob.grid.half_width)) {
        throw std::invalid_argument("tails: sqrt(2) * max(k) must be below L (cutoff would be truncated)");
    }
    require_decreasing(tau_list, "tails");
    require_covers(path, tau_list.back(), 0.0, "tails");
    const NoiseSignal noise(path);

    std::vector<TailWeights> weights;
    for (double k : k_list) weights.push_back(tail_weights(prob.grid, k));

    TailResult r;
    r.seed = path.seed();
    r.epsilon = epsilon;
    r.k_list.assign(k_list.begin(), k_list.end());
    r.series.resize(tau_list.size());

    parallel_for(tau_list.size(), [&](std::size_t i) {
        TailSeries& ser = r.series[i];
        ser.tau = tau_list[i];
        ser.tail.resize(k_list.size());
        const Observer obs = [&](const StateUV& s) {
            ser.times.push_back(s.t);
            for (std::size_t j = 0; j < weights.size(); ++j) ser.tail[j].push_back(tail_sum(s.u, s.v, weights[j]));
        };
        evolve(initial_on_sphere(prob, family, ser.tau, path.seed()), ser.tau, 0.0, noise, prob, spec,
               std::span(&obs, 1));
    });

    r.nonincreasing_in_k = true;
    r.strictly_decreasing_in_k = true;
    for (const auto& ser : r.series) {
        for (std::size_t j = 0; j + 1 < ser.tail.size(); ++j) {
            for (std::size_t t = 0; t < ser.times.size(); ++t) {
                const double a = ser.tail[j][t];
                const double b = ser.tail[j + 1][t];
                if (b > a) r.nonincreasing_in_k = false;
                if (!(b < a)) r.strictly_decreasing_in_k = false;
            }
        }
    }
    r.attained = attained_k(r, epsilon, prob.model.derived.sigma);
    return r;
}

TailAttainment attained_k(const TailResult& r, double epsilon, double sigma) {
    TailAttainment out;
    out.infimum = std::numeric_limits<double>::infinity();
    const std::size_t m = r.series.size();
    for (std::size_t j = 0; j < r.k_list.size(); ++j) {
        std::vector<double> peak(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& ser = r.series[i];
            for (std::size_t t = 0; t < ser.times.size(); ++t) {
                peak[i] = std::max(peak[i], ser.tail[j][t] * std::exp(sigma * ser.times[t]));
            }
        }
        if (m > 0) out.infimum = std::min(out.infimum, peak.back());
        // Longest run of most-negative taus that satisfy the bound.
        std::size_t first_ok = m;
        while (first_ok > 0 && peak[first_ok - 1] <= epsilon) --first_ok;
        if (first_ok < m && !out.k) {
            out.k = r.k_list[j];
            out.fitted_T = r.series[first_ok].tau;
        }
    }
    return out;
}

PullbackResult pullback_convergence_experiment(const TemperedFamilySpec& family,
                                               std::span<const double> tau_list,
                                               const SamplePath& path, const DiscreteProblem& prob,
                                               const SolveSpec& spec) {
    if (tau_list.size() < 3) throw std::invalid_argument("pullback: need at least 3 tau values");
    for (std::size_t i = 1; i < tau_list.size(); ++i) {
        if (tau_list[i] > tau_list[i - 1]) throw std::invalid_argument("pullback: tau_list must be nonincreasing");
    }
    if (tau_list.front() > 0.0) throw std::invalid_argument("pullback: tau must be <= 0");
    require_covers(path, tau_list.back(), 0.0, "pullback");
    const NoiseSignal noise(path);

    std::vector<StateUV> finals(tau_list.size(), StateUV{Field(prob.grid), Field(prob.grid), 0.0});
    parallel_for(tau_list.size(), [&](std::size_t i) {
        finals[i] = evolve(initial_on_sphere(prob, family, tau_list[i], path.seed()), tau_list[i], 0.0,
                           noise, prob, spec);
    });

    PullbackResult r;
    r.seed = path.seed();
    r.taus.assign(tau_list.begin(), tau_list.end());
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        r.distances.push_back(product_distance(finals[i].u, finals[i].v, finals[i + 1].u, finals[i + 1].v));
    }
    for (std::size_t i = 1; i < r.distances.size(); ++i) {
        if (r.distances[i] > r.distances[i - 1]) r.non_monotone_at.push_back(i);
    }
    r.decreasing_trend = r.distances.back() < r.distances.front() ||
                         (r.distances.front() == 0.0 && r.distances.back() == 0.0);
    return r;
}

CocycleResult cocycle_experiment(std::span<const CocycleSplit> splits, const SamplePath& path,
                                 const StateUZ& x0, const DiscreteProblem& prob,
                                 const SolveSpec& spec, double tolerance) {
    const NoiseSignal noise(path);
    CocycleResult r;
    r.seed = path.seed();
    r.splits.assign(splits.begin(), splits.end());
    for (const auto& sp : splits) {
        if (sp.s < 0.0 || sp.t < 0.0) throw std::invalid_argument("cocycle: s and t must be >= 0");
        require_aligned(sp.s, noise, spec.dt, "cocycle split s");
        require_aligned(sp.t, noise, spec.dt, "cocycle split t");
        require_covers(path, 0.0, sp.s + sp.t, "cocycle");
    }
    r.defects.resize(splits.size());
    parallel_for(splits.size(), [&](std::size_t i) {
        const auto& sp = splits[i];
        const StateUZ direct = cocycle_apply(sp.s + sp.t, noise, x0, prob, spec);
        const StateUZ first = cocycle_apply(sp.s, noise, x0, prob, spec);
        const StateUZ second = cocycle_apply(sp.t, NoiseSignal(shift(path, sp.s)), first, prob, spec);
        const double scale = product_norm(direct.u, direct.z);
        const double d = product_distance(direct.u, direct.z, second.u, second.z);
        r.defects[i] = scale > 0.0 ? d / scale : d;
    });
    r.max_defect = r.defects.empty() ? 0.0 : *std::max_element(r.defects.begin(), r.defects.end());
    r.pass = r.max_defect <= tolerance;
    return r;
}

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

// Scaling and squaring with a degree-16 Taylor polynomial.
Mat2 expm_taylor(const Mat2& M, double t) {
    double norm = 0.0;
    for (const auto& row : M) norm = std::max(norm, std::abs(row[0] * t) + std::abs(row[1] * t));
    int squarings = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = t / std::ldexp(1.0, squarings);
    Mat2 A{{{M[0][0] * scale, M[0][1] * scale}, {M[1][0] * scale, M[1][1] * scale}}};
    Mat2 result{{{1.0, 0.0}, {0.0, 1.0}}};
    Mat2 term = result;
    for (int k = 1; k <= 16; ++k) {
        term = mat_mul(term, A);
        for (auto& row : term)
            for (double& x : row) x /= k;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) result[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) result = mat_mul(result, result);
    return result;
}

}  // namespace

std::array<double, 2> ModeReference::at(double t, std::array<double, 2> y0) const {
    const Mat2 M{{{-delta, 1.0}, {-(lambda_prime + mu), -(alpha - delta)}}};
    const std::array<double, 2> c{eta, (delta - alpha) * eta};
    // Periodic particular solution P cos t + Q sin t with (M^2 + I) P = -c, Q = M P.
    Mat2 A = mat_mul(M, M);
    A[0][0] += 1.0;
    A[1][1] += 1.0;
    const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    const std::array<double, 2> P{(-A[1][1] * c[0] + A[0][1] * c[1]) / det,
                                  (A[1][0] * c[0] - A[0][0] * c[1]) / det};
    const std::array<double, 2> Q{M[0][0] * P[0] + M[0][1] * P[1], M[1][0] * P[0] + M[1][1] * P[1]};
    const Mat2 E = expm_taylor(M, t);
    const double a0 = y0[0] - P[0];
    const double a1 = y0[1] - P[1];
    return {E[0][0] * a0 + E[0][1] * a1 + P[0] * std::cos(t) + Q[0] * std::sin(t),
            E[1][0] * a0 + E[1][1] * a1 + P[1] * std::cos(t) + Q[1] * std::sin(t)};
}

ModeStudy mode_convergence_study(const Grid& grid, double alpha, double lambda, int mode, double eta,
                                 Scheme scheme, std::span<const double> dts, double t_final) {
    if (grid.dim != 1) throw std::invalid_argument("mode study: 1-D grid required");
    if (mode < 1 || mode > grid.n) throw std::invalid_argument("mode study: mode out of range");
    if (dts.size() < 2) throw std::invalid_argument("mode study: need at least two dt values");

    PhysicalParams p;
    p.alpha = alpha;
    p.lambda = lambda;
    DiscreteProblem prob = DiscreteProblem::make(grid, make_model(p, Nonlinearity::power({0.0, 3.0, 0.0})));
    const double L = grid.half_width;
    const double hx = grid.spacing();
    Field shape(grid);
    for (int i = 0; i < grid.n; ++i) {
        shape[static_cast<std::size_t>(i)] = std::sin(mode * std::numbers::pi * (grid.coord(i) + L) / (2.0 * L));
    }
    for (std::size_t i = 0; i < shape.size(); ++i) prob.h[i] = eta * shape[i];
    const double sn = std::sin(mode * std::numbers::pi * hx / (4.0 * L));
    const auto& d = prob.model.derived;
    const ModeReference ref{alpha, d.delta, d.lambda_prime, 4.0 / (hx * hx) * sn * sn, eta};

    const NoiseSignal noise = NoiseSignal::smooth([](double t) { return std::sin(t); }, 0.0, t_final);
    ModeStudy study;
    study.scheme = scheme;
    study.mode = mode;
    study.eta = eta;
    for (double dt : dts) {
        SolveSpec spec;
        spec.dt = dt;
        spec.scheme = scheme;
        std::vector<EnergyRecord> records;
        double worst = 0.0;
        const Observer obs = [&](const StateUV& s) {
            records.push_back(record_energy(s, noise, prob, {}));
            const double whole = std::nearbyint(s.t);
            if (whole >= 1.0 && std::abs(s.t - whole) < 1e-9) {
                const auto y = ref.at(s.t, {1.0, 0.0});
                double e2 = 0.0;
                for (std::size_t i = 0; i < shape.size(); ++i) {
                    const double eu = s.u[i] - y[0] * shape[i];
                    const double ev = s.v[i] - y[1] * shape[i];
                    e2 += eu * eu + ev * ev;
                }
                worst = std::max(worst, std::sqrt(e2 * grid.cell_volume()));
            }
        };
        evolve(StateUV{shape, Field(grid), 0.0}, 0.0, t_final, noise, prob, spec, std::span(&obs, 1));
        const EnergyResiduals res = energy_identity_residual(records, d.sigma);
        study.rows.push_back({dt, worst, res.max_abs_differential(), res.max_abs_integral()});
    }
    for (std::size_t i = 0; i + 1 < study.rows.size(); ++i) {
        const double ratio = study.rows[i].dt / study.rows[i + 1].dt;
        study.error_orders.push_back(std::log(study.rows[i].max_error / study.rows[i + 1].max_error) /
                                     std::log(ratio));
        study.residual_orders.push_back(
            std::log(study.rows[i].max_residual_diff / study.rows[i + 1].max_residual_diff) / std::log(ratio));
    }
    return study;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& x) {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

// Non-finite doubles would serialize as null silently; make them explicit strings.
nlohmann::json num(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(io::format_double(x));
}

}  // namespace

bool ExperimentReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.asserted; });
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["experiment"] = experiment;
    j["config_hash"] = config_hash;
    j["seeds"] = seeds;
    j["per_seed"] = per_seed;
    j["summary"] = summary;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) {
        cs.push_back({{"name", c.name}, {"passed", c.passed}, {"margin", num(c.margin)}, {"asserted", c.asserted}});
    }
    j["checks"] = cs;
    j["all_pass"] = all_pass();
    return j;
}

std::string ExperimentReport::to_text() const {
    std::ostringstream os;
    os << "experiment   " << experiment << "\n";
    os << "config_hash  " << config_hash << "\n";
    os << "seeds        " << seeds.size();
    if (!seeds.empty()) os << " (" << seeds.front() << " .. " << seeds.back() << ")";
    os << "\n";
    std::size_t width = 5;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    os << std::left << std::setw(static_cast<int>(width) + 2) << "check" << std::setw(7) << "result"
       << "margin\n";
    for (const auto& c : checks) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << c.name << std::setw(7)
           << (c.passed ? "PASS" : (c.asserted ? "FAIL" : "info")) << io::format_double(c.margin) << "\n";
    }
    os << "overall      " << (all_pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
}


nlohmann::json to_json(const TemperednessResult& r) {
    return {{"seed", r.seed}, {"betas", r.betas}, {"slopes", r.slopes}, {"all_negative", r.all_negative},
            {"times", r.times}, {"log_R", r.log_R}};
}

nlohmann::json to_json(const AbsorptionResult& r) {
    return {{"seed", r.seed},
            {"taus", r.taus},
            {"radius", r.radius},
            {"uv_norm_sq", r.uv_norm_sq},
            {"uz_norm_sq", r.uz_norm_sq},
            {"integral_bound", r.integral_bound},
            {"limit_value", num(r.limit_value)},
            {"fitted_bound", num(r.fitted_bound)},
            {"R_estimate", num(r.R_estimate)},
            {"bound_over_R", num(r.bound_over_R)},
            {"entered_at", r.entered_at},
            {"integral_entered_at", r.integral_entered_at},
            {"absorbed", r.absorbed},
            {"integral_bounded", r.integral_bounded},
            {"monotone_decay_from", opt_json(r.monotone_decay_from)}};
}

nlohmann::json to_json(const TailResult& r) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& ser : r.series) {
        nlohmann::json per_k = nlohmann::json::array();
        for (const auto& col : ser.tail) per_k.push_back(col.empty() ? 0.0 : *std::max_element(col.begin(), col.end()));
        peaks.push_back({{"tau", ser.tau}, {"max_tail_per_k", per_k}});
    }
    return {{"seed", r.seed},
            {"epsilon", r.epsilon},
            {"k_list", r.k_list},
            {"attained_k", opt_json(r.attained.k)},
            {"fitted_T", opt_json(r.attained.fitted_T)},
            {"infimum", num(r.attained.infimum)},
            {"nonincreasing_in_k", r.nonincreasing_in_k},
            {"strictly_decreasing_in_k", r.strictly_decreasing_in_k},
            {"series", peaks}};
}

nlohmann::json to_json(const PullbackResult& r) {
    return {{"seed", r.seed},
            {"taus", r.taus},
            {"distances", r.distances},
            {"non_monotone_at", r.non_monotone_at},
            {"decreasing_trend", r.decreasing_trend}};
}

nlohmann::json to_json(const CocycleResult& r) {
    nlohmann::json sp = nlohmann::json::array();
    for (const auto& s : r.splits) sp.push_back({{"s", s.s}, {"t", s.t}});
    return {{"seed", r.seed}, {"splits", sp}, {"defects", r.defects}, {"max_defect", r.max_defect}, {"pass", r.pass}};
}

nlohmann::json to_json(const ModeStudy& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"dt", row.dt},
                        {"max_error", row.max_error},
                        {"max_residual_diff", row.max_residual_diff},
                        {"max_residual_int", row.max_residual_int}});
    }
    return {{"scheme", to_string(r.scheme)}, {"mode", r.mode},       {"eta", r.eta},
            {"rows", rows},                  {"error_orders", r.error_orders},
            {"residual_orders", r.residual_orders}};
}

}  // namespace rda
