#include "rda/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "rda/io.hpp"

namespace rda {

DiscreteProblem DiscreteProblem::make(const Grid& grid, const ModelConfig& model) {
    return DiscreteProblem{grid, model, sample(grid, model.phys.g), sample(grid, model.phys.h)};
}

std::string to_string(Scheme s) {
    return s == Scheme::semi_implicit ? "semi_implicit" : "crank_nicolson_linear";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "semi_implicit") return Scheme::semi_implicit;
    if (s == "crank_nicolson_linear") return Scheme::crank_nicolson_linear;
    throw std::invalid_argument("unknown scheme '" + s +
                                "' (expected semi_implicit|crank_nicolson_linear)");
}

DivergenceError::DivergenceError(long step, double dt, double t)
    : std::runtime_error("divergence: non-finite state after step " + std::to_string(step) +
                         " (dt=" + io::format_double(dt) + ", t=" + io::format_double(t) + ")"),
      step_(step),
      dt_(dt) {}

DivergenceError::DivergenceError(const DivergenceError& inner, const std::string& context)
    : std::runtime_error(context + ": " + inner.what()), step_(inner.step_), dt_(inner.dt_) {}

double max_stable_dt(const DiscreteProblem& prob, double stability_factor) {
    return stability_factor /
           std::sqrt(prob.grid.laplacian_spectral_radius() + prob.model.derived.lambda_prime);
}

Stepper::Stepper(const DiscreteProblem& prob, const SolveSpec& spec)
    : prob_(&prob), spec_(spec), dt_limit_(max_stable_dt(prob, spec.stability_factor)) {
    if (!(spec.dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
    if (spec.record_every < 1) throw std::invalid_argument("solver: record_every must be >= 1");
}

const Stepper::Tridiag& Stepper::factor(double c0, double s) const {
    auto key = std::make_pair(c0, s);
    auto it = factors_.find(key);
    if (it != factors_.end()) return it->second;

    const Grid& g = prob_->grid;
    const auto n = static_cast<std::size_t>(g.n);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const double diag = c0 + s * prob_->model.derived.lambda_prime + 2.0 * s * inv_h2;
    Tridiag t;
    t.off = -s * inv_h2;
    t.cprime.resize(n);
    t.inv_denom.resize(n);
    double cp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double denom = diag - t.off * cp;
        t.inv_denom[i] = 1.0 / denom;
        cp = t.off / denom;
        t.cprime[i] = cp;
    }
    return factors_.emplace(key, std::move(t)).first->second;
}

Field Stepper::cg_solve(double c0, double s, const Field& b) const {
    const double shift = c0 + s * prob_->model.derived.lambda_prime;
    auto apply = [&](const Field& x) {
        Field lap = laplacian(x);
        Field y(x.grid());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = shift * x[i] - s * lap[i];
        return y;
    };
    const double diag = shift + 2.0 * s * prob_->grid.dim /
                                    (prob_->grid.spacing() * prob_->grid.spacing());
    Field x(b.grid());
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = b[i] / diag;
    Field r = apply(x);
    for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - r[i];
    Field p = r;
    double rr = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        rr += r[i] * r[i];
        bb += b[i] * b[i];
    }
    const double target = spec_.cg_tolerance * spec_.cg_tolerance * bb;
    const std::size_t max_iter = 10 * b.size() + 100;
    for (std::size_t it = 0; it < max_iter && rr > target; ++it) {
        Field ap = apply(p);
        double pap = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) pap += p[i] * ap[i];
        const double a = rr / pap;
        double rr_new = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
            rr_new += r[i] * r[i];
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < b.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    if (rr > target && bb > 0.0) throw std::runtime_error("solver: conjugate gradients did not converge");
    return x;
}

Field Stepper::solve_shifted(double c0, double s, const Field& b) const {
    if (prob_->grid.dim != 1) return cg_solve(c0, s, b);
    const Tridiag& t = factor(c0, s);
    const std::size_t n = b.size();
    Field x(b.grid());
    double dp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dp = (b[i] - t.off * dp) * t.inv_denom[i];
        x[i] = dp;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= t.cprime[i] * x[i + 1];
    return x;
}

StateUV Stepper::step(const StateUV& s, double dt, double omega) const {
    if (!(dt > 0.0)) throw std::invalid_argument("solver: step dt must be positive");
    if (dt > dt_limit_ * (1.0 + 1e-12)) {
        throw std::invalid_argument("solver: dt=" + io::format_double(dt) + " exceeds stability bound " +
                                    io::format_double(dt_limit_));
    }
    const DiscreteProblem& p = *prob_;
    const auto& d = p.model.derived;
    const double alpha = p.model.phys.alpha;
    const double delta = d.delta;
    const double lp = d.lambda_prime;
    const std::size_t n = s.u.size();
    const auto& nl = p.model.nl;

    StateUV out{Field(p.grid), Field(p.grid), s.t + dt};
    if (spec_.scheme == Scheme::semi_implicit) {
        const double ku = 1.0 + delta * dt;
        const double kv = 1.0 + (alpha - delta) * dt;
        Field rhs(p.grid);
        for (std::size_t i = 0; i < n; ++i) {
            const double hw = p.h[i] * omega;
            const double r0 = -nl.f(s.u[i]) + p.g[i] + (delta - alpha) * hw;
            rhs[i] = dt * s.v[i] + dt * dt * r0 + kv * (s.u[i] + dt * hw);
        }
        out.u = solve_shifted(kv * ku, dt * dt, rhs);
        for (std::size_t i = 0; i < n; ++i) {
            out.v[i] = (ku * out.u[i] - s.u[i] - dt * p.h[i] * omega) / dt;
        }
    } else {
        const double a = 0.5 * dt;
        const double ku = 1.0 + a * delta;
        const double kv = 1.0 + a * (alpha - delta);
        const Field lap = laplacian(s.u);
        Field rhs(p.grid);
        Field pvec(p.grid);
        for (std::size_t i = 0; i < n; ++i) {
            const double hw = p.h[i] * omega;
            const double u_pred = s.u[i] + a * (-delta * s.u[i] + s.v[i] + hw);
            const double rm = -nl.f(u_pred) + p.g[i] + (delta - alpha) * hw;
            const double au0 = -lap[i] + lp * s.u[i];
            pvec[i] = (1.0 - a * delta) * s.u[i] + a * s.v[i] + dt * hw;
            const double q = -a * au0 + (1.0 - a * (alpha - delta)) * s.v[i] + dt * rm;
            rhs[i] = a * q + kv * pvec[i];
        }
        out.u = solve_shifted(kv * ku, a * a, rhs);
        for (std::size_t i = 0; i < n; ++i) out.v[i] = (ku * out.u[i] - pvec[i]) / a;
    }
    return out;
}

StateUV step(const StateUV& s, double dt, double omega, const DiscreteProblem& prob,
             const SolveSpec& spec) {
    return Stepper(prob, spec).step(s, dt, omega);
}

StateUV evolve(const StateUV& initial, double tau, double t_end, const NoiseSignal& noise,
               const DiscreteProblem& prob, const SolveSpec& spec,
               std::span<const Observer> observers) {
    if (!(tau <= t_end)) throw std::invalid_argument("evolve: need tau <= t_end");
    if (!(initial.u.grid() == prob.grid) || !(initial.v.grid() == prob.grid)) {
        throw std::invalid_argument("evolve: initial state is not on the problem grid");
    }
    if (!noise.covers(tau, t_end)) {
        throw std::out_of_range("evolve: noise does not cover [" + io::format_double(tau) + ", " +
                                io::format_double(t_end) + "]");
    }
    const Stepper stepper(prob, spec);
    const double dt = spec.dt;
    if (auto step = noise.grid_step()) {
        const double ratio = dt >= *step ? dt / *step : *step / dt;
        if (std::abs(ratio - std::nearbyint(ratio)) > 1e-9 * ratio) {
            throw std::invalid_argument("evolve: dt=" + io::format_double(dt) +
                                        " and path step " + io::format_double(*step) +
                                        " are not in integer ratio");
        }
    }
    const double span = t_end - tau;
    auto full = static_cast<long>(std::floor(span / dt + 1e-9));
    double rem = span - static_cast<double>(full) * dt;
    if (rem <= 1e-9 * dt) rem = 0.0;

    StateUV state{initial.u, initial.v, tau};
    auto notify = [&](const StateUV& s) {
        for (const auto& obs : observers) obs(s);
    };
    notify(state);
    const double off = stepper.omega_offset();
    bool recorded_last = true;
    for (long k = 0; k < full; ++k) {
        const double t0 = tau + static_cast<double>(k) * dt;
        StateUV next = stepper.step(state, dt, noise(t0 + off * dt));
        next.t = tau + static_cast<double>(k + 1) * dt;
        if (!next.u.all_finite() || !next.v.all_finite()) throw DivergenceError(k + 1, dt, next.t);
        state = std::move(next);
        recorded_last = (k + 1) % spec.record_every == 0;
        if (recorded_last) notify(state);
    }
    if (rem > 0.0) {
        const double t0 = tau + static_cast<double>(full) * dt;
        StateUV next = stepper.step(state, rem, noise(t0 + off * rem));
        if (!next.u.all_finite() || !next.v.all_finite()) throw DivergenceError(full + 1, rem, t_end);
        state = std::move(next);
        recorded_last = false;
    }
    state.t = t_end;
    if (!recorded_last) notify(state);
    return state;
}

Field reconstruct_z(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob) {
    const double w = noise(s.t);
    Field z(prob.grid);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = s.v[i] + prob.h[i] * w;
    return z;
}

Field velocity(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob) {
    Field z = reconstruct_z(s, noise, prob);
    const double delta = prob.model.derived.delta;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= delta * s.u[i];
    return z;
}

namespace {

StateUZ solve_uz(double tau, double t_end, const NoiseSignal& noise, const StateUZ& x0,
                 const DiscreteProblem& prob, const SolveSpec& spec) {
    const double w0 = noise(tau);
    StateUV init{x0.u, Field(prob.grid), tau};
    for (std::size_t i = 0; i < init.v.size(); ++i) init.v[i] = x0.z[i] - prob.h[i] * w0;
    const StateUV end = evolve(init, tau, t_end, noise, prob, spec);
    return StateUZ{end.u, reconstruct_z(end, noise, prob)};
}

}  // namespace

StateUZ cocycle_apply(double t_len, const NoiseSignal& noise, const StateUZ& x0,
                      const DiscreteProblem& prob, const SolveSpec& spec) {
    if (!(t_len >= 0.0)) throw std::invalid_argument("cocycle: t must be nonnegative");
    if (t_len == 0.0) return x0;
    return solve_uz(0.0, t_len, noise, x0, prob, spec);
}

StateUZ cocycle_pullback(double t_len, const SamplePath& path, const StateUZ& x0,
                         const DiscreteProblem& prob, const SolveSpec& spec) {
    if (!(t_len >= 0.0)) throw std::invalid_argument("cocycle: t must be nonnegative");
    if (t_len == 0.0) return x0;
    return solve_uz(-t_len, 0.0, NoiseSignal(path), x0, prob, spec);
}

double product_norm(const Field& u, const Field& w) {
    return std::sqrt(inner(u, u) + grad_norm_sq(u) + inner(w, w));
}

double product_distance(const Field& u1, const Field& w1, const Field& u2, const Field& w2) {
    Field du(u1.grid());
    Field dw(w1.grid());
    for (std::size_t i = 0; i < du.size(); ++i) du[i] = u1[i] - u2[i];
    for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = w1[i] - w2[i];
    return product_norm(du, dw);
}

void require_aligned(double t, const NoiseSignal& noise, double dt, const std::string& what) {
    auto on_lattice = [](double x, double step) {
        const double p = x / step;
        return std::abs(p - std::nearbyint(p)) <= 1e-9 + 1e-13 * std::abs(p);
    };
    if (!on_lattice(t, dt)) {
        throw std::invalid_argument(what + " = " + io::format_double(t) +
                                    " is not a multiple of the solver step " + io::format_double(dt));
    }
    if (auto step = noise.grid_step()) {
        if (!on_lattice(t + noise.grid_phase(), *step)) {
            throw std::invalid_argument(what + " = " + io::format_double(t) +
                                        " does not fall on the path grid");
        }
    }
}

}  // namespace rda
