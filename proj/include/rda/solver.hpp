#pragma once

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "rda/grid.hpp"
#include "rda/model.hpp"
#include "rda/path.hpp"

namespace rda {

/// Model bound to a grid, with g and h sampled once.
struct DiscreteProblem {
    Grid grid;
    ModelConfig model;
    Field g;
    Field h;

    static DiscreteProblem make(const Grid& grid, const ModelConfig& model);
};

struct StateUV {
    Field u;
    Field v;
    double t = 0.0;
};

/// Position and velocity-like variable z = u_t + delta u.
struct StateUZ {
    Field u;
    Field z;
};

enum class Scheme { semi_implicit, crank_nicolson_linear };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SolveSpec {
    double dt = 0.01;
    Scheme scheme = Scheme::semi_implicit;
    int record_every = 1;
    /// dt must satisfy dt <= stability_factor / sqrt(mu_max + lambda').
    double stability_factor = 1.0;
    /// Relative residual for conjugate gradients (2-D / 3-D only).
    double cg_tolerance = 1e-12;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long step, double dt, double t);
    /// Same failure, message prefixed with where it happened (e.g. the start time tau).
    DivergenceError(const DivergenceError& inner, const std::string& context);
    long step() const { return step_; }
    double dt() const { return dt_; }

private:
    long step_;
    double dt_;
};

/// Largest admissible dt for the given problem and stability factor.
double max_stable_dt(const DiscreteProblem& prob, double stability_factor);

/// Advances one step of the transformed system
///   u' = -delta u + v + h w(t)
///   v' = -(alpha - delta) v - lambda' u + lap u - f(u) + g + (delta - alpha) h w(t)
/// Linear coupling and the Laplacian are implicit (one SPD solve per step);
/// f is explicit. `omega` is w at the scheme's evaluation time: the step start
/// for semi_implicit, the midpoint for crank_nicolson_linear.
///
/// Keeps a factorization per distinct dt, so a Stepper belongs to one
/// trajectory at a time.
class Stepper {
public:
    Stepper(const DiscreteProblem& prob, const SolveSpec& spec);

    StateUV step(const StateUV& s, double dt, double omega) const;

    /// Fraction of the step at which omega is sampled (0 or 1/2).
    double omega_offset() const { return spec_.scheme == Scheme::semi_implicit ? 0.0 : 0.5; }
    const SolveSpec& spec() const { return spec_; }

    /// Solves (c0 + s lambda') x - s lap x = b.
    Field solve_shifted(double c0, double s, const Field& b) const;

private:
    struct Tridiag {
        std::vector<double> cprime;
        std::vector<double> inv_denom;
        double off = 0.0;
    };
    const Tridiag& factor(double c0, double s) const;
    Field cg_solve(double c0, double s, const Field& b) const;

    const DiscreteProblem* prob_;
    SolveSpec spec_;
    double dt_limit_;
    mutable std::map<std::pair<double, double>, Tridiag> factors_;
};

/// Single step without a persistent stepper.
StateUV step(const StateUV& s, double dt, double omega, const DiscreteProblem& prob,
             const SolveSpec& spec);

using Observer = std::function<void(const StateUV&)>;

/// Integrates from tau to t_end (final step shortened to land exactly on
/// t_end). Step n starts at tau + n dt. Observers see the initial state,
/// every `record_every`-th state, and the final state.
StateUV evolve(const StateUV& initial, double tau, double t_end, const NoiseSignal& noise,
               const DiscreteProblem& prob, const SolveSpec& spec,
               std::span<const Observer> observers = {});

/// z = v + h w(t).
Field reconstruct_z(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob);
/// u_t = z - delta u.
Field velocity(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob);

/// Phi(t, w, (u0, z0)): v0 = z0 - h w(0), solve on [0, t] with `noise`, return (u, z).
StateUZ cocycle_apply(double t_len, const NoiseSignal& noise, const StateUZ& x0,
                      const DiscreteProblem& prob, const SolveSpec& spec);

/// Phi(t, theta_{-t} w, (u0, z0)), computed as the solve on [-t, 0] with w itself.
StateUZ cocycle_pullback(double t_len, const SamplePath& path, const StateUZ& x0,
                         const DiscreteProblem& prob, const SolveSpec& spec);

/// sqrt(|u1-u2|_{H1}^2 + |w1-w2|^2): distance in H1 x L2.
double product_distance(const Field& u1, const Field& w1, const Field& u2, const Field& w2);
double product_norm(const Field& u, const Field& w);

/// Throws std::invalid_argument unless t lies on the noise grid (when it has one)
/// and on the dt lattice anchored at 0.
void require_aligned(double t, const NoiseSignal& noise, double dt, const std::string& what);

}  // namespace rda
