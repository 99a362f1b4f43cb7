#include "rda/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rda {

namespace {

double integral_F(const Field& u, const Nonlinearity& nl) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += nl.F(u[i]);
    return s * u.grid().cell_volume();
}

}  // namespace

double energy_E(const StateUV& s, const DiscreteProblem& prob) {
    const double lp = prob.model.derived.lambda_prime;
    return inner(s.v, s.v) + lp * inner(s.u, s.u) + grad_norm_sq(s.u) +
           2.0 * integral_F(s.u, prob.model.nl);
}

PsiBreakdown psi(const StateUV& s, double w, const DiscreteProblem& prob) {
    const auto& d = prob.model.derived;
    const double alpha = prob.model.phys.alpha;
    const double delta = d.delta;
    const double sigma = d.sigma;
    const double lp = d.lambda_prime;
    const auto& nl = prob.model.nl;
    const double vol = prob.grid.cell_volume();

    double int_F = 0.0;
    double int_fu = 0.0;
    double int_fh = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double fu = nl.f(s.u[i]);
        int_F += nl.F(s.u[i]);
        int_fu += fu * s.u[i];
        int_fh += fu * prob.h[i];
    }
    int_F *= vol;
    int_fu *= vol;
    int_fh *= vol;

    PsiBreakdown out;
    auto& t = out.terms;
    t[0] = -2.0 * (alpha - delta - 2.0 * sigma) * inner(s.v, s.v);
    t[1] = -2.0 * (delta - 2.0 * sigma) * lp * inner(s.u, s.u);
    t[2] = -2.0 * (delta - 2.0 * sigma) * grad_norm_sq(s.u);
    t[3] = 8.0 * sigma * int_F;
    t[4] = -2.0 * delta * int_fu;
    t[5] = 2.0 * lp * inner(s.u, prob.h) * w;
    t[6] = 2.0 * grad_inner(s.u, prob.h) * w;
    t[7] = 2.0 * w * int_fh;
    t[8] = 2.0 * inner(prob.g, s.v);
    t[9] = 2.0 * (delta - alpha) * inner(s.v, prob.h) * w;
    for (double x : t) out.total += x;
    return out;
}

PsiBreakdown psi(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob) {
    return psi(s, noise(s.t), prob);
}

TailEnergy tail_energy(const StateUV& s, double k, const DiscreteProblem& prob) {
    const TailWeights w = tail_weights(prob.grid, k);
    const double lp = prob.model.derived.lambda_prime;
    const auto& nl = prob.model.nl;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        acc += w.node[i] * (s.v[i] * s.v[i] + lp * s.u[i] * s.u[i] + 2.0 * nl.F(s.u[i]));
    }
    TailEnergy out;
    out.value = acc * prob.grid.cell_volume() + weighted_grad_norm_sq(s.u, w);
    out.truncated = w.truncated;
    return out;
}

EnergyRecord record_energy(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob,
                           std::span<const double> tail_ks) {
    EnergyRecord r;
    r.t = s.t;
    r.E = energy_E(s, prob);
    const PsiBreakdown p = psi(s, noise, prob);
    r.Psi = p.total;
    r.terms = p.terms;
    for (double k : tail_ks) r.tail[k] = tail_energy(s, k, prob).value;
    return r;
}

double EnergyResiduals::max_abs_differential() const {
    double m = 0.0;
    for (double x : differential) m = std::max(m, std::abs(x));
    return m;
}

double EnergyResiduals::max_abs_integral() const {
    double m = 0.0;
    for (double x : integral) m = std::max(m, std::abs(x));
    return m;
}

EnergyResiduals energy_identity_residual(std::span<const EnergyRecord> records, double sigma) {
    if (records.size() < 2) throw std::invalid_argument("energy residual: need at least 2 records");
    const double dt = records[1].t - records[0].t;
    if (!(dt > 0.0)) throw std::invalid_argument("energy residual: records must increase in t");
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double d = records[i].t - records[i - 1].t;
        if (std::abs(d - dt) > 1e-9 * dt) {
            throw std::invalid_argument("energy residual: records are not equally spaced");
        }
    }
    EnergyResiduals out;
    out.differential.reserve(records.size() - 1);
    out.integral.reserve(records.size());
    out.integral.push_back(0.0);
    const double decay = std::exp(-4.0 * sigma * dt);
    double conv = 0.0;  // int_{t0}^{t_i} e^{4 sigma (xi - t_i)} Psi dxi
    const double t0 = records[0].t;
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const auto& a = records[i];
        const auto& b = records[i + 1];
        out.differential.push_back((b.E - a.E) / dt + 4.0 * sigma * 0.5 * (a.E + b.E) -
                                   0.5 * (a.Psi + b.Psi));
        conv = decay * conv + 0.5 * dt * (decay * a.Psi + b.Psi);
        out.integral.push_back(b.E - std::exp(-4.0 * sigma * (b.t - t0)) * records[0].E - conv);
    }
    return out;
}

Observer energy_recorder(std::vector<EnergyRecord>& out, const NoiseSignal& noise,
                         const DiscreteProblem& prob, std::vector<double> tail_ks) {
    return [&out, noise, &prob, ks = std::move(tail_ks)](const StateUV& s) {
        out.push_back(record_energy(s, noise, prob, ks));
    };
}

}  // namespace rda
