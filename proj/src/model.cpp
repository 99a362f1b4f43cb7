#include "rda/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rda/io.hpp"

namespace rda {

double FieldSpec::operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (double xi : x) r2 += (xi - center) * (xi - center);
    switch (kind) {
        case ProfileKind::zero:
            return 0.0;
        case ProfileKind::gaussian:
            return amplitude * std::exp(-r2 / (2.0 * width * width));
        case ProfileKind::bump: {
            const double s = r2 / (width * width);
            if (s >= 1.0) return 0.0;
            return amplitude * std::exp(1.0 - 1.0 / (1.0 - s));
        }
    }
    return 0.0;
}

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::zero: return "zero";
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::bump: return "bump";
    }
    return "zero";
}

ProfileKind profile_from_string(const std::string& s) {
    if (s == "zero") return ProfileKind::zero;
    if (s == "gaussian") return ProfileKind::gaussian;
    if (s == "bump") return ProfileKind::bump;
    throw std::invalid_argument("unknown profile '" + s + "' (expected zero|gaussian|bump)");
}

double PowerNonlinearity::f(double u) const {
    if (gamma == 3.0) return a * u * u * u + b * u;
    return a * std::pow(std::abs(u), gamma - 1.0) * u + b * u;
}

double PowerNonlinearity::F(double u) const {
    if (gamma == 3.0) return a * u * u * u * u / 4.0 + 0.5 * b * u * u;
    return a * std::pow(std::abs(u), gamma + 1.0) / (gamma + 1.0) + 0.5 * b * u * u;
}

double PowerNonlinearity::df(double u) const {
    if (gamma == 3.0) return 3.0 * a * u * u + b;
    return a * gamma * std::pow(std::abs(u), gamma - 1.0) + b;
}

GrowthConstants PowerNonlinearity::constants() const {
    GrowthConstants c;
    c.c1 = a + b;
    // Sharp c2 for each term is gamma + 1 and 2; the mixed law takes the smaller.
    c.c2 = b > 0.0 ? std::min(gamma + 1.0, 2.0) : gamma + 1.0;
    c.c3 = a / (gamma + 1.0);
    c.c4 = a * gamma + b;
    return c;
}

Nonlinearity Nonlinearity::power(PowerNonlinearity p) {
    if (!(p.a >= 0.0) || !(p.b >= 0.0)) {
        throw std::invalid_argument("nonlinearity: a and b must be nonnegative");
    }
    if (!(p.gamma >= 1.0 && p.gamma <= 3.0)) {
        throw std::invalid_argument("nonlinearity: gamma must lie in [1, 3]");
    }
    Nonlinearity n;
    n.gamma_ = p.gamma;
    n.constants_ = p.constants();
    n.power_ = p;
    return n;
}

Nonlinearity Nonlinearity::custom(std::function<double(double)> f, std::function<double(double)> F,
                                  std::function<double(double)> df, double gamma,
                                  GrowthConstants constants) {
    if (!f || !F || !df) throw std::invalid_argument("nonlinearity: f, F and f' are all required");
    if (!(gamma >= 1.0 && gamma <= 3.0)) {
        throw std::invalid_argument("nonlinearity: gamma must lie in [1, 3]");
    }
    if (!(constants.c2 > 0.0)) throw std::invalid_argument("nonlinearity: c2 must be positive");
    Nonlinearity n;
    n.power_.reset();
    n.f_ = std::move(f);
    n.F_ = std::move(F);
    n.df_ = std::move(df);
    n.gamma_ = gamma;
    n.constants_ = constants;
    return n;
}

double choose_delta(double alpha, double lambda) {
    if (!(alpha > 0.0) || !(lambda > 0.0)) {
        throw std::invalid_argument("choose_delta: alpha and lambda must be positive");
    }
    return 0.5 * std::min(alpha, lambda / alpha);
}

double compute_sigma(double alpha, double delta, double c2, std::optional<double> lambda) {
    if (!(delta > 0.0)) throw std::invalid_argument("compute_sigma: delta must be positive");
    if (!(c2 > 0.0)) throw std::invalid_argument("compute_sigma: c2 must be positive");
    if (!(alpha - delta > 0.0)) {
        throw std::invalid_argument("compute_sigma: admissibility violated: alpha - delta > 0 fails (alpha=" +
                                    io::format_double(alpha) + ", delta=" + io::format_double(delta) + ")");
    }
    if (!lambda) {
        throw std::invalid_argument(
            "compute_sigma: lambda not supplied, cannot check lambda + delta^2 - alpha delta > 0");
    }
    if (!(*lambda + delta * delta - alpha * delta > 0.0)) {
        throw std::invalid_argument(
            "compute_sigma: admissibility violated: lambda + delta^2 - alpha delta > 0 fails (value " +
            io::format_double(*lambda + delta * delta - alpha * delta) + ")");
    }
    return 0.5 * std::min({alpha - delta, delta, delta * c2});
}

ModelConfig make_model(const PhysicalParams& phys, const Nonlinearity& nl,
                       std::optional<double> delta_override) {
    if (!(phys.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(phys.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    for (const FieldSpec* fs : {&phys.g, &phys.h}) {
        if (fs->kind != ProfileKind::zero && !(fs->width > 0.0)) {
            throw std::invalid_argument("profile width must be positive");
        }
    }
    ModelConfig m{phys, nl, {}};
    m.derived.delta = delta_override ? *delta_override : choose_delta(phys.alpha, phys.lambda);
    m.derived.c2 = nl.constants().c2;
    m.derived.sigma = compute_sigma(phys.alpha, m.derived.delta, m.derived.c2, phys.lambda);
    m.derived.lambda_prime =
        phys.lambda + m.derived.delta * m.derived.delta - phys.alpha * m.derived.delta;
    return m;
}

namespace {

bool le(double lhs, double rhs) {
    return lhs <= rhs + 1e-12 * (std::abs(lhs) + std::abs(rhs));
}

}  // namespace

ValidationReport validate_growth_conditions(const Nonlinearity& nl,
                                            std::span<const double> u_samples) {
    ValidationReport rep;
    rep.constants = nl.constants();
    const auto* pw = nl.as_power();
    const bool linear_part = pw && pw->b > 0.0;
    if (linear_part) {
        rep.note = "linear part b > 0: c2 = min(gamma + 1, 2); f1/f3 checked with max(|u|^gamma, |u|) "
                   "and max(|u|^{gamma-1}, 1)";
    }
    const double g = nl.gamma();
    const auto& c = rep.constants;
    for (double u : u_samples) {
        if (!std::isfinite(u)) throw std::invalid_argument("validate_growth_conditions: non-finite sample");
        const double au = std::abs(u);
        const double f = nl.f(u);
        const double F = nl.F(u);
        const double df = nl.df(u);

        double pow_g = std::pow(au, g);
        double pow_gm1 = g == 1.0 ? 1.0 : std::pow(au, g - 1.0);
        if (linear_part) {
            pow_g = std::max(pow_g, au);
            pow_gm1 = std::max(pow_gm1, 1.0);
        }
        const double f1_rhs = c.c1 * pow_g;
        if (!le(std::abs(f), f1_rhs)) rep.violations.push_back({"f1", u, std::abs(f), f1_rhs});

        const double f2_lhs = f * u - c.c2 * F;
        if (f2_lhs < -1e-12 * (std::abs(f * u) + std::abs(c.c2 * F))) rep.violations.push_back({"f2", u, f2_lhs, 0.0});

        const double F2_rhs = c.c3 * std::pow(au, g + 1.0);
        if (!le(F2_rhs, F)) rep.violations.push_back({"F2", u, F, F2_rhs});

        const double f3_rhs = c.c4 * pow_gm1;
        if (!le(std::abs(df), f3_rhs)) rep.violations.push_back({"f3", u, std::abs(df), f3_rhs});
    }
    return rep;
}

}  // namespace rda
