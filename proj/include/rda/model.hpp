#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rda {

enum class ProfileKind { zero, gaussian, bump };

/// Closed-form spatial profile for the forcing g and the noise intensity h.
/// gaussian: A exp(-|x-c|^2 / (2 w^2));  bump: A exp(1 - 1/(1 - r^2/w^2)) for r < w.
struct FieldSpec {
    ProfileKind kind = ProfileKind::zero;
    double amplitude = 1.0;
    double width = 1.0;
    double center = 0.0;  // same offset on every axis

    double operator()(std::span<const double> x) const;
};

std::string to_string(ProfileKind k);
ProfileKind profile_from_string(const std::string& s);

struct PhysicalParams {
    double alpha = 1.0;   // damping
    double lambda = 1.0;  // stiffness
    FieldSpec g;
    FieldSpec h;
};

struct GrowthConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
};

/// f(u) = a |u|^{gamma-1} u + b u.  a = b = 0 is the zero nonlinearity.
struct PowerNonlinearity {
    double a = 1.0;
    double gamma = 3.0;
    double b = 0.0;

    double f(double u) const;
    double F(double u) const;
    double df(double u) const;
    /// c1 = a + b, c2 = gamma + 1 (2 when b > 0), c3 = a / (gamma + 1), c4 = a gamma + b.
    GrowthConstants constants() const;
};

/// Either a shipped power law or a user-supplied nonlinearity with
/// user-supplied condition constants (validated numerically, not trusted).
class Nonlinearity {
public:
    /// Cubic u^3.
    Nonlinearity() : power_(PowerNonlinearity{}), constants_(PowerNonlinearity{}.constants()) {}
    static Nonlinearity power(PowerNonlinearity p);
    static Nonlinearity custom(std::function<double(double)> f, std::function<double(double)> F,
                               std::function<double(double)> df, double gamma,
                               GrowthConstants constants);

    double f(double u) const { return power_ ? power_->f(u) : f_(u); }
    double F(double u) const { return power_ ? power_->F(u) : F_(u); }
    double df(double u) const { return power_ ? power_->df(u) : df_(u); }
    double gamma() const { return gamma_; }
    const GrowthConstants& constants() const { return constants_; }
    const PowerNonlinearity* as_power() const { return power_ ? &*power_ : nullptr; }
    bool is_zero() const { return power_ && power_->a == 0.0 && power_->b == 0.0; }

private:
    std::optional<PowerNonlinearity> power_;
    std::function<double(double)> f_, F_, df_;
    double gamma_ = 3.0;
    GrowthConstants constants_;
};

struct DerivedParams {
    double delta = 0.0;
    double sigma = 0.0;
    double c2 = 0.0;
    double lambda_prime = 0.0;  // lambda + delta^2 - alpha delta
};

struct ModelConfig {
    PhysicalParams phys;
    Nonlinearity nl;
    DerivedParams derived;
};

/// delta = min{alpha, lambda/alpha} / 2, which satisfies alpha - delta > 0 and
/// lambda + delta^2 - alpha delta > 0.
double choose_delta(double alpha, double lambda);

/// sigma = min{alpha - delta, delta, delta c2} / 2. The second admissibility
/// inequality needs lambda; omitting it is an error, not a silent pass.
double compute_sigma(double alpha, double delta, double c2, std::optional<double> lambda);

/// Validates alpha, lambda, the nonlinearity exponent and (optionally) an
/// explicit delta, then fills in the derived constants.
ModelConfig make_model(const PhysicalParams& phys, const Nonlinearity& nl,
                       std::optional<double> delta_override = std::nullopt);

struct ConditionViolation {
    std::string condition;  // "f1", "f2", "F2", "f3"
    double u = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ValidationReport {
    GrowthConstants constants;
    std::vector<ConditionViolation> violations;
    std::string note;
    bool ok() const { return violations.empty(); }
};

/// Sampled check of the growth and dissipativity conditions with zero offsets:
///   |f(u)| <= c1 |u|^gamma,  f(u) u - c2 F(u) >= 0,  F(u) >= c3 |u|^{gamma+1},
///   |f'(u)| <= c4 |u|^{gamma-1}.
/// With a linear part b > 0 the bounds f1/f3 use max(|u|^gamma, |u|) and
/// max(|u|^{gamma-1}, 1) (the linear term is covered by the offset slot).
ValidationReport validate_growth_conditions(const Nonlinearity& nl,
                                            std::span<const double> u_samples);

}  // namespace rda
