#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rda/model.hpp"

using namespace rda;

TEST_CASE("choose_delta examples satisfy both admissibility inequalities") {
    struct Case {
        double alpha, lambda, delta;
    };
    for (const Case& c : {Case{1.0, 1.0, 0.5}, Case{2.0, 1.0, 0.25}, Case{0.1, 10.0, 0.05}}) {
        const double d = choose_delta(c.alpha, c.lambda);
        CHECK(d == doctest::Approx(c.delta).epsilon(1e-15));
        CHECK(c.alpha - d > 0.0);
        CHECK(c.lambda + d * d - c.alpha * d > 0.0);
    }
    CHECK(1.0 - 0.5 == 0.5);
    CHECK(1.0 + 0.25 - 0.5 == 0.75);
}

TEST_CASE("compute_sigma arithmetic") {
    // 0.5 * min{0.9, 0.1, 0.4}
    CHECK(compute_sigma(1.0, 0.1, 4.0, 1.0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(compute_sigma(1.0, 0.5, 1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("compute_sigma refuses to skip the stiffness inequality") {
    try {
        compute_sigma(2.0, 1.5, 4.0, std::nullopt);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("lambda") != std::string::npos);
    }
    // lambda + delta^2 - alpha delta = 0.5 + 2.25 - 3 < 0
    CHECK_THROWS_AS(compute_sigma(2.0, 1.5, 4.0, 0.5), std::invalid_argument);
    CHECK_NOTHROW(compute_sigma(2.0, 1.5, 4.0, 1.0));
    CHECK_THROWS_AS(compute_sigma(1.0, 1.0, 4.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_sigma(1.0, 0.1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_sigma(1.0, 0.0, 4.0, 1.0), std::invalid_argument);
}

TEST_CASE("sigma respects the inequalities used in the estimates") {
    for (double alpha : {0.1, 0.5, 1.0, 3.0}) {
        for (double lambda : {0.2, 1.0, 7.0}) {
            for (double c2 : {2.0, 2.5, 4.0}) {
                const double delta = choose_delta(alpha, lambda);
                const double s = compute_sigma(alpha, delta, c2, lambda);
                CHECK(s > 0.0);
                CHECK(2.0 * s <= alpha - delta);
                CHECK(2.0 * s <= delta);
                CHECK(2.0 * s <= delta * c2);
            }
        }
    }
}

TEST_CASE("make_model fills the derived constants") {
    PhysicalParams p;
    p.alpha = 1.0;
    p.lambda = 1.0;
    const ModelConfig m = make_model(p, Nonlinearity{});
    CHECK(m.derived.delta == 0.5);
    CHECK(m.derived.c2 == 4.0);
    CHECK(m.derived.sigma == 0.25);
    CHECK(m.derived.lambda_prime == 0.75);
    CHECK(make_model(p, Nonlinearity{}, 0.1).derived.sigma == doctest::Approx(0.05));
    p.alpha = -1.0;
    CHECK_THROWS_AS(make_model(p, Nonlinearity{}), std::invalid_argument);
    p.alpha = 1.0;
    p.lambda = 0.0;
    CHECK_THROWS_AS(make_model(p, Nonlinearity{}), std::invalid_argument);
}

TEST_CASE("power nonlinearity identities") {
    std::vector<double> us;
    for (int i = -40; i <= 40; ++i) us.push_back(0.173 * i);
    us.push_back(1e-8);
    us.push_back(123.456);
    for (double gamma : {1.0, 1.5, 2.0, 2.7, 3.0}) {
        for (double a : {0.3, 1.0, 2.0}) {
            const PowerNonlinearity nl{a, gamma, 0.0};
            for (double u : us) {
                const double lhs = nl.f(u) * u;
                const double rhs = (gamma + 1.0) * nl.F(u);
                CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(std::abs(lhs), 1e-300));
                CHECK(nl.F(u) >= 0.0);
                CHECK(nl.F(-u) == nl.F(u));
                CHECK(nl.f(-u) == -nl.f(u));
            }
        }
    }
}

TEST_CASE("analytic derivative matches central differences") {
    const PowerNonlinearity nl{1.3, 2.5, 0.7};
    for (double u : {-2.0, -0.3, 0.4, 1.9}) {
        const double e = 1e-6;
        const double fd = (nl.f(u + e) - nl.f(u - e)) / (2.0 * e);
        CHECK(nl.df(u) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("induced constants") {
    const GrowthConstants c = PowerNonlinearity{2.0, 3.0, 0.0}.constants();
    CHECK(c.c1 == 2.0);
    CHECK(c.c2 == 4.0);
    CHECK(c.c3 == 0.5);
    CHECK(c.c4 == 6.0);
    const GrowthConstants m = PowerNonlinearity{1.0, 3.0, 0.5}.constants();
    CHECK(m.c1 == 1.5);
    CHECK(m.c2 == 2.0);
    CHECK(m.c4 == 3.5);
}

TEST_CASE("growth conditions for cubic and linear f") {
    const std::vector<double> samples{-2.0, -1.0, 0.0, 1.0, 2.0};
    const ValidationReport cubic = validate_growth_conditions(Nonlinearity{}, samples);
    CHECK(cubic.ok());
    CHECK(cubic.constants.c2 == 4.0);
    CHECK(cubic.constants.c3 == 0.25);

    const ValidationReport linear = validate_growth_conditions(Nonlinearity::power({1.0, 1.0, 0.0}), samples);
    CHECK(linear.ok());
    CHECK(linear.constants.c2 == 2.0);

    const ValidationReport zero_only = validate_growth_conditions(Nonlinearity{}, std::vector<double>{0.0});
    CHECK(zero_only.ok());

    std::vector<double> dense;
    for (int i = -300; i <= 300; ++i) dense.push_back(0.05 * i);
    for (double gamma : {1.0, 2.0, 3.0}) {
        CHECK(validate_growth_conditions(Nonlinearity::power({1.0, gamma, 0.0}), dense).ok());
        const ValidationReport mixed = validate_growth_conditions(Nonlinearity::power({1.0, gamma, 0.5}), dense);
        CHECK(mixed.ok());
        CHECK_FALSE(mixed.note.empty());
    }
}

TEST_CASE("custom nonlinearity with wrong constants is reported, not trusted") {
    // f = u^3 claimed with c2 = 5 violates f u - c2 F >= 0.
    const Nonlinearity bad = Nonlinearity::custom([](double u) { return u * u * u; },
                                                  [](double u) { return 0.25 * u * u * u * u; },
                                                  [](double u) { return 3.0 * u * u; }, 3.0,
                                                  GrowthConstants{1.0, 5.0, 0.25, 3.0});
    const ValidationReport r = validate_growth_conditions(bad, std::vector<double>{-1.0, 0.5, 2.0});
    CHECK_FALSE(r.ok());
    bool saw_f2 = false;
    for (const auto& v : r.violations) saw_f2 = saw_f2 || v.condition == "f2";
    CHECK(saw_f2);
}

TEST_CASE("power nonlinearity parameter checks") {
    CHECK_THROWS_AS(Nonlinearity::power({1.0, 3.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Nonlinearity::power({1.0, 0.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Nonlinearity::power({-1.0, 3.0, 0.0}), std::invalid_argument);
    CHECK(Nonlinearity::power({0.0, 3.0, 0.0}).is_zero());
}

TEST_CASE("field profiles") {
    const std::vector<double> origin{0.0};
    const std::vector<double> one{1.0};
    const FieldSpec g{ProfileKind::gaussian, 2.0, 1.0, 0.0};
    CHECK(g(origin) == 2.0);
    CHECK(g(one) == doctest::Approx(2.0 * std::exp(-0.5)));
    const FieldSpec b{ProfileKind::bump, 1.0, 2.0, 0.0};
    CHECK(b(origin) == doctest::Approx(1.0));
    CHECK(b(std::vector<double>{2.0}) == 0.0);
    CHECK(b(std::vector<double>{5.0}) == 0.0);
    CHECK(FieldSpec{}(one) == 0.0);
    CHECK(profile_from_string(to_string(ProfileKind::bump)) == ProfileKind::bump);
    CHECK_THROWS_AS(profile_from_string("triangle"), std::invalid_argument);
}
