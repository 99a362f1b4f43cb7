#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rda/experiments.hpp"

using namespace rda;

namespace {

DiscreteProblem small_problem(bool forced, const Nonlinearity& nl = Nonlinearity{}) {
    PhysicalParams p;
    p.alpha = 1.0;
    p.lambda = 1.0;
    if (forced) {
        p.g = {ProfileKind::gaussian, 1.0, 1.0, 0.0};
        p.h = {ProfileKind::gaussian, 1.0, 1.0, 0.0};
    }
    return DiscreteProblem::make(Grid::make(1, 20.0, 256), make_model(p, nl));
}

std::vector<double> taus_down_to(double last, double step) {
    std::vector<double> t;
    for (double x = -step; x >= last - 1e-12; x -= step) t.push_back(x);
    return t;
}

}  // namespace

TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    parallel_for(0, [](std::size_t) { FAIL("not called"); });
    for (unsigned workers : {1u, 4u}) {
        try {
            parallel_for(
                50,
                [](std::size_t i) {
                    if (i == 7 || i == 31) throw std::runtime_error("bad " + std::to_string(i));
                },
                workers);
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "bad 7");
        }
    }
}

TEST_CASE("tempered family radius") {
    TemperedFamilySpec fixed;
    fixed.radius_0 = 3.0;
    CHECK(fixed.radius(-100.0) == 3.0);
    TemperedFamilySpec grow;
    grow.kind = TemperedFamilySpec::Kind::subexponential_growth;
    grow.radius_0 = 2.0;
    grow.growth_beta = 0.5;
    CHECK(grow.radius(-16.0) == doctest::Approx(2.0 * std::exp(2.0)));
    // e^{-b|tau|} radius(tau) -> 0 for every b > 0.
    for (double b : {1e-2, 0.1, 1.0}) {
        const auto log_scaled = [&](double tau) { return b * tau + std::log(grow.radius(tau)); };
        CHECK(log_scaled(-1e4) < log_scaled(-1e2));
        CHECK(log_scaled(-1e6) < log_scaled(-1e4));
        CHECK(log_scaled(-1e6) < std::log(1e-6));
    }
    CHECK(family_kind_from_string(to_string(grow.kind)) == grow.kind);
    CHECK_THROWS_AS(family_kind_from_string("cone"), std::invalid_argument);
}

TEST_CASE("initial data sits on the sphere and is reproducible") {
    const DiscreteProblem prob = small_problem(true);
    TemperedFamilySpec fam;
    fam.kind = TemperedFamilySpec::Kind::subexponential_growth;
    fam.radius_0 = 1.5;
    fam.growth_beta = 0.2;
    for (double tau : {0.0, -4.0, -30.0}) {
        const StateUV s = initial_on_sphere(prob, fam, tau, 11);
        CHECK(s.t == tau);
        CHECK(product_norm(s.u, s.v) == doctest::Approx(fam.radius(tau)).epsilon(1e-12));
    }
    const StateUV a = initial_on_sphere(prob, fam, -4.0, 11);
    const StateUV b = initial_on_sphere(prob, fam, -4.0, 11);
    const StateUV c = initial_on_sphere(prob, fam, -4.0, 12);
    CHECK(product_distance(a.u, a.v, b.u, b.v) == 0.0);
    CHECK(product_distance(a.u, a.v, c.u, c.v) > 0.1);

    TemperedFamilySpec zero;
    zero.radius_0 = 0.0;
    CHECK(product_norm(initial_on_sphere(prob, zero, -1.0, 1).u, Field(prob.grid)) == 0.0);

    // Edge-concentrated data puts most of its mass away from the centre.
    TemperedFamilySpec edge;
    edge.edge_concentrated = true;
    const StateUV e = initial_on_sphere(prob, edge, 0.0, 3);
    const TailNorms t = tail_weighted_norms(e.u, e.v, 6.0);
    CHECK(t.u_l2_sq + t.grad_u_sq + t.v_l2_sq > 0.5);
}

TEST_CASE("R for the zero path is 1 + 1/sigma") {
    PhysicalParams p;
    p.alpha = 1.0;
    p.lambda = 1.0;
    const ModelConfig m = make_model(p, Nonlinearity{}, 0.1);
    REQUIRE(m.derived.sigma == doctest::Approx(0.05));
    const SamplePath zero = SamplePath::from_nodes(40000, 0.01, std::vector<double>(40001, 0.0));
    // The remaining tail e^{-20} / sigma is below 1e-7.
    CHECK(estimate_R(zero, m, -400.0) == doctest::Approx(21.0).epsilon(1e-7));
    CHECK(estimate_R(zero, m, -400.0, 2.5) == doctest::Approx(52.5).epsilon(1e-7));

    const SamplePath w = generate_path(3, -200.0, 0.0, 0.01);
    double prev = 0.0;
    for (double cut : {0.0, -1.0, -10.0, -50.0, -200.0}) {
        const double r = estimate_R(w, m, cut);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(estimate_R(w, m, 0.0) == 1.0);
}

TEST_CASE("least-squares slope") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double xi : x) y.push_back(2.0 - 0.7 * xi);
    CHECK(fit_slope(x, y) == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK_THROWS_AS(fit_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("temperedness probe: slopes differ exactly by the beta gap") {
    const DiscreteProblem prob = small_problem(true);
    const SamplePath path = generate_path(2, -130.0, 0.0, 0.01);
    TemperednessOptions opt;
    opt.t_max = 40.0;
    opt.truncation = 80.0;
    const TemperednessResult r = temperedness_probe(path, prob.model, opt);
    REQUIRE(r.times.size() == 41);
    REQUIRE(r.slopes.size() == 3);
    // log(e^{-beta t} R) = log R - beta t, and the least-squares slope is linear in y.
    const double base = fit_slope(r.times, r.log_R);
    for (std::size_t i = 0; i < r.betas.size(); ++i) {
        CHECK(r.slopes[i] == doctest::Approx(base - r.betas[i]).epsilon(1e-12));
    }
    CHECK(r.slopes[2] < 0.0);
    CHECK(r.log_R[0] == doctest::Approx(std::log(estimate_R(path, prob.model, -80.0))).epsilon(1e-14));
    opt.t_max = 100.0;
    CHECK_THROWS_AS(temperedness_probe(path, prob.model, opt), std::out_of_range);
}

TEST_CASE("absorption: zero data and zero forcing stays at zero") {
    const DiscreteProblem prob = small_problem(false);
    TemperedFamilySpec fam;
    fam.radius_0 = 0.0;
    const std::vector<double> taus{-1.0, -2.0, -3.0};
    const SamplePath path = generate_path(1, -200.0, 0.0, 0.01);
    const AbsorptionResult r = absorption_experiment(fam, taus, path, prob, SolveSpec{});
    for (double x : r.uv_norm_sq) CHECK(x == 0.0);
    for (double x : r.uz_norm_sq) CHECK(x == 0.0);
    for (double x : r.integral_bound) CHECK(x == 0.0);
    CHECK(r.absorbed);
    CHECK(r.entered_at == -1.0);
}

TEST_CASE("absorption forgets the initial radius") {
    const DiscreteProblem prob = small_problem(true);
    const SamplePath path = generate_path(4, -30.0, 0.0, 0.01);
    const std::vector<double> taus = taus_down_to(-24.0, 2.0);
    std::vector<double> limits;
    for (double r0 : {1.0, 2.0, 10.0}) {
        TemperedFamilySpec fam;
        fam.radius_0 = r0;
        const AbsorptionResult r = absorption_experiment(fam, taus, path, prob, SolveSpec{});
        CHECK(r.absorbed);
        CHECK(r.R_estimate == 0.0);  // path too short for the R truncation
        limits.push_back(r.limit_value);
    }
    CHECK(std::abs(limits[1] - limits[0]) <= 0.05 * limits[0]);
    CHECK(std::abs(limits[2] - limits[0]) <= 0.05 * limits[0]);
}

TEST_CASE("absorption without forcing decays monotonically in |tau|") {
    const DiscreteProblem prob = small_problem(false);
    const SamplePath path = generate_path(5, -20.0, 0.0, 0.01);
    TemperedFamilySpec fam;
    fam.radius_0 = 3.0;
    const AbsorptionResult r = absorption_experiment(fam, taus_down_to(-16.0, 2.0), path, prob, SolveSpec{});
    REQUIRE(r.monotone_decay_from.has_value());
    CHECK(*r.monotone_decay_from == -2.0);
    CHECK(r.uz_norm_sq.back() < 1e-6 * r.uz_norm_sq.front());
}

TEST_CASE("tails: monotone in k, attained k is monotone in epsilon") {
    const DiscreteProblem prob = small_problem(true);
    const SamplePath path = generate_path(6, -20.0, 0.0, 0.01);
    const std::vector<double> ks{2.0, 5.0, 10.0};
    TemperedFamilySpec fam;
    SolveSpec spec;
    spec.record_every = 10;
    const TailResult r = tail_experiment(1e-3, ks, taus_down_to(-8.0, 2.0), fam, path, prob, spec);
    CHECK(r.nonincreasing_in_k);
    for (const TailSeries& s : r.series) {
        for (std::size_t t = 0; t < s.times.size(); ++t) {
            for (std::size_t k = 1; k < ks.size(); ++k) CHECK(s.tail[k][t] <= s.tail[k - 1][t]);
        }
    }
    const double sigma = prob.model.derived.sigma;
    std::optional<double> prev;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9}) {
        const TailAttainment a = attained_k(r, eps, sigma);
        if (prev) {
            if (a.k) CHECK(*a.k >= *prev);
        }
        if (a.k) {
            prev = a.k;
            CHECK(a.fitted_T.has_value());
        } else {
            CHECK(a.infimum > eps);
        }
    }
    CHECK_THROWS_AS(tail_experiment(1e-3, std::vector<double>{15.0}, taus_down_to(-4.0, 2.0), fam, path, prob, spec),
                    std::invalid_argument);
    CHECK_THROWS_AS(tail_experiment(1e-3, std::vector<double>{5.0, 2.0}, taus_down_to(-4.0, 2.0), fam, path, prob,
                                    spec),
                    std::invalid_argument);
    CHECK_THROWS_AS(tail_experiment(0.0, ks, taus_down_to(-4.0, 2.0), fam, path, prob, spec), std::invalid_argument);
}

TEST_CASE("pullback: equal taus give zero distance; contraction gives a decreasing trend") {
    const SamplePath path = generate_path(7, -20.0, 0.0, 0.01);
    TemperedFamilySpec fam;
    {
        const DiscreteProblem prob = small_problem(true);
        const std::vector<double> same{-3.0, -3.0, -3.0};
        const PullbackResult r = pullback_convergence_experiment(fam, same, path, prob, SolveSpec{});
        for (double d : r.distances) CHECK(d == 0.0);
        CHECK(r.decreasing_trend);
        CHECK_THROWS_AS(pullback_convergence_experiment(fam, std::vector<double>{-1.0, -2.0}, path, prob, SolveSpec{}),
                        std::invalid_argument);
    }
    const DiscreteProblem lin = small_problem(false, Nonlinearity::power({0.0, 3.0, 0.0}));
    const PullbackResult r = pullback_convergence_experiment(fam, taus_down_to(-16.0, 2.0), path, lin, SolveSpec{});
    CHECK(r.decreasing_trend);
    CHECK(r.distances.back() < 1e-2 * r.distances.front());
}

TEST_CASE("product distance is a metric on sampled triples") {
    const Grid g = Grid::make(1, 5.0, 40);
    std::mt19937_64 gen(1);
    std::normal_distribution<double> n;
    auto rnd = [&] {
        Field f(g);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = n(gen);
        return f;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const Field a1 = rnd(), a2 = rnd(), b1 = rnd(), b2 = rnd(), c1 = rnd(), c2 = rnd();
        const double ab = product_distance(a1, a2, b1, b2);
        CHECK(ab == product_distance(b1, b2, a1, a2));
        CHECK(product_distance(a1, a2, c1, c2) <= ab + product_distance(b1, b2, c1, c2) + 1e-12);
    }
}

TEST_CASE("cocycle experiment: trivial splits, misalignment, linear problem") {
    const SamplePath path = generate_path(8, -1.0, 6.0, 0.01);
    const DiscreteProblem lin = small_problem(true, Nonlinearity::power({0.0, 3.0, 0.0}));
    TemperedFamilySpec fam;
    const StateUV s = initial_on_sphere(lin, fam, 0.0, 8);
    const StateUZ x0{s.u, reconstruct_z(s, NoiseSignal(path), lin)};
    const std::vector<CocycleSplit> trivial{{0.0, 1.5}, {2.0, 0.0}};
    const CocycleResult t = cocycle_experiment(trivial, path, x0, lin, SolveSpec{});
    CHECK(t.defects[0] == 0.0);
    CHECK(t.defects[1] == 0.0);
    const std::vector<CocycleSplit> splits{{0.5, 0.5}, {1.25, 2.0}, {3.0, 1.0}};
    const CocycleResult r = cocycle_experiment(splits, path, x0, lin, SolveSpec{});
    CHECK(r.max_defect <= 1e-12);
    CHECK(r.pass);
    const std::vector<CocycleSplit> bad{{0.505, 1.0}};
    CHECK_THROWS_AS(cocycle_experiment(bad, path, x0, lin, SolveSpec{}), std::invalid_argument);
}

TEST_CASE("library mode reference agrees with the quadrature oracle") {
    const Grid g = Grid::make(1, 40.0, 1024);
    PhysicalParams p;
    p.alpha = 1.0;
    p.lambda = 1.0;
    const ModelConfig m = make_model(p, Nonlinearity::power({0.0, 3.0, 0.0}));
    const double mu = -oracle::sine_eigenvalue(g, 20);
    const ModeReference ref{p.alpha, m.derived.delta, m.derived.lambda_prime, mu, 1.0};
    const oracle::Mat2 M{{{-m.derived.delta, 1.0}, {-(m.derived.lambda_prime + mu), -(p.alpha - m.derived.delta)}}};
    const oracle::Vec2 c{1.0, m.derived.delta - p.alpha};
    for (double t : {0.5, 1.0, 3.7, 10.0}) {
        const auto a = ref.at(t, {1.0, -0.5});
        const auto b = oracle::forced_flow(M, c, [](double s) { return std::sin(s); }, {1.0, -0.5}, 0.0, t, 2000);
        CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-10));
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-10));
    }
}

TEST_CASE("mode convergence study reports the scheme orders") {
    const Grid g = Grid::make(1, 40.0, 1024);
    const std::vector<double> dts{1e-2, 5e-3, 2.5e-3};
    const ModeStudy si = mode_convergence_study(g, 1.0, 1.0, 20, 0.0, Scheme::semi_implicit, dts);
    const ModeStudy cn = mode_convergence_study(g, 1.0, 1.0, 20, 1.0, Scheme::crank_nicolson_linear, dts);
    REQUIRE(si.error_orders.size() == 2);
    for (double o : si.error_orders) CHECK(o >= 0.9);
    for (double o : cn.error_orders) CHECK(o >= 1.8);
    for (double o : cn.residual_orders) CHECK(o >= 1.8);
    CHECK_THROWS_AS(mode_convergence_study(Grid::make(2, 1.0, 8), 1.0, 1.0, 1, 0.0, Scheme::semi_implicit, dts),
                    std::invalid_argument);
}

TEST_CASE("reports: informational checks do not fail, json is stable") {
    ExperimentReport rep;
    rep.experiment = "demo";
    rep.config_hash = "0123456789abcdef";
    rep.seeds = {1, 2};
    rep.checks.push_back({"main", true, 0.5});
    rep.checks.push_back({"side", false, -1.0, false});
    CHECK(rep.all_pass());
    const nlohmann::json j = rep.to_json();
    CHECK(j.at("schema_version") == kReportSchemaVersion);
    CHECK(j.at("all_pass") == true);
    CHECK(rep.to_json().dump() == j.dump());
    const std::string txt = rep.to_text();
    CHECK(txt.find("PASS") != std::string::npos);
    CHECK(txt.find("info") != std::string::npos);
    rep.checks.push_back({"hard", false, -0.1});
    CHECK_FALSE(rep.all_pass());
    CHECK(rep.to_text().find("FAIL") != std::string::npos);

    TailResult t;
    t.attained.infimum = INFINITY;
    const std::string dumped = to_json(t).dump();
    CHECK(dumped.find("\"infimum\":\"inf\"") != std::string::npos);
}
