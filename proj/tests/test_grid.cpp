#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"
#include "rda/grid.hpp"

using namespace rda;

namespace {

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = d(gen);
    return f;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("grid construction") {
    const Grid g = Grid::make(2, 5.0, 9);
    CHECK(g.spacing() == 1.0);
    CHECK(g.size() == 81);
    CHECK(g.cell_volume() == 1.0);
    CHECK(g.coord(0) == -4.0);
    CHECK(g.coord(8) == 4.0);
    CHECK_THROWS_AS(Grid::make(4, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(1, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(Grid::make(1, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Field(g, std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("laplacian of zero is zero") {
    const Grid g = Grid::make(3, 2.0, 7);
    const Field z = laplacian(Field(g));
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);
}

TEST_CASE("discrete sine modes are eigenvectors") {
    const Grid g = Grid::make(1, 3.0, 200);
    for (int k : {1, 2, 17, 100, 200}) {
        const Field f = oracle::sine_mode(g, k);
        const Field lf = laplacian(f);
        const double mu = oracle::sine_eigenvalue(g, k);
        Field r(g);
        for (std::size_t i = 0; i < f.size(); ++i) r[i] = lf[i] - mu * f[i];
        CHECK(norm_l2(r) / norm_l2(f) <= 1e-12 * std::max(1.0, std::abs(mu)));
    }
    // Largest eigenvalue magnitude reported by the grid is mode n.
    CHECK(rel(g.laplacian_spectral_radius(), -oracle::sine_eigenvalue(g, g.n)) <= 1e-14);
}

TEST_CASE("quadratic is differentiated exactly away from the boundary") {
    const Grid g = Grid::make(1, 2.0, 99);
    Field f(g);
    for (int i = 0; i < g.n; ++i) f[static_cast<std::size_t>(i)] = g.coord(i) * g.coord(i);
    const Field lf = laplacian(f);
    for (int i = 1; i + 1 < g.n; ++i) CHECK(lf[static_cast<std::size_t>(i)] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("laplacian is symmetric, negative semidefinite, and pairs with the gradient") {
    for (const Grid& g : {Grid::make(1, 4.0, 50), Grid::make(2, 1.0, 13), Grid::make(3, 2.0, 6)}) {
        for (unsigned s = 0; s < 5; ++s) {
            const Field f = random_field(g, 2 * s + 1);
            const Field h = random_field(g, 2 * s + 2);
            const double a = inner(laplacian(f), h);
            const double b = inner(f, laplacian(h));
            CHECK(rel(a, b) <= 1e-12);
            CHECK(inner(laplacian(f), f) <= 0.0);
            CHECK(rel(-inner(laplacian(f), f), grad_norm_sq(f)) <= 1e-12);
            CHECK(rel(-inner(laplacian(f), h), grad_inner(f, h)) <= 1e-12);
            CHECK(rel(norm_h1(f) * norm_h1(f), inner(f, f) + grad_norm_sq(f)) <= 1e-14);
        }
    }
}

TEST_CASE("inner product examples and properties") {
    // h = 0.5 with three interior nodes, f = (1, 2, 0).
    const Grid g = Grid::make(1, 1.0, 3);
    REQUIRE(g.spacing() == 0.5);
    const Field f(g, {1.0, 2.0, 0.0});
    CHECK(norm_l2(f) * norm_l2(f) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(inner(Field(g), Field(g)) == 0.0);

    const Grid g2 = Grid::make(2, 3.0, 20);
    for (unsigned s = 0; s < 10; ++s) {
        const Field a = random_field(g2, 100 + s);
        const Field b = random_field(g2, 200 + s);
        CHECK(inner(a, a) > 0.0);
        CHECK(std::abs(inner(a, b)) <= norm_l2(a) * norm_l2(b));
    }
    CHECK_THROWS_AS(inner(Field(g), Field(g2)), std::invalid_argument);
}

TEST_CASE("cutoff plateaus, midpoint and derivative bound") {
    CHECK(cutoff_rho(0.5) == 0.0);
    CHECK(cutoff_rho(-0.99) == 0.0);
    CHECK(cutoff_rho(1.0) == 0.0);
    CHECK(cutoff_rho(4.0) == 1.0);
    CHECK(cutoff_rho(-2.0) == 1.0);
    CHECK(cutoff_rho(1.5) == 0.5);
    double worst = 0.0;
    double lo = 1.0, hi = 0.0;
    for (int i = -400000; i <= 400000; ++i) {
        const double s = i * 1e-5;
        worst = std::max(worst, std::abs(cutoff_rho_derivative(s)));
        lo = std::min(lo, cutoff_rho(s));
        hi = std::max(hi, cutoff_rho(s));
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
    CHECK(worst <= kCutoffDerivativeBound + 1e-9);
    CHECK(worst >= 1.5 - 1e-6);
    // The closed-form derivative agrees with the function.
    for (double s : {1.1, 1.37, 1.5, 1.9, -1.25}) {
        const double e = 1e-6;
        CHECK(cutoff_rho_derivative(s) ==
              doctest::Approx((cutoff_rho(s + e) - cutoff_rho(s - e)) / (2 * e)).epsilon(1e-6));
    }
}

TEST_CASE("tail of the constant field matches direct summation") {
    const Grid g = Grid::make(1, 40.0, 1024);
    Field one(g);
    for (std::size_t i = 0; i < one.size(); ++i) one[i] = 1.0;
    for (double k : {1.0, 5.0, 12.5, 20.0}) {
        const TailNorms t = tail_weighted_norms(one, Field(g), k);
        double direct = 0.0;
        for (int i = 0; i < g.n; ++i) {
            const double x = -g.half_width + (i + 1) * g.spacing();
            const double s = x * x / (k * k);
            double w = 0.0;
            if (s >= 2.0) w = 1.0;
            else if (s > 1.0) w = (s - 1.0) * (s - 1.0) * (3.0 - 2.0 * (s - 1.0));
            direct += w * g.spacing();
        }
        CHECK(std::abs(t.u_l2_sq - direct) <= 1e-14 * direct);
        CHECK(t.v_l2_sq == 0.0);
        CHECK_FALSE(t.truncated);
    }
}

TEST_CASE("tail functionals: support, monotonicity and truncation flag") {
    const Grid g = Grid::make(1, 20.0, 400);
    Field inside(g);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        inside[static_cast<std::size_t>(i)] = std::abs(x) < 3.0 ? std::cos(x) + 2.0 : 0.0;
    }
    const TailNorms t = tail_weighted_norms(inside, inside, 4.0);
    CHECK(t.u_l2_sq == 0.0);
    CHECK(t.grad_u_sq == 0.0);
    CHECK(t.v_l2_sq == 0.0);

    const Field f = random_field(g, 77);
    double pu = INFINITY, pg = INFINITY, pv = INFINITY;
    for (double k : {0.5, 1.0, 2.0, 4.0, 8.0, 13.0}) {
        const TailNorms r = tail_weighted_norms(f, f, k);
        CHECK(r.u_l2_sq <= pu);
        CHECK(r.grad_u_sq <= pg);
        CHECK(r.v_l2_sq <= pv);
        pu = r.u_l2_sq;
        pg = r.grad_u_sq;
        pv = r.v_l2_sq;
    }
    // Far-out weight vanishes on the whole box and the result says so.
    const TailNorms big = tail_weighted_norms(f, f, 25.0);
    CHECK(big.truncated);
    CHECK(big.u_l2_sq == 0.0);
    CHECK(tail_weighted_norms(f, f, 15.0).truncated);
    CHECK_FALSE(tail_weighted_norms(f, f, 14.0).truncated);
    CHECK_THROWS_AS(tail_weights(g, 0.0), std::invalid_argument);
}

TEST_CASE("small-k tails recover the full norms") {
    const Grid g = Grid::make(2, 4.0, 24);  // even n: no node at the origin
    const Field f = random_field(g, 5);
    const TailNorms t = tail_weighted_norms(f, f, 1e-3);
    CHECK(rel(t.u_l2_sq, inner(f, f)) <= 1e-14);
    CHECK(rel(t.grad_u_sq, grad_norm_sq(f)) <= 1e-14);
}

TEST_CASE("field csv header and rows") {
    const Grid g = Grid::make(2, 1.0, 3);
    Field f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(i);
    std::ostringstream os;
    write_field_csv(os, f, "u", "00000000000000ff");
    const std::string s = os.str();
    CHECK(s.rfind("# config_hash=00000000000000ff\n", 0) == 0);
    CHECK(s.find("x,y,value\n") != std::string::npos);
    CHECK(s.find("\"dim\":2") != std::string::npos);
    CHECK(s.find("0.5,0.5,8\n") != std::string::npos);
}
