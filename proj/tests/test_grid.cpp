#include "otd/grid.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

using namespace otd;

TEST_CASE("grid spacing and node layout") {
    Grid g = build_grid(-1.5, 1.5, 4);
    CHECK(g.h(0) == doctest::Approx(1.0));
    CHECK(g.x(0) == doctest::Approx(-1.5));
    CHECK(g.x(1) == doctest::Approx(-0.5));
    CHECK(g.x(2) == doctest::Approx(0.5));
    CHECK(g.x(3) == doctest::Approx(1.5));

    Grid fine = build_grid(-1.5, 1.5, 301);
    CHECK(fine.h(0) == doctest::Approx(0.01));
}

TEST_CASE("2d boundary enumeration") {
    Grid g = build_grid(2, {-1.0, -1.0}, {1.0, 1.0}, {3, 3});
    CHECK(g.n_total() == 9);
    CHECK(g.n_boundary() == 8);
    CHECK(g.is_boundary(g.node_id(0, 1)));
    CHECK(!g.is_boundary(g.node_id(1, 1)));
}

TEST_CASE("grid rejects bad input") {
    CHECK_THROWS_AS(build_grid(1.0, -1.0, 10), GridError);
    CHECK_THROWS_AS(build_grid(-1.0, 1.0, 2), GridError);
    CHECK_THROWS_AS(build_grid(
                        1, {std::nan(""), 0.0}, {1.0, 0.0}, {5, 1}),
                    GridError);
}

TEST_CASE("integrate constant and grad constant") {
    Grid g = build_grid(-1.5, 1.5, 31);
    ScalarField one(g);
    for (auto& v : one.values) v = 1.0;
    CHECK(integrate(one) == doctest::Approx(3.0).epsilon(1e-14));
    EdgeField gr = grad(one);
    for (double v : gr.comp[0]) CHECK(v == 0.0);
}

TEST_CASE("grad/div adjointness, 1d and 2d") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    auto check = [&](const Grid& g) {
        ScalarField u(g);
        for (auto& v : u.values) v = unif(rng);
        EdgeField v(g);
        for (int a = 0; a < g.dim(); ++a)
            for (auto& x : v.comp[a]) x = unif(rng);
        // v.n = 0 holds by the Neumann closure of div (no boundary fluxes)
        const double lhs = inner(grad(u), v);
        const double rhs = -inner(u, div(v));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    };
    Grid g1 = build_grid(-1.5, 1.5, 17);
    Grid g2 = build_grid(2, {-1.0, -0.5}, {1.0, 1.5}, {9, 13});
    for (int rep = 0; rep < 5; ++rep) {
        check(g1);
        check(g2);
    }
}

TEST_CASE("antisymmetric source has zero mean without correction") {
    Grid g = build_grid(-1.5, 1.5, 301);
    SourceData f = make_source(
        g, {{{-1.0, 0.0}, {0.0, 0.0}, 1.0}, {{0.0, 0.0}, {1.0, 0.0}, -1.0}});
    CHECK(f.mean_correction == 0.0);
    CHECK(std::abs(integrate(f.field)) <= 1e-14 * 3.0);
    CHECK(f.support_lo[0] == doctest::Approx(-1.0));
    CHECK(f.support_hi[0] == doctest::Approx(1.0));
}

TEST_CASE("unbalanced source rejected by default, corrected on request") {
    Grid g = build_grid(-1.5, 1.5, 301);
    std::vector<SourceBox> boxes = {{{-1.0, 0.0}, {0.0, 0.0}, 1.0}};
    CHECK_THROWS_AS(make_source(g, boxes), GridError);

    SourceData f = make_source(g, boxes, true);
    CHECK(f.mean_correction != 0.0);
    CHECK(std::abs(integrate(f.field)) <= 1e-13);
}

TEST_CASE("zero source is valid") {
    Grid g = build_grid(-1.5, 1.5, 31);
    SourceData f = make_source(g, {});
    CHECK(integrate(f.field) == 0.0);
    CHECK(max_abs(f.field) == 0.0);
}

TEST_CASE("support touching the boundary is rejected") {
    Grid g = build_grid(-1.0, 1.0, 31);
    CHECK_THROWS_AS(
        make_source(g, {{{-1.0, 0.0}, {0.0, 0.0}, 1.0},
                        {{0.0, 0.0}, {1.0, 0.0}, -1.0}}),
        GridError);
}

TEST_CASE("field csv round trips metadata and values") {
    Grid g = build_grid(-1.0, 1.0, 5);
    ScalarField u(g, [](double x, double) { return x * x; });
    std::ostringstream os;
    write_field_csv(os, u);
    const std::string s = os.str();
    CHECK(s.find("# dim=1") != std::string::npos);
    CHECK(s.find("x,value") != std::string::npos);
    CHECK(s.find("-1,1") != std::string::npos);
}
