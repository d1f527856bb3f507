#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hb/flow.hpp"

using namespace hb;

namespace {

ModelMetric model(std::vector<int> profile) {
    return ModelMetric(sl2_triple(NilpotentLog::from_matrix(jordan_matrix(profile))), 0.5);
}

// Energy may only rise by summation roundoff once certified descent drops below it.
constexpr double kEnergyRoundoff = 1e-13;

bool monotone(const std::vector<double>& e) {
    for (size_t s = 1; s < e.size(); ++s)
        if (e[s] > e[s - 1] * (1.0 + kEnergyRoundoff)) return false;
    return true;
}

}  // namespace

TEST_CASE("grid construction and seam") {
    CHECK_THROWS_WITH_AS(GridMap(7, 4, 1.0, 2.0, ComplexMatrix::Identity(1, 1), PosDefMetric::identity(1)),
                         doctest::Contains("even"), Error);
    CHECK_THROWS_AS(GridMap(8, 4, 2.0, 1.0, ComplexMatrix::Identity(1, 1), PosDefMetric::identity(1)), Error);
    const auto g = GridMap::from_model(model({3}), 16, 8, 3.0, 6.0);
    CHECK(g.seam_deviation() < 1e-10);
    // The ghost column is the model one period later.
    const auto m = model({3});
    CHECK(relative_error(g.extended(16, 3).matrix(), m.eval({kTwoPi, g.y(3)}).matrix()) < 1e-12);
    CHECK(relative_error(g.extended(-1, 3).matrix(), m.eval({-g.hx(), g.y(3)}).matrix()) < 1e-12);
}

TEST_CASE("constant map has zero tension and energy") {
    const GridMap g(8, 6, 1.0, 3.0, ComplexMatrix::Identity(2, 2), PosDefMetric::identity(2));
    CHECK(tension_sup(g, TensionKind::Geodesic) == 0.0);
    CHECK(tension_sup(g, TensionKind::Centered) == 0.0);
    CHECK(discrete_energy(g) == 0.0);
    CHECK(gradient_bound_check(g).C == 0.0);
    const auto r = relax(g);
    CHECK(r.converged);
    CHECK(r.sweeps == 0);
}

TEST_CASE("geodesic in y is harmonic") {
    ComplexMatrix a(2, 2);
    a << 0.7, Complex(0.2, -0.3), Complex(0.2, 0.3), -0.1;
    const double h_ref = 0.25;
    double prev = 0.0;
    for (int ny : {8, 16, 32}) {
        GridMap g(8, ny, 1.0, 3.0, ComplexMatrix::Identity(2, 2), PosDefMetric::identity(2));
        for (int k = 0; k <= ny; ++k)
            for (int i = 0; i < 8; ++i) g.at(i, k) = hermitian_exp(HermitianMatrix(a * g.y(k)));
        CHECK(tension_sup(g, TensionKind::Geodesic) < 1e-11);
        const double c = tension_sup(g, TensionKind::Centered);
        CHECK(c < 1.0 * std::pow(g.hy() / h_ref, 2));
        if (prev > 0.0) CHECK(std::log2(prev / c) > 1.8);
        prev = c;
    }
}

TEST_CASE("centered tension of model samples refines at second order") {
    const auto m = model({2});
    double r[3];
    int k = 0;
    for (int n : {16, 32, 64}) r[k++] = tension_sup(GridMap::from_model(m, n, n, kTwoPi, 2 * kTwoPi), TensionKind::Centered);
    CHECK(std::log2(r[0] / r[1]) >= 1.8);
    CHECK(std::log2(r[1] / r[2]) >= 1.8);
}

TEST_CASE("relaxing the model lands within O(h^2) of it") {
    const auto m = model({2});
    double err[2];
    int k = 0;
    for (int n : {16, 32}) {
        const auto g = GridMap::from_model(m, n, n, 5.0, 5.0 + kTwoPi);
        const auto r = relax(g);
        CHECK(r.converged);
        CHECK(r.residual < 1e-8);
        CHECK(monotone(r.energy));
        CHECK(r.max_seam_deviation < 1e-10);
        err[k++] = sup_dist(r.map, g);
    }
    CHECK(err[1] < 1e-3);
    CHECK(std::log2(err[0] / err[1]) > 1.8);
}

TEST_CASE("perturbed runs converge to the same limit") {
    for (int b : {2, 3}) {
        const auto m = model({b});
        const auto g = GridMap::from_model(m, 24, 24, 5.0, 5.0 + kTwoPi);
        const auto ref = relax(g);
        REQUIRE(ref.converged);
        for (unsigned long long seed : {1ull, 2ull, 3ull}) {
            const auto start = perturb(g, 0.1, seed);
            CHECK(sup_dist(start, g) <= 0.1 + 1e-12);
            CHECK(sup_dist(start, g) > 0.05);
            const auto r = relax(start);
            CAPTURE(b);
            CAPTURE(seed);
            CHECK(r.converged);
            CHECK(monotone(r.energy));
            CHECK(r.energy.back() < r.energy.front());
            CHECK(r.max_seam_deviation < 1e-10);
            CHECK(sup_dist(r.map, ref.map) < 1e-6);
        }
    }
}

TEST_CASE("perturbation is reproducible per seed") {
    const auto g = GridMap::from_model(model({2}), 8, 6, 5.0, 8.0);
    const auto p1 = perturb(g, 0.1, 9), p2 = perturb(g, 0.1, 9);
    for (int k = 0; k <= 6; ++k)
        for (int i = 0; i < 8; ++i) CHECK(p1.at(i, k).matrix() == p2.at(i, k).matrix());
    CHECK(sup_dist(perturb(g, 0.1, 9), perturb(g, 0.1, 10)) > 0.0);
}

TEST_CASE("scalar case relaxes to the linear interpolant") {
    const double a = 0.3, b = -1.7, y0 = 2.0, y1 = 5.0;
    GridMap g(12, 10, y0, y1, ComplexMatrix::Identity(1, 1), PosDefMetric::identity(1));
    for (int i = 0; i < 12; ++i) {
        g.at(i, 0) = PosDefMetric(ComplexMatrix::Constant(1, 1, std::exp(a)));
        g.at(i, 10) = PosDefMetric(ComplexMatrix::Constant(1, 1, std::exp(b)));
    }
    const auto r = relax(perturb(g, 1.0, 4));
    REQUIRE(r.converged);
    CHECK(monotone(r.energy));
    double worst = 0.0;
    for (int k = 0; k <= 10; ++k)
        for (int i = 0; i < 12; ++i) {
            const double expect = a + (b - a) * (g.y(k) - y0) / (y1 - y0);
            worst = std::max(worst, std::abs(std::log(r.map.at(i, k).matrix()(0, 0).real()) - expect));
        }
    CHECK(worst < 1e-8);
}

TEST_CASE("gradient bound on model runs") {
    const auto m = model({2});
    const auto g = GridMap::from_model(m, 24, 24, 5.0, 5.0 + kTwoPi);
    const auto r = relax(perturb(g, 0.1, 5));
    const auto gb = gradient_bound_check(r.map);
    CHECK(gb.finite);
    CHECK(gb.decreasing_in_y);
    // Flat density of the conformal b = 2 model is 4/y², largest on the first interior row.
    CHECK(gb.C == doctest::Approx(4.0 / std::pow(g.y(1), 2)).epsilon(0.01));
}

TEST_CASE("dist csv dump") {
    const auto g = GridMap::from_model(model({2}), 4, 2, 5.0, 6.0);
    std::ostringstream os;
    write_dist_csv(os, g, g);
    const std::string s = os.str();
    CHECK(s.rfind("i,k,x,y,dist\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 4 * 3);
}
