#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hb/model.hpp"

using namespace hb;

namespace {

constexpr double kPi = kTwoPi / 2.0;

ModelConvention cylinder() {
    ModelConvention c;
    c.radial = ModelConvention::Radial::Cylinder;
    return c;
}

ModelMetric model(std::vector<int> profile, ModelConvention conv = {}, double alpha = 0.5) {
    return ModelMetric(sl2_triple(NilpotentLog::from_matrix(jordan_matrix(profile))), alpha, conv);
}

// N conjugated by a fixed non-unitary matrix, so the flat and adapted frames differ.
ModelMetric skewed_model(std::vector<int> profile, std::mt19937_64& rng) {
    const ComplexMatrix j = jordan_matrix(profile);
    const int n = static_cast<int>(j.rows());
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    ComplexMatrix g = ComplexMatrix::Identity(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) += Complex(u(rng), u(rng));
    return ModelMetric(sl2_triple(NilpotentLog::from_matrix(g * j * g.inverse())), 0.5);
}

std::vector<std::vector<int>> profiles_up_to(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int left, int cap) -> void {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int b = std::min(left, cap); b >= 1; --b) {
            cur.push_back(b);
            self(self, left - b, b);
            cur.pop_back();
        }
    };
    for (int k = 1; k <= n; ++k) rec(rec, k, k);
    return out;
}

}  // namespace

TEST_CASE("trivial block gives the constant metric") {
    const auto m = model({1});
    CHECK(std::abs(m.eval({1.3, 4.0}).matrix()(0, 0) - 1.0) < 1e-15);
    CHECK(energy_density(m, {0.2, 7.0}) == doctest::Approx(0.0));
    CHECK(total_energy(m, 10.0).numeric == doctest::Approx(0.0));
}

TEST_CASE("rank two closed forms") {
    const double e = std::exp(1.0);
    const auto cyl = model({2}, cylinder());
    const ComplexMatrix h0 = cyl.eval({0.0, e}).matrix();
    CHECK(std::abs(h0(0, 0) - e) < 1e-14);
    CHECK(std::abs(h0(1, 1) - 1.0 / e) < 1e-14);
    CHECK(std::abs(h0(0, 1)) < 1e-14);

    // exp(x̃N) diag(y, 1/y) exp(x̃N)^T with x̃ = x/2π.
    for (double x : {0.7, -3.0, 11.0}) {
        const double y = 3.5, xt = x / kTwoPi;
        const ComplexMatrix h = cyl.eval({x, y}).matrix();
        CHECK(std::abs(h(0, 0) - (y + xt * xt / y)) < 1e-12);
        CHECK(std::abs(h(0, 1) - xt / y) < 1e-12);
        CHECK(std::abs(h(1, 0) - xt / y) < 1e-12);
        CHECK(std::abs(h(1, 1) - 1.0 / y) < 1e-12);
    }

    const auto conf = model({2});
    const ComplexMatrix hc = conf.eval({0.0, 5.0}).matrix();
    CHECK(std::abs(hc(0, 0) - 5.0 / kTwoPi) < 1e-14);
    CHECK(std::abs(hc(1, 1) - kTwoPi / 5.0) < 1e-14);
}

TEST_CASE("points outside the chart are refused") {
    const auto m = model({2}, {}, 0.5);
    CHECK_THROWS_WITH_AS(m.eval({0.0, 0.5}), doctest::Contains("outside model chart"), Error);
    CHECK_THROWS_AS(m.eval({0.0, std::log(2.0)}), Error);
    CHECK_NOTHROW(m.eval({0.0, std::log(2.0) + 1e-9}));
    CHECK_THROWS_AS(ModelMetric(model({2}).sl2(), 1.0), Error);
}

TEST_CASE("deck transformation acts by exp N") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-10.0, 10.0), uy(1.0, 60.0);
    std::vector<PuncturedPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({ux(rng), uy(rng)});
    CHECK(check_equivariance(model({1}), pts).max_rel_deviation == 0.0);
    for (const auto& prof : profiles_up_to(5)) {
        CAPTURE(prof.size());
        CHECK(check_equivariance(model(prof), pts).max_rel_deviation < 1e-12);
        CHECK(check_equivariance(model(prof, cylinder()), pts).max_rel_deviation < 1e-12);
    }
    for (const auto& prof : {std::vector<int>{2}, {3}, {2, 1}}) {
        CHECK(check_equivariance(skewed_model(prof, rng), pts).max_rel_deviation < 1e-12);
    }
}

TEST_CASE("energy density closed forms") {
    const double fp2 = 4.0 * kPi * kPi;
    CHECK(energy_density(model({2}, cylinder()), {1.1, 10.0}) == doctest::Approx((2.0 / fp2 + 2.0) / 100.0).epsilon(1e-12));
    CHECK(energy_density(model({3}, cylinder()), {-0.4, 10.0}) == doctest::Approx((4.0 / fp2 + 8.0) / 100.0).epsilon(1e-12));
    CHECK(energy_density(model({2}), {1.1, 10.0}) == doctest::Approx(4.0 / 100.0).epsilon(1e-12));
    CHECK(energy_density(model({3}), {-0.4, 10.0}) == doctest::Approx(16.0 / 100.0).epsilon(1e-12));
    CHECK(energy_density(model({4}), {0.3, 10.0}) == doctest::Approx(40.0 / 100.0).epsilon(1e-12));
    CHECK(energy_density(model({4, 2, 1}), {2.0, 3.0}) ==
          doctest::Approx(energy_density_coefficient(std::vector<int>{4, 2, 1}, {}) / 9.0).epsilon(1e-12));
}

TEST_CASE("analytic log-derivatives agree with finite differences of eval") {
    std::mt19937_64 rng(11);
    const auto m = skewed_model({3, 1}, rng);
    const PuncturedPoint p{0.9, 2.5};
    const double h = 1e-5;
    const ComplexMatrix hinv = m.eval(p).inverse();
    const ComplexMatrix fdx = (m.eval({p.x + h, p.y}).matrix() - m.eval({p.x - h, p.y}).matrix()) / (2 * h);
    const ComplexMatrix fdy = (m.eval({p.x, p.y + h}).matrix() - m.eval({p.x, p.y - h}).matrix()) / (2 * h);
    const ModelJet j = m.jet(p);
    CHECK(relative_error(j.Hx, fdx) < 1e-8);
    CHECK(relative_error(j.Hy, fdy) < 1e-8);
    CHECK(relative_error(j.log_dx, hinv * fdx) < 1e-8);
    CHECK(relative_error(j.log_dy, hinv * fdy) < 1e-8);
    const double fd_density = ((hinv * fdx * hinv * fdx).trace() + (hinv * fdy * hinv * fdy).trace()).real();
    CHECK(energy_density(m, p) == doctest::Approx(fd_density).epsilon(1e-7));
}

TEST_CASE("energy density does not depend on x") {
    for (const auto& prof : profiles_up_to(5)) {
        const auto m = model(prof);
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 64; ++i) {
            const double e = energy_density(m, {-20.0 + 0.7 * i, 6.0});
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        CHECK(hi - lo < 1e-12);
    }
}

TEST_CASE("total energy is finite and matches the closed form") {
    const double fp2 = 4.0 * kPi * kPi;
    CHECK(total_energy(model({2}, cylinder()), 10.0).closed_form == doctest::Approx(kTwoPi * (2.0 / fp2 + 2.0) / 10.0));
    CHECK(total_energy(model({3}, cylinder()), 10.0).closed_form == doctest::Approx(kTwoPi * (4.0 / fp2 + 8.0) / 10.0));
    for (int b : {2, 3, 4})
        for (double y0 : {5.0, 10.0, 20.0})
            for (const auto& conv : {ModelConvention{}, cylinder()}) {
                const auto r = total_energy(model({b}, conv), y0);
                CAPTURE(b);
                CAPTURE(y0);
                CHECK(std::isfinite(r.numeric));
                CHECK(r.rel_err < 5e-3);
                CHECK(r.rel_err < 1e-9);
            }
}

TEST_CASE("ascending exponents give divergent energy") {
    ModelConvention asc;
    asc.descending = false;
    const auto m = model({2}, asc);
    CHECK(energy_density(m, {0.0, 200.0}) > 3.9 * energy_density(m, {0.0, 100.0}));
    CHECK_THROWS_WITH_AS(total_energy(m, 10.0), doctest::Contains("diverged"), Error);
    double prev = 0.0;
    for (double y1 : {1e2, 1e3, 1e4}) {
        const double e = energy_on_interval(m, 10.0, y1);
        CHECK(e > 100.0 * prev);
        prev = e;
    }
}

TEST_CASE("metric stays positive definite far into the cusp") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, kTwoPi), ulog(std::log(1.0), std::log(1e6));
    const std::vector<std::vector<int>> profs{{2}, {3}, {2, 1}, {2, 2}, {3, 1}};
    int ok = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto m = model(profs[i % profs.size()], i % 2 ? ModelConvention{} : cylinder(), 0.3);
        const PuncturedPoint p{ux(rng), std::max(1.3, std::exp(ulog(rng)))};
        try {
            (void)m.eval(p);
            ++ok;
        } catch (const Error&) {
        }
    }
    CHECK(ok == 10000);
    CHECK_NOTHROW(model({3}).eval({1.0, 1e6}));
}

TEST_CASE("harmonic map residual converges at second order") {
    for (int b : {2, 3}) {
        const auto m = model({b});
        double r[3];
        int k = 0;
        for (int n : {32, 64, 128}) r[k++] = harmonicity_residual(m, {n, n});
        const double order1 = std::log2(r[0] / r[1]), order2 = std::log2(r[1] / r[2]);
        CAPTURE(b);
        CAPTURE(r[2]);
        CHECK(order1 >= 1.8);
        CHECK(order2 >= 1.8);
    }
    CHECK(harmonicity_residual(model({1}), {16, 16}) == doctest::Approx(0.0));
}

TEST_CASE("cylinder convention is not harmonic") {
    // Its tension is (1/4π² - 1) y^-2 diag(1,-1), so the residual stalls near that value.
    const auto m = model({2}, cylinder());
    const double r64 = harmonicity_residual(m, {64, 64}), r128 = harmonicity_residual(m, {128, 128});
    CHECK(std::abs(r128 - r64) < 0.05 * r128);
    const double y = kTwoPi + kTwoPi / 128.0;
    const double expected = std::sqrt(2.0) * (1.0 - 1.0 / (4.0 * kPi * kPi)) / (y * y);
    CHECK(r128 == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("norm profile") {
    const auto cyl3 = norm_profile(model({3}, cylinder()), 10.0);
    REQUIRE(cyl3.size() == 3);
    CHECK(cyl3[0].first == -2);
    CHECK(cyl3[0].second == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(cyl3[1].first == 0);
    CHECK(cyl3[1].second == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cyl3[2].first == 2);
    CHECK(cyl3[2].second == doctest::Approx(0.01).epsilon(1e-14));
    const auto cyl2 = norm_profile(model({2}, cylinder()), 100.0);
    CHECK(cyl2[0].second == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(cyl2[1].second == doctest::Approx(0.01).epsilon(1e-14));
    // Conformal: c_j (y/2π)^{-j} with c = (1/2, 1, 2) for b = 3 and c = (1, 1) for b = 2.
    const auto c3 = norm_profile(model({3, 2}), 30.0);
    const double q = 30.0 / kTwoPi;
    const double expect[] = {0.5 * q * q, 1.0, 2.0 / (q * q), 1.0 / q, q};
    const int labels[] = {-2, 0, 2, -1, 1};
    for (int k = 0; k < 5; ++k) {
        CHECK(c3[k].first == labels[k]);
        CHECK(c3[k].second == doctest::Approx(labels[k] == -1 ? q : labels[k] == 1 ? 1.0 / q : expect[k]).epsilon(1e-13));
    }
}
