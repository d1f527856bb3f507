#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hb/monodromy.hpp"

using namespace hb;

namespace {

void partitions(int n, int max_part, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (n == 0) {
        out.push_back(cur);
        return;
    }
    for (int p = std::min(n, max_part); p >= 1; --p) {
        cur.push_back(p);
        partitions(n - p, p, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> all_profiles(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    partitions(n, n, cur, out);
    return out;
}

// Integer matrix with determinant one; its inverse is integral too.
ComplexMatrix unimodular(std::mt19937_64& rng, int n) {
    ComplexMatrix g = ComplexMatrix::Identity(n, n);
    std::uniform_int_distribution<int> idx(0, n - 1), mult(-2, 2);
    for (int step = 0; step < 3 * n; ++step) {
        int i = idx(rng), j = idx(rng);
        if (i == j) continue;
        ComplexMatrix e = ComplexMatrix::Identity(n, n);
        e(i, j) = mult(rng);
        g = g * e;
    }
    return g;
}

// g J g^-1 evaluated in rational arithmetic.
ComplexMatrix conjugate(const ComplexMatrix& g, const ComplexMatrix& j) {
    RationalMatrix rg = to_rational(g).value();
    return to_complex(rg * to_rational(j).value() * inverse(rg));
}

RationalMatrix exact_exp(const RationalMatrix& n) {
    RationalMatrix acc = RationalMatrix::identity(n.rows()), term = acc;
    for (int k = 1; k <= n.rows(); ++k) {
        term = term * n * (Rational(1) / Rational(k));
        acc = acc + term;
    }
    return acc;
}

ComplexMatrix E(int n, int i, int j) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    m(i, j) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("log_unipotent examples") {
    CHECK(log_unipotent(UnipotentMonodromy(ComplexMatrix::Identity(3, 3))).N.norm() == 0.0);

    ComplexMatrix g2 = ComplexMatrix::Identity(2, 2) + E(2, 0, 1);
    NilpotentLog n2 = log_unipotent(UnipotentMonodromy(g2));
    CHECK(n2.exact.has_value());
    CHECK((n2.N - E(2, 0, 1)).norm() == 0.0);

    ComplexMatrix g3 = ComplexMatrix::Identity(3, 3) + E(3, 0, 1) + E(3, 1, 2);
    NilpotentLog n3 = log_unipotent(UnipotentMonodromy(g3));
    CHECK((n3.N - (E(3, 0, 1) + E(3, 1, 2) - 0.5 * E(3, 0, 2))).norm() == 0.0);
    CHECK(relative_error(matexp(n3.N), g3) < 1e-15);
}

TEST_CASE("non-unipotent input is refused") {
    ComplexMatrix g = ComplexMatrix::Identity(2, 2) * 2.0;
    CHECK_THROWS_WITH(UnipotentMonodromy{g}, "monodromy not unipotent");
    ComplexMatrix h = ComplexMatrix::Identity(2, 2);
    h(0, 1) = Complex(std::sqrt(2.0), 0.1);
    h(1, 0) = 0.3;
    CHECK_THROWS_WITH(UnipotentMonodromy{h}, "monodromy not unipotent");
}

TEST_CASE("exp(log gamma) = gamma, exact and floating point") {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 5; ++n) {
        for (const auto& prof : all_profiles(n)) {
            ComplexMatrix g = unimodular(rng, n);
            ComplexMatrix gamma = conjugate(g, to_complex(exact_exp(to_rational(jordan_matrix(prof)).value())));
            // exact path: gamma has rational entries
            auto exact = to_rational(gamma);
            if (!exact) continue;
            NilpotentLog nl = log_unipotent(UnipotentMonodromy(gamma));
            REQUIRE(nl.exact.has_value());
            CHECK(exact_exp(*nl.exact) == *exact);
        }
    }
    // irrational conjugation forces the floating-point path
    ComplexMatrix g(3, 3);
    g << 1.0, std::sqrt(2.0), 0.0, 0.0, 1.0, std::sqrt(3.0), Complex(0.0, 0.7), 0.0, 1.0;
    ComplexMatrix gamma = g * matexp(jordan_matrix({3})) * g.inverse();
    NilpotentLog nl = log_unipotent(UnipotentMonodromy(gamma));
    CHECK_FALSE(nl.exact.has_value());
    CHECK(relative_error(matexp(nl.N), gamma) < 1e-10);
}

TEST_CASE("jordan_profile examples") {
    CHECK(jordan_profile(NilpotentLog::from_matrix(ComplexMatrix::Zero(3, 3))) == std::vector<int>{1, 1, 1});
    CHECK(jordan_profile(NilpotentLog::from_matrix(jordan_matrix({3}))) == std::vector<int>{3});
    CHECK(jordan_profile(NilpotentLog::from_matrix(E(3, 0, 1))) == std::vector<int>{2, 1});
    CHECK_THROWS(NilpotentLog::from_matrix(ComplexMatrix::Identity(2, 2)));
}

TEST_CASE("sl2_triple examples") {
    Sl2Data s2 = sl2_triple(NilpotentLog::from_matrix(E(2, 0, 1)));
    ComplexMatrix h0(2, 2);
    h0 << 1, 0, 0, -1;
    CHECK((s2.H0 - h0).norm() == 0.0);
    CHECK((s2.Nminus - E(2, 1, 0)).norm() == 0.0);
    CHECK(s2.labels == std::vector<int>{-1, 1});
    CHECK((s2.basis - ComplexMatrix::Identity(2, 2)).norm() == 0.0);

    Sl2Data s3 = sl2_triple(NilpotentLog::from_matrix(jordan_matrix({3})));
    ComplexMatrix d(3, 3);
    d << 2, 0, 0, 0, 0, 0, 0, 0, -2;
    CHECK((s3.H0_adapted - d).norm() == 0.0);
    CHECK(s3.labels == std::vector<int>{-2, 0, 2});
    // N- e_{-2} = 2 e_0, N- e_0 = 2 e_2
    CHECK(s3.Nminus_adapted(1, 0) == Complex(2.0));
    CHECK(s3.Nminus_adapted(2, 1) == Complex(2.0));
    CHECK((s3.Y + s3.H0).norm() == 0.0);

    Sl2Data s0 = sl2_triple(NilpotentLog::from_matrix(ComplexMatrix::Zero(2, 2)));
    CHECK(s0.H0.norm() == 0.0);
    CHECK(s0.Nminus.norm() == 0.0);
}

TEST_CASE("bracket identities exact for every profile up to n = 6") {
    std::mt19937_64 rng(12);
    for (int n = 1; n <= 6; ++n) {
        for (const auto& prof : all_profiles(n)) {
            ComplexMatrix g = unimodular(rng, n);
            NilpotentLog nl = NilpotentLog::from_matrix(conjugate(g, jordan_matrix(prof)));
            REQUIRE(nl.exact.has_value());
            CHECK(jordan_profile(nl) == prof);
            Sl2Data s = sl2_triple(nl);
            BracketReport br = check_brackets(s);
            CHECK(br.exact);
            CHECK(br.holds());
            // Y e_j = j e_j in the adapted basis
            for (int c = 0; c < n; ++c) {
                ComplexVector v = s.basis.col(c);
                CHECK((s.Y * v - double(s.labels[c]) * v).norm() < 1e-9);
            }
        }
    }
}

TEST_CASE("floating-point sl2 on an irrational conjugate") {
    ComplexMatrix g(4, 4);
    g.setIdentity();
    g(0, 1) = std::sqrt(2.0);
    g(2, 3) = Complex(0.3, std::sqrt(5.0));
    g(3, 0) = 0.25 * std::sqrt(3.0);
    NilpotentLog nl = NilpotentLog::from_matrix(g * jordan_matrix({3, 1}) * g.inverse());
    CHECK_FALSE(nl.exact.has_value());
    CHECK(jordan_profile(nl) == std::vector<int>{3, 1});
    BracketReport br = check_brackets(sl2_triple(nl));
    CHECK(br.holds(1e-9));
}

TEST_CASE("weight filtration examples") {
    WeightFiltration w0 = weight_filtration(NilpotentLog::from_matrix(ComplexMatrix::Zero(3, 3)));
    CHECK(w0.weights == std::vector<int>{0});
    CHECK(w0.spaces[0].cols() == 3);

    NilpotentLog n2 = NilpotentLog::from_matrix(E(2, 0, 1));
    WeightFiltration w2 = weight_filtration(n2);
    CHECK(w2.weights == std::vector<int>{-1, 1});
    // W_{-1} = Im N = ker N = span(e1)
    RationalMatrix e1(2, 1);
    e1(0, 0) = 1;
    CHECK(same_span((*w2.exact)[0], e1));

    WeightFiltration w21 = weight_filtration(NilpotentLog::from_matrix(E(3, 0, 1)));
    CHECK(w21.weights == std::vector<int>{-1, 0, 1});
}

TEST_CASE("filtration properties and kernel/image oracle for n <= 5") {
    std::mt19937_64 rng(13);
    for (int n = 1; n <= 5; ++n) {
        for (const auto& prof : all_profiles(n)) {
            ComplexMatrix g = unimodular(rng, n);
            NilpotentLog nl = NilpotentLog::from_matrix(conjugate(g, jordan_matrix(prof)));
            WeightFiltration w = weight_filtration(nl);
            FiltrationReport fr = check_filtration(nl, w);
            CHECK(fr.exact);
            CHECK(fr.ok());
            WeightFiltration oracle = weight_filtration_from_kernels(nl);
            CHECK(same_filtration(w, oracle));
            CHECK(check_filtration(nl, oracle).ok());
        }
    }
}

TEST_CASE("a shifted filtration fails the checks") {
    NilpotentLog nl = NilpotentLog::from_matrix(jordan_matrix({3}));
    WeightFiltration w = weight_filtration(nl);
    // relabel weights off-centre: Gr symmetry must break
    WeightFiltration bad = w;
    for (int& l : bad.weights) l += 1;
    CHECK_FALSE(check_filtration(nl, bad).ok());
}
