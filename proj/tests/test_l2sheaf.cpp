#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hb/l2sheaf.hpp"
#include "hb/rng.hpp"

using namespace hb;

namespace {

GermTerm term(std::array<int, 2> a, unsigned form, std::array<int, 2> labels) {
    GermTerm t;
    t.a = a;
    t.form = form;
    t.labels = labels;
    return t;
}

GermExpression germ(int vars, std::vector<GermTerm> terms) {
    GermExpression g;
    g.vars = vars;
    g.terms = std::move(terms);
    return g;
}

const unsigned kForms[4] = {0u, kDt1, kDt2, kDt1 | kDt2};

unsigned form_of_degree(int r, Rng& rng) {
    if (r == 0) return 0u;
    if (r == 2) return kDt1 | kDt2;
    return rng.integer(0, 1) == 0 ? kDt1 : kDt2;
}

GermTerm random_term(int r, Rng& rng) {
    return term({static_cast<int>(rng.integer(0, 2)), static_cast<int>(rng.integer(0, 2))}, form_of_degree(r, rng),
                {static_cast<int>(rng.integer(-3, 3)), static_cast<int>(rng.integer(-3, 3))});
}

}  // namespace

TEST_CASE("reference membership examples") {
    auto bare = is_l2(germ(2, {term({0, 0}, 0, {0, 0})}));
    CHECK(bare.member);
    REQUIRE(bare.trace.size() == 1);
    CHECK(bare.trace[0].find("W[l1<=0, l2-l1<=0]") != std::string::npos);

    auto dt1 = is_l2(germ(2, {term({0, 0}, kDt1, {0, 0})}));
    CHECK_FALSE(dt1.member);
    CHECK(dt1.trace[0].find("fails") != std::string::npos);

    for (int l1 = -3; l1 <= 3; ++l1) {
        for (int l2 = -3; l2 <= 3; ++l2) {
            auto top = is_l2(germ(2, {term({1, 1}, kDt1 | kDt2, {l1, l2})}));
            CHECK(top.member);
            CHECK(top.trace[0].find("t1t2H") != std::string::npos);
        }
    }
}

TEST_CASE("predicate table per summand") {
    // t1 summand: l2 - l1 <= 0, or <= -2 with a dt2 factor.
    CHECK(is_l2(germ(2, {term({1, 0}, 0, {3, 3})})).member);
    CHECK_FALSE(is_l2(germ(2, {term({1, 0}, 0, {0, 1})})).member);
    CHECK(is_l2(germ(2, {term({1, 0}, kDt1, {-2, -2})})).member);
    CHECK_FALSE(is_l2(germ(2, {term({1, 0}, kDt2, {0, 0})})).member);
    CHECK(is_l2(germ(2, {term({1, 0}, kDt2, {0, -2})})).member);
    // t2 summand: l1 <= 0, or <= -2 with a dt1 factor.
    CHECK(is_l2(germ(2, {term({0, 1}, kDt2, {0, 3})})).member);
    CHECK_FALSE(is_l2(germ(2, {term({0, 1}, kDt1, {-1, -3})})).member);
    CHECK(is_l2(germ(2, {term({0, 1}, kDt1 | kDt2, {-2, 3})})).member);
    // Bare top degree.
    CHECK(is_l2(germ(2, {term({0, 0}, kDt1 | kDt2, {-2, -4})})).member);
    CHECK_FALSE(is_l2(germ(2, {term({0, 0}, kDt1 | kDt2, {-2, -3})})).member);
    // A germ is a member iff every term is.
    CHECK_FALSE(is_l2(germ(2, {term({0, 0}, 0, {0, 0}), term({0, 0}, 0, {1, 0})})).member);
}

TEST_CASE("one-variable specialization") {
    CHECK(is_l2(germ(1, {term({0, 0}, 0, {0, 0})})).member);
    CHECK_FALSE(is_l2(germ(1, {term({0, 0}, 0, {1, 0})})).member);
    CHECK_FALSE(is_l2(germ(1, {term({0, 0}, kDt1, {0, 0})})).member);
    CHECK(is_l2(germ(1, {term({0, 0}, kDt1, {-2, 0})})).member);
    CHECK(is_l2(germ(1, {term({1, 0}, kDt1, {3, 0})})).member);

    auto n0 = is_l2_numeric(germ(1, {term({0, 0}, 0, {0, 0})}));
    CHECK(n0.member);
    // 2π ∫_ε^∞ L^{-2} dL = 2π/ε.
    CHECK(n0.estimate == doctest::Approx(2.0 * M_PI / 0.5).epsilon(1e-12));
    CHECK_FALSE(is_l2_numeric(germ(1, {term({0, 0}, kDt1, {0, 0})})).member);
    CHECK_THROWS_WITH_AS(is_l2(germ(1, {term({0, 1}, 0, {0, 0})})), "one-variable germ uses t2", Error);
}

TEST_CASE("scope and input errors") {
    CHECK_THROWS_WITH_AS(is_l2(germ(3, {term({0, 0}, 0, {0, 0})})),
                         doctest::Contains("beyond Prop. 1 scope"), Error);
    CHECK_THROWS_WITH_AS(is_l2(germ(1, {term({0, 0}, kDt1 | kDt2, {0, 0})})), doctest::Contains("t2"), Error);
    CHECK_THROWS_WITH_AS(is_l2(germ(2, {term({0, 0}, 4u, {0, 0})})), doctest::Contains("beyond Prop. 1 scope"),
                         Error);
    CHECK_THROWS_WITH_AS(is_l2(germ(2, {term({0, 0}, 0, {0, 0}), term({0, 0}, kDt1, {-2, -2})})),
                         "germ mixes form degrees", Error);
    CHECK_THROWS_AS(is_l2(germ(2, {term({0, 0}, 0, {0, 0})}), RegionSpec{1.0}), Error);
    CHECK(is_l2(germ(2, {})).member);
}

TEST_CASE("log powers are rejected by the predicate and handled by the oracle") {
    GermTerm t = term({0, 0}, 0, {-2, -4});
    t.logp = {1, 0};
    auto v = is_l2(germ(2, {t}));
    CHECK(v.rejected);
    CHECK_FALSE(v.member);
    // Exponent in L1 is -2 + 2 - 2 = -2, in L2 is -2 - 2 = -4: finite.
    CHECK(is_l2_numeric(germ(2, {t})).member);
    t.logp = {2, 0};
    CHECK_FALSE(is_l2_numeric(germ(2, {t})).member);
}

TEST_CASE("oracle agrees with the predicate exhaustively over labels") {
    int checked = 0;
    for (int a1 = 0; a1 <= 1; ++a1) {
        for (int a2 = 0; a2 <= 1; ++a2) {
            for (unsigned form : kForms) {
                for (int l1 = -3; l1 <= 3; ++l1) {
                    for (int l2 = -3; l2 <= 3; ++l2) {
                        auto g = germ(2, {term({a1, a2}, form, {l1, l2})});
                        auto sym = is_l2(g);
                        auto num = is_l2_numeric(g);
                        CHECK_MESSAGE(sym.member == num.member, sym.trace[0]);
                        if (num.member) CHECK(std::isfinite(num.estimate));
                        ++checked;
                    }
                }
            }
        }
    }
    CHECK(checked == 4 * 4 * 49);
    for (unsigned form : {0u, kDt1}) {
        for (int a = 0; a <= 1; ++a) {
            for (int l = -3; l <= 3; ++l) {
                auto g = germ(1, {term({a, 0}, form, {l, 0})});
                CHECK(is_l2(g).member == is_l2_numeric(g).member);
            }
        }
    }
}

TEST_CASE("oracle agrees with the predicate on random germs per degree") {
    Rng rng(20241);
    for (int r = 0; r <= 2; ++r) {
        int disagreements = 0;
        for (int s = 0; s < 60; ++s) {
            GermExpression g = germ(2, {});
            int nterms = static_cast<int>(rng.integer(1, 4));
            for (int k = 0; k < nterms; ++k) g.terms.push_back(random_term(r, rng));
            if (is_l2(g).member != is_l2_numeric(g).member) ++disagreements;
        }
        CHECK_MESSAGE(disagreements == 0, "degree " << r);
    }
}

TEST_CASE("finite oracle values match closed forms") {
    const double eps = 0.5;
    // Bare (0,0): (2π)² ∫ L1^{-2} ∫ L2^{-2} = (2π)²/ε².
    auto v = is_l2_numeric(germ(2, {term({0, 0}, 0, {0, 0})}), RegionSpec{eps});
    CHECK(v.estimate == doctest::Approx(std::pow(2.0 * M_PI, 2) / (eps * eps)).epsilon(1e-12));
    // t1t2 prefactor, labels (0,0): ∫ L^{-2} e^{-2L} from ε, twice.
    auto w = is_l2_numeric(germ(2, {term({1, 1}, 0, {0, 0})}), RegionSpec{eps});
    // E_2-type integral ∫_ε^∞ L^{-2} e^{-2L} dL = e^{-2ε}/ε - 2 E1(2ε).
    const double e1 = 0.21938393439552029;  // E1(1)
    double one = std::exp(-2.0 * eps) / eps - 2.0 * e1;
    CHECK(w.estimate == doctest::Approx(std::pow(2.0 * M_PI, 2) * one * one).epsilon(1e-9));
}

TEST_CASE("literal sector region disagrees with the formulae") {
    // Over L1 > εL2 the bare Ω⁰ term needs l1 <= 0 and l2 <= 1, so (0,1) integrates.
    auto g = germ(2, {term({0, 0}, 0, {0, 1})});
    CHECK_FALSE(is_l2(g).member);
    CHECK_FALSE(is_l2_numeric(g).member);
    CHECK(is_l2_numeric(g, {}, NormModel{NormRegion::Sector}).member);
    // Where both converge they agree on this germ.
    auto h = germ(2, {term({1, 1}, 0, {0, 0})});
    CHECK(is_l2_numeric(h, {}, NormModel{NormRegion::Sector}).member);
}

TEST_CASE("verdicts are stable in epsilon") {
    Rng rng(77);
    for (int s = 0; s < 150; ++s) {
        auto g = germ(2, {random_term(static_cast<int>(s % 3), rng)});
        bool ref = is_l2(g, RegionSpec{0.5}).member;
        for (double eps : {0.25, 0.5, 0.75}) {
            CHECK(is_l2(g, RegionSpec{eps}).member == ref);
            CHECK(is_l2_numeric(g, RegionSpec{eps}).member == ref);
        }
    }
}

TEST_CASE("adding a t_k prefactor never destroys membership") {
    Rng rng(5);
    for (int s = 0; s < 300; ++s) {
        GermTerm t = random_term(static_cast<int>(s % 3), rng);
        if (!is_l2(germ(2, {t})).member) continue;
        for (int k = 0; k < 2; ++k) {
            GermTerm u = t;
            u.a[static_cast<std::size_t>(k)] += 1;
            CHECK(is_l2(germ(2, {u})).member);
        }
    }
}

TEST_CASE("Higgs action preserves membership one degree up") {
    int applied = 0;
    for (int a1 = 0; a1 <= 1; ++a1) {
        for (int a2 = 0; a2 <= 1; ++a2) {
            for (unsigned form : kForms) {
                for (int l1 = -3; l1 <= 3; ++l1) {
                    for (int l2 = -3; l2 <= 3; ++l2) {
                        GermTerm t = term({a1, a2}, form, {l1, l2});
                        if (!is_l2(germ(2, {t})).member) continue;
                        for (int k = 1; k <= 2; ++k) {
                            auto u = apply_higgs(t, k);
                            if (!u) continue;
                            CHECK(u->degree() == t.degree() + 1);
                            CHECK(is_l2(germ(2, {*u})).member);
                            ++applied;
                        }
                    }
                }
            }
        }
    }
    CHECK(applied > 100);
    // Lowering l2 under N2 as well would break stability: bare (0,0) -> dt2/t2 at (-2,-2).
    CHECK_FALSE(is_l2(germ(2, {term({0, 0}, kDt2, {-2, -2})})).member);
    CHECK_FALSE(apply_higgs(term({0, 0}, kDt1, {0, 0}), 1).has_value());
}

TEST_CASE("splitter and purity enforcement") {
    auto sa = sl2_triple(NilpotentLog::from_matrix(jordan_matrix({2})));
    auto sb = sl2_triple(NilpotentLog::from_matrix(jordan_matrix({2})));
    FiltrationData f = FiltrationData::product(sa, sb);
    REQUIRE(f.dim() == 4);

    ComplexVector mixed = f.basis.col(0) + 2.0 * f.basis.col(3);
    GermTerm t = term({0, 0}, 0, f.labels[0]);
    t.coefficient = mixed;
    auto g = germ(2, {t});
    CHECK_THROWS_WITH_AS(is_l2_numeric(g, {}, {}, &f), doctest::Contains("split germ first"), Error);
    CHECK_THROWS_WITH_AS(is_l2(g, {}, &f), doctest::Contains("split germ first"), Error);

    auto s = split_germ(g, f);
    REQUIRE(s.terms.size() == 2);
    CHECK(s.terms[0].labels == f.labels[0]);
    CHECK(s.terms[1].labels == f.labels[3]);
    CHECK(((*s.terms[0].coefficient + *s.terms[1].coefficient) - mixed).norm() < 1e-12);
    CHECK(is_l2(s, {}, &f).member == is_l2_numeric(s, {}, {}, &f).member);
    CHECK(split_germ(s, f).terms.size() == 2);

    // Product labels: W^1 from the first factor, W^2 from the sum.
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
        CHECK(f.labels[i][1] == f.labels[i][0] + sb.labels[i % 2]);
    }
}

TEST_CASE("graded sequence probe on a rank-2 weight-1 model") {
    // e_{-1} spans F^1, e_1 spans F^0/F^1.
    FiltrationData f;
    f.basis = ComplexMatrix::Identity(2, 2);
    f.labels = {{-1, -1}, {1, 1}};
    f.hodge = {1, 0};
    ComplexVector em = f.basis.col(0), ep = f.basis.col(1);

    auto one = [&](std::array<int, 2> a, const ComplexVector& v) {
        GermTerm t = term(a, 0, {0, 0});
        t.coefficient = v;
        return germ(1, {t});
    };

    // Graded germ [e1] is not L²; t·[e1] is, and lifts to t·e1 in F^0.
    auto bare = graded_sequence_probe(f, one({0, 0}, ep), 0);
    CHECK_FALSE(bare.graded_member);
    auto lifted = graded_sequence_probe(f, one({1, 0}, ep), 0);
    CHECK(lifted.in_Fp);
    CHECK(lifted.graded_member);
    CHECK(lifted.lift_ok);
    REQUIRE(lifted.lift.terms.size() == 1);
    CHECK(lifted.lift.terms[0].a[0] == 1);

    // A germ already in F^1 has zero graded image in Gr^0 and stays in F^1.
    auto high = graded_sequence_probe(f, one({0, 0}, em), 0);
    CHECK(high.in_Fp);
    CHECK(high.graded_zero);
    CHECK(high.in_Fp1);
    CHECK(high.kernel_ok);

    // Mixed germ e_{-1} + t e_1 splits; its graded image is t·[e1].
    GermTerm t0 = term({0, 0}, 0, {0, 0});
    t0.coefficient = em;
    GermTerm t1 = term({1, 0}, 0, {0, 0});
    t1.coefficient = ep;
    auto mixed = graded_sequence_probe(f, germ(1, {t0, t1}), 0);
    CHECK(mixed.in_Fp);
    CHECK_FALSE(mixed.graded_zero);
    CHECK(mixed.graded.terms.size() == 1);
    CHECK(mixed.lift_ok);

    // The zero germ lies in every term.
    auto zero = graded_sequence_probe(f, germ(1, {}), 0);
    CHECK(zero.in_Fp);
    CHECK(zero.in_Fp1);
    CHECK(zero.graded_zero);

    FiltrationData nohodge = f;
    nohodge.hodge.clear();
    CHECK_THROWS_AS(graded_sequence_probe(nohodge, one({0, 0}, ep), 0), Error);
}
