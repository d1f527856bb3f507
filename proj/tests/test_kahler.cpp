#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hb/kahler.hpp"
#include "hb/rng.hpp"

using namespace hb;

namespace {

constexpr Complex kI{0.0, 1.0};

ModelMetric model(std::vector<int> profile) {
    return ModelMetric(sl2_triple(NilpotentLog::from_matrix(jordan_matrix(profile))), 0.5);
}

ComplexVector random_vector(Eigen::Index n, unsigned long long seed) {
    Rng rng(seed);
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
    return v;
}

KahlerGrid grid(int n) {
    KahlerGrid g;
    g.nx = g.ny = n;
    return g;
}

}  // namespace

TEST_CASE("zero form has zero errors") {
    const auto q = OperatorQuad::flat(grid(16), KahlerBase::Poincare, 2);
    const auto e = kahler_errors(q, ComplexVector::Zero(q.size()));
    CHECK(e.dbar_adjoint == 0.0);
    CHECK(e.d_adjoint == 0.0);
    CHECK(e.laplacian == 0.0);
}

TEST_CASE("adjoints are exact for the weighted inner product") {
    const auto q = OperatorQuad::from_model(model({3}), grid(12), KahlerBase::Poincare);
    const ComplexVector u = random_vector(q.size(), 1), v = random_vector(q.size(), 2);
    for (const SparseOp* op : {&q.Dprime(), &q.Ddprime(), &q.D(), &q.Dc(), &q.Lambda()}) {
        const Complex lhs = q.inner(*op * u, v);
        const Complex rhs = q.inner(u, q.adjoint(*op) * v);
        CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
    }
    CHECK(std::abs(q.inner(q.D() * u, v) - q.inner(u, q.D_adjoint() * v)) < 1e-12 * std::abs(q.inner(q.D() * u, v)));
}

TEST_CASE("Lambda is the adjoint of wedging with the Kahler form") {
    // L f = (iσ/2) f dz∧dz̄ for ω = (i/2)σ dz∧dz̄.
    const auto g = grid(10);
    const auto q = OperatorQuad::flat(g, KahlerBase::Poincare, 1);
    std::vector<Eigen::Triplet<Complex>> t;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            t.emplace_back(q.index(3, c, r), q.index(0, c, r), 0.5 * kI / (g.y(r) * g.y(r)));
    SparseOp l(q.size(), q.size());
    l.setFromTriplets(t.begin(), t.end());
    const SparseOp diff = q.adjoint(l) - q.Lambda();
    CHECK(diff.norm() < 1e-12 * q.Lambda().norm());
}

TEST_CASE("flat bundles satisfy the identities to roundoff") {
    const auto q = OperatorQuad::flat(grid(128), KahlerBase::Euclidean, 1);
    const auto e = kahler_errors(q, bump_form(q, 5));
    CHECK(e.dbar_adjoint < 1e-3);
    CHECK(e.d_adjoint < 1e-3);
    CHECK(e.laplacian < 1e-3);
    const auto p = OperatorQuad::flat(grid(32), KahlerBase::Poincare, 2);
    const auto ep = kahler_errors(p, bump_form(p, 6));
    CHECK(ep.dbar_adjoint < 1e-12);
    CHECK(ep.d_adjoint < 1e-12);
    CHECK(ep.laplacian < 1e-12);
}

TEST_CASE("model bundle identities refine") {
    for (int b : {2, 3}) {
        const auto m = model({b});
        const auto r = kahler_identity_check(
            [&](const KahlerGrid& g) { return OperatorQuad::from_model(m, g, KahlerBase::Poincare); }, {32, 64, 128},
            b == 2 ? 20 : 4, 100);
        CAPTURE(b);
        CHECK(r.min_order_dbar >= 1.5);
        CHECK(r.min_order_d >= 1.5);
        CHECK(r.min_order_laplacian >= 1.5);
        CHECK(r.laplacian_monotone);
        CHECK(r.errors.back()[0].laplacian < r.errors.front()[0].laplacian);
    }
}
