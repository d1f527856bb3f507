#include "hb/kahler.hpp"

#include <cmath>

#include "hb/rng.hpp"

namespace hb {

namespace {

constexpr Complex kI{0.0, 1.0};

using Triplets = std::vector<Eigen::Triplet<Complex>>;

double bump1(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

}  // namespace

Eigen::Index OperatorQuad::index(int comp, int col, int row) const {
    return ((static_cast<Eigen::Index>(comp) * grid_.nodes()) + static_cast<Eigen::Index>(row) * grid_.cols() + col) * n_;
}

OperatorQuad::OperatorQuad(const KahlerGrid& grid, KahlerBase base, int n, const BundleData& bundle)
    : grid_(grid), n_(n) {
    if (grid.nx < 3 || grid.ny < 3 || n < 1) throw Error("operator grid too small");
    const int cols = grid.cols(), rows = grid.rows();
    std::vector<BundlePoint> data;
    std::vector<double> sigma;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            data.push_back(bundle(grid.x(c), grid.y(r)));
            sigma.push_back(base == KahlerBase::Euclidean ? 1.0 : 1.0 / (grid.y(r) * grid.y(r)));
        }
    auto node = [&](int c, int r) { return r * cols + c; };

    auto add_block = [&](Triplets& t, int dst, int src, int c, int r, const ComplexMatrix& blk) {
        const Eigen::Index i0 = index(dst, c, r), j0 = index(src, c, r);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (blk(a, b) != 0.0) t.emplace_back(i0 + a, j0 + b, blk(a, b));
    };
    // scale·(cx ∂_x + cy ∂_y) by centered differences, zero outside.
    auto add_deriv = [&](Triplets& t, int dst, int src, Complex cx, Complex cy, Complex scale) {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const Eigen::Index i0 = index(dst, c, r);
                auto put = [&](int cc, int rr, Complex v) {
                    if (cc < 0 || cc >= cols || rr < 0 || rr >= rows) return;
                    const Eigen::Index j0 = index(src, cc, rr);
                    for (int a = 0; a < n; ++a) t.emplace_back(i0 + a, j0 + a, scale * v);
                };
                put(c + 1, r, cx / (2.0 * grid.hx()));
                put(c - 1, r, -cx / (2.0 * grid.hx()));
                put(c, r + 1, cy / (2.0 * grid.hy()));
                put(c, r - 1, -cy / (2.0 * grid.hy()));
            }
    };
    const Complex dz_x = 0.5, dz_y = -0.5 * kI, dzb_x = 0.5, dzb_y = 0.5 * kI;
    enum { F = 0, Acomp = 1, C = 2, W = 3 };

    Triplets t1, t2, tl, tm, tmi;
    add_deriv(t1, Acomp, F, dz_x, dz_y, 1.0);
    add_deriv(t1, W, C, dz_x, dz_y, 1.0);
    add_deriv(t2, C, F, dzb_x, dzb_y, 1.0);
    add_deriv(t2, W, Acomp, dzb_x, dzb_y, -1.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const BundlePoint& bp = data[node(c, r)];
            const double s = sigma[node(c, r)];
            add_block(t1, Acomp, F, c, r, 0.5 * bp.A);
            add_block(t1, C, F, c, r, -0.5 * bp.B);
            add_block(t1, W, Acomp, c, r, 0.5 * bp.B);
            add_block(t1, W, C, c, r, 0.5 * bp.A);
            add_block(t2, Acomp, F, c, r, -0.5 * bp.A);
            add_block(t2, C, F, c, r, 0.5 * bp.B);
            add_block(t2, W, Acomp, c, r, -0.5 * bp.B);
            add_block(t2, W, C, c, r, -0.5 * bp.A);
            add_block(tl, F, W, c, r, ComplexMatrix::Identity(n, n) * (-2.0 * kI / s));
            const double w[4] = {s, 2.0, 2.0, 4.0 / s};
            const ComplexMatrix hinv = bp.H.inverse();
            for (int comp = 0; comp < 4; ++comp) {
                add_block(tm, comp, comp, c, r, w[comp] * bp.H);
                add_block(tmi, comp, comp, c, r, hinv / w[comp]);
            }
        }
    const Eigen::Index sz = size();
    auto build = [&](const Triplets& t) {
        SparseOp m(sz, sz);
        m.setFromTriplets(t.begin(), t.end());
        return m;
    };
    d1_ = build(t1);
    d2_ = build(t2);
    lambda_ = build(tl);
    m_ = build(tm);
    minv_ = build(tmi);
    d_ = d1_ + d2_;
    dc_ = d2_ - d1_;
    d2_adj_ = adjoint(d2_);
    d_adj_ = adjoint(d_);
}

OperatorQuad OperatorQuad::flat(const KahlerGrid& grid, KahlerBase base, int n) {
    const ComplexMatrix id = ComplexMatrix::Identity(n, n), zero = ComplexMatrix::Zero(n, n);
    return OperatorQuad(grid, base, n, [&](double, double) { return BundlePoint{id, zero, zero}; });
}

OperatorQuad OperatorQuad::from_model(const ModelMetric& m, const KahlerGrid& grid, KahlerBase base) {
    return OperatorQuad(grid, base, m.dim(), [&](double x, double y) {
        const ModelJet j = m.jet({x, y});
        return BundlePoint{j.H.matrix(), 0.5 * (j.log_dx - kI * j.log_dy), 0.5 * (j.log_dx + kI * j.log_dy)};
    });
}

SparseOp OperatorQuad::adjoint(const SparseOp& a) const {
    SparseOp ah = a.adjoint();
    return minv_ * ah * m_;
}

Complex OperatorQuad::inner(const ComplexVector& u, const ComplexVector& v) const { return u.dot(m_ * v); }

double OperatorQuad::norm(const ComplexVector& u) const { return std::sqrt(std::max(0.0, inner(u, u).real())); }

ComplexVector bump_form(const OperatorQuad& q, unsigned long long seed) {
    const KahlerGrid& g = q.grid();
    const int n = q.fiber();
    Rng rng(seed);
    std::vector<ComplexVector> coef(4, ComplexVector(n));
    for (auto& c : coef)
        for (int a = 0; a < n; ++a) c(a) = Complex(rng.normal(), rng.normal());
    ComplexVector eta = ComplexVector::Zero(q.size());
    const double cx = 0.5 * (g.x0 + g.x1), cy = 0.5 * (g.y0 + g.y1);
    const double rx = 0.3 * (g.x1 - g.x0), ry = 0.3 * (g.y1 - g.y0);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            const double b = bump1((g.x(c) - cx) / rx) * bump1((g.y(r) - cy) / ry);
            if (b == 0.0) continue;
            for (int comp = 0; comp < 4; ++comp) eta.segment(q.index(comp, c, r), n) = b * coef[comp];
        }
    return eta;
}

KahlerErrors kahler_errors(const OperatorQuad& q, const ComplexVector& eta) {
    auto rel = [&](const ComplexVector& lhs, const ComplexVector& rhs) {
        const double den = q.norm(lhs);
        const double num = q.norm(lhs - rhs);
        return den == 0.0 ? num : num / den;
    };
    const SparseOp& l = q.Lambda();
    KahlerErrors e;

    const ComplexVector lhs1 = q.Ddprime_adjoint() * eta;
    const ComplexVector rhs1 = -kI * (l * (q.Dprime() * eta) - q.Dprime() * (l * eta));
    e.dbar_adjoint = rel(lhs1, rhs1);

    const ComplexVector lhs2 = q.D_adjoint() * eta;
    const ComplexVector rhs2 = kI * (l * (q.Dc() * eta) - q.Dc() * (l * eta));
    e.d_adjoint = rel(lhs2, rhs2);

    const ComplexVector lap = q.D() * lhs2 + q.D_adjoint() * (q.D() * eta);
    const ComplexVector lap2 = q.Ddprime() * lhs1 + q.Ddprime_adjoint() * (q.Ddprime() * eta);
    e.laplacian = rel(lap, 2.0 * lap2);
    return e;
}

KahlerRefinement kahler_identity_check(const std::function<OperatorQuad(const KahlerGrid&)>& build,
                                       const std::vector<int>& grids, int trials, unsigned long long seed,
                                       KahlerGrid domain) {
    KahlerRefinement out;
    out.grids = grids;
    for (int n : grids) {
        domain.nx = domain.ny = n;
        const OperatorQuad q = build(domain);
        std::vector<KahlerErrors> row;
        for (int t = 0; t < trials; ++t) row.push_back(kahler_errors(q, bump_form(q, seed + t)));
        out.errors.push_back(std::move(row));
    }
    double o1 = 1e300, o2 = 1e300, o3 = 1e300;
    for (size_t g = 1; g < grids.size(); ++g) {
        const double ratio = std::log2(double(grids[g]) / grids[g - 1]);
        for (int t = 0; t < trials; ++t) {
            const auto& a = out.errors[g - 1][t];
            const auto& b = out.errors[g][t];
            o1 = std::min(o1, std::log2(a.dbar_adjoint / b.dbar_adjoint) / ratio);
            o2 = std::min(o2, std::log2(a.d_adjoint / b.d_adjoint) / ratio);
            o3 = std::min(o3, std::log2(a.laplacian / b.laplacian) / ratio);
            out.laplacian_monotone = out.laplacian_monotone && b.laplacian < a.laplacian;
        }
    }
    out.min_order_dbar = o1;
    out.min_order_d = o2;
    out.min_order_laplacian = o3;
    return out;
}

}  // namespace hb
