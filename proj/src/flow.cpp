#include "hb/flow.hpp"

#include <atomic>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "hb/parallel.hpp"
#include "hb/rng.hpp"

namespace hb {

namespace {

// Square root and inverse square root of H from one eigendecomposition.
struct Whitening {
    ComplexMatrix s, si;
    explicit Whitening(const ComplexMatrix& h) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
        const Eigen::VectorXd r = es.eigenvalues().cwiseSqrt();
        s = es.eigenvectors() * r.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
        si = es.eigenvectors() * r.cwiseInverse().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    }
};

ComplexMatrix herm_log(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
    if (es.eigenvalues().minCoeff() <= 0.0) throw Error("flow stalled: non-positive sample");
    const Eigen::VectorXd l = es.eigenvalues().array().log().matrix();
    return es.eigenvectors() * l.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

ComplexMatrix herm_exp(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
    const Eigen::VectorXd l = es.eigenvalues().array().exp().matrix();
    return es.eigenvectors() * l.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

struct Neighbor {
    PosDefMetric h;
    double w;  // edge weight in the discrete energy
};

std::vector<Neighbor> neighbors(const GridMap& g, int i, int k) {
    const double wx = g.hy() / g.hx(), wy = g.hx() / g.hy();
    return {{g.extended(i - 1, k), wx}, {g.extended(i + 1, k), wx}, {g.at(i, k - 1), wy}, {g.at(i, k + 1), wy}};
}

// Upper bound on the Hessian of ½d²(·, q) at distance d for curvature >= -1.
double hessian_bound(double d) { return d < 1e-8 ? 1.0 + d * d / 3.0 : d / std::tanh(d); }

}  // namespace

GridMap::GridMap(int nx, int ny, double y0, double y1, ComplexMatrix twist, const PosDefMetric& fill)
    : nx_(nx), ny_(ny), y0_(y0), y1_(y1), twist_(std::move(twist)) {
    if (nx < 4 || ny < 2) throw Error("grid too small: need nx >= 4 and ny >= 2");
    if (nx % 2 != 0) throw Error("nx must be even for red-black ordering");
    if (!(y1 > y0)) throw Error("grid needs y1 > y0");
    if (twist_.rows() != fill.dim() || twist_.cols() != fill.dim()) throw Error("dimension mismatch");
    Eigen::FullPivLU<ComplexMatrix> lu(twist_);
    if (!lu.isInvertible()) throw Error("non-invertible group element");
    twist_inv_ = lu.inverse();
    h_.assign(static_cast<size_t>(nx) * (ny + 1), fill);
}

GridMap GridMap::from_model(const ModelMetric& m, int nx, int ny, double y0, double y1) {
    GridMap g(nx, ny, y0, y1, m.monodromy(), PosDefMetric::identity(m.dim()));
    for (int k = 0; k <= ny; ++k)
        for (int i = 0; i < nx; ++i) g.at(i, k) = m.eval({g.x(i), g.y(k)});
    return g;
}

PosDefMetric GridMap::extended(int i, int k) const {
    int shift = 0;
    while (i < 0) {
        i += nx_;
        --shift;
    }
    while (i >= nx_) {
        i -= nx_;
        ++shift;
    }
    PosDefMetric h = at(i, k);
    for (; shift > 0; --shift) h = act(twist_, h);
    for (; shift < 0; ++shift) h = act(twist_inv_, h);
    return h;
}

double GridMap::seam_deviation() const {
    double worst = 0.0;
    for (int k = 0; k <= ny_; ++k)
        worst = std::max(worst, relative_error(act(twist_inv_, extended(nx_, k)).matrix(), at(0, k).matrix()));
    return worst;
}

std::vector<std::vector<ComplexMatrix>> tension(const GridMap& g, TensionKind kind) {
    const double hx = g.hx(), hy = g.hy();
    std::vector<std::vector<ComplexMatrix>> out(g.ny() - 1, std::vector<ComplexMatrix>(g.nx()));
    parallel_for(g.ny() - 1, [&](int row) {
        const int k = row + 1;
        for (int i = 0; i < g.nx(); ++i) {
            const ComplexMatrix& h = g.at(i, k).matrix();
            const Whitening wh(h);
            if (kind == TensionKind::Geodesic) {
                ComplexMatrix acc = ComplexMatrix::Zero(h.rows(), h.cols());
                for (const auto& nb : neighbors(g, i, k))
                    acc += nb.w / (hx * hy) * herm_log(wh.si * nb.h.matrix() * wh.si);
                out[row][i] = wh.si * acc * wh.s;
            } else {
                const ComplexMatrix hinv = wh.si * wh.si;
                const ComplexMatrix l = g.extended(i - 1, k).matrix(), r = g.extended(i + 1, k).matrix();
                const ComplexMatrix d = g.at(i, k - 1).matrix(), u = g.at(i, k + 1).matrix();
                const ComplexMatrix dx = hinv * (r - l) / (2.0 * hx);
                const ComplexMatrix dy = hinv * (u - d) / (2.0 * hy);
                const ComplexMatrix lap = hinv * ((r - 2.0 * h + l) / (hx * hx) + (u - 2.0 * h + d) / (hy * hy));
                out[row][i] = lap - dx * dx - dy * dy;
            }
        }
    });
    return out;
}

double tension_sup(const GridMap& g, TensionKind kind) {
    const auto t = tension(g, kind);
    double worst = 0.0;
    for (int row = 0; row < g.ny() - 1; ++row)
        for (int i = 0; i < g.nx(); ++i) {
            const Whitening wh(g.at(i, row + 1).matrix());
            worst = std::max(worst, (wh.s * t[row][i] * wh.si).norm());
        }
    return worst;
}

double discrete_energy(const GridMap& g) {
    const double wx = g.hy() / g.hx(), wy = g.hx() / g.hy();
    double e = 0.0;
    for (int k = 0; k <= g.ny(); ++k)
        for (int i = 0; i < g.nx(); ++i) {
            const double dxe = dist(g.at(i, k), g.extended(i + 1, k));
            e += 0.5 * wx * dxe * dxe;
            if (k < g.ny()) {
                const double dye = dist(g.at(i, k), g.at(i, k + 1));
                e += 0.5 * wy * dye * dye;
            }
        }
    return e;
}

FlowResult relax(GridMap g, const FlowConfig& cfg) {
    double omega = cfg.step;
    if (omega == 0.0) {
        const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
        const double rho = (ax + ay * std::cos(kTwoPi / 2.0 / g.ny())) / (ax + ay);
        omega = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
    }
    if (!(omega > 0.0 && omega < 2.0)) throw Error("flow step must lie in (0,2)");

    std::atomic<int> backtracks{0};
    auto update = [&](int i, int k) {
        const PosDefMetric& cur = g.at(i, k);
        const Whitening wh(cur.matrix());
        const auto nbs = neighbors(g, i, k);
        double wsum = 0.0, e0 = 0.0;
        ComplexMatrix v = ComplexMatrix::Zero(cur.dim(), cur.dim());
        std::vector<double> d(nbs.size());
        for (size_t n = 0; n < nbs.size(); ++n) {
            const ComplexMatrix l = herm_log(wh.si * nbs[n].h.matrix() * wh.si);
            d[n] = l.norm();
            e0 += 0.5 * nbs[n].w * d[n] * d[n];
            v += nbs[n].w * l;
            wsum += nbs[n].w;
        }
        v /= wsum;
        const double vn = v.norm();
        if (!std::isfinite(vn)) throw Error("flow stalled: non-finite update");
        if (vn == 0.0) return;
        for (double tau = omega; tau > 1e-12; tau *= 0.5) {
            double bound = 0.0;
            for (size_t n = 0; n < nbs.size(); ++n) bound += nbs[n].w * hessian_bound(d[n] + tau * vn);
            const bool certified = tau * bound < 2.0 * wsum;
            PosDefMetric next(ComplexMatrix(wh.s * herm_exp(tau * v) * wh.s));
            bool accept = certified;
            if (!accept) {
                double e1 = 0.0;
                for (const auto& nb : nbs) {
                    const double dd = dist(next, nb.h);
                    e1 += 0.5 * nb.w * dd * dd;
                }
                accept = e1 < e0;
            }
            if (accept) {
                g.at(i, k) = std::move(next);
                return;
            }
            backtracks.fetch_add(1, std::memory_order_relaxed);
        }
        throw Error("flow stalled: no descent step at node (" + std::to_string(i) + "," + std::to_string(k) + ")");
    };

    FlowResult res{g, 0, false, 0.0, omega, 0, {}, 0.0};
    res.energy.push_back(discrete_energy(g));
    res.residual = tension_sup(g);
    res.converged = res.residual < cfg.tol;
    const int interior = g.ny() - 1;
    while (!res.converged && res.sweeps < cfg.max_sweeps) {
        for (int color = 0; color < 2; ++color) {
            parallel_for(interior, [&](int row) {
                const int k = row + 1;
                for (int i = (color + k) % 2; i < g.nx(); i += 2) update(i, k);
            });
        }
        ++res.sweeps;
        res.energy.push_back(discrete_energy(g));
        res.max_seam_deviation = std::max(res.max_seam_deviation, g.seam_deviation());
        if (res.sweeps % cfg.check_every == 0) {
            res.residual = tension_sup(g);
            res.converged = res.residual < cfg.tol;
        }
    }
    if (!res.converged) res.residual = tension_sup(g);
    res.backtracks = backtracks.load();
    res.map = std::move(g);
    return res;
}

GridMap perturb(const GridMap& g, double size, unsigned long long seed) {
    Rng rng(seed);
    GridMap out = g;
    const int n = g.dim();
    for (int k = 1; k < g.ny(); ++k)
        for (int i = 0; i < g.nx(); ++i) {
            ComplexMatrix a(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) a(r, c) = Complex(rng.normal(), rng.normal());
            a = 0.5 * (a + a.adjoint());
            a *= size * rng.uniform() / std::max(a.norm(), 1e-300);
            const Whitening wh(g.at(i, k).matrix());
            out.at(i, k) = PosDefMetric(ComplexMatrix(wh.s * herm_exp(a) * wh.s));
        }
    return out;
}

double sup_dist(const GridMap& a, const GridMap& b) {
    if (a.nx() != b.nx() || a.ny() != b.ny()) throw Error("grid shapes differ");
    double worst = 0.0;
    for (int k = 0; k <= a.ny(); ++k)
        for (int i = 0; i < a.nx(); ++i) worst = std::max(worst, dist(a.at(i, k), b.at(i, k)));
    return worst;
}

GradientBound gradient_bound_check(const GridMap& g) {
    GradientBound gb;
    for (int k = 1; k < g.ny(); ++k) {
        double row = 0.0;
        for (int i = 0; i < g.nx(); ++i) {
            const double dx = dist(g.extended(i - 1, k), g.extended(i + 1, k)) / (2.0 * g.hx());
            const double dy = dist(g.at(i, k - 1), g.at(i, k + 1)) / (2.0 * g.hy());
            // |dh|²_ω / y² = (y² e_flat) / y².
            row = std::max(row, dx * dx + dy * dy);
        }
        gb.row_max.push_back(row);
        gb.C = std::max(gb.C, row);
        gb.finite = gb.finite && std::isfinite(row);
    }
    for (size_t r = 1; r < gb.row_max.size(); ++r)
        gb.decreasing_in_y = gb.decreasing_in_y && gb.row_max[r] <= gb.row_max[r - 1] * (1.0 + 1e-9);
    return gb;
}

void write_dist_csv(std::ostream& os, const GridMap& g, const GridMap& reference) {
    os << "i,k,x,y,dist\n";
    os.precision(17);
    for (int k = 0; k <= g.ny(); ++k)
        for (int i = 0; i < g.nx(); ++i)
            os << i << ',' << k << ',' << g.x(i) << ',' << g.y(k) << ',' << dist(g.at(i, k), reference.at(i, k)) << '\n';
}

}  // namespace hb
