#include "hb/higgs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "hb/rng.hpp"

namespace hb {

namespace {

constexpr Complex kI{0.0, 1.0};

ComplexMatrix from_derivatives(const ComplexMatrix& hinv, const ComplexMatrix& hx, const ComplexMatrix& hy,
                               HiggsSide side) {
    const ComplexMatrix dz = 0.5 * (hx - kI * hy);
    return side == HiggsSide::Right ? ComplexMatrix(-0.5 * hinv * dz) : ComplexMatrix(-0.5 * dz * hinv);
}

// H^{1/2} A H^{-1/2}: an endomorphism written in an h-unitary frame.
ComplexMatrix unitary_frame(const PosDefMetric& h, const ComplexMatrix& a) { return h.sqrt() * a * h.inverse_sqrt(); }

ComplexMatrix neville_at_zero(const std::vector<double>& t, std::vector<ComplexMatrix> p) {
    const size_t n = t.size();
    for (size_t level = 1; level < n; ++level)
        for (size_t i = 0; i + level < n; ++i) {
            const size_t j = i + level;
            p[i] = (-t[j] * p[i] + t[i] * p[i + 1]) / (t[i] - t[j]);
        }
    return p[0];
}

}  // namespace

HiggsField extract_higgs(const ModelMetric& m, const std::vector<PuncturedPoint>& points, HiggsSide side) {
    HiggsField f;
    f.side = side;
    for (const auto& p : points) {
        const ModelJet j = m.jet(p);
        ComplexMatrix theta;
        if (side == HiggsSide::Right) {
            theta = -0.25 * (j.log_dx - kI * j.log_dy);
        } else {
            theta = from_derivatives(j.H.inverse(), j.Hx, j.Hy, side);
        }
        f.samples.push_back({p, j.H, theta});
    }
    return f;
}

HiggsField extract_higgs(const GridMap& g, HiggsSide side) {
    HiggsField f;
    f.side = side;
    f.nx = g.nx();
    for (int k = 1; k < g.ny(); ++k)
        for (int i = 0; i < g.nx(); ++i) {
            const PosDefMetric& h = g.at(i, k);
            const ComplexMatrix hx = (g.extended(i + 1, k).matrix() - g.extended(i - 1, k).matrix()) / (2.0 * g.hx());
            const ComplexMatrix hy = (g.at(i, k + 1).matrix() - g.at(i, k - 1).matrix()) / (2.0 * g.hy());
            f.samples.push_back({{g.x(i), g.y(k)}, h, from_derivatives(h.inverse(), hx, hy, side)});
        }
    return f;
}

Complex residue_scale_oracle() { return kI / (4.0 * kTwoPi); }

ComplexMatrix extrapolate_to_infinity(const std::vector<double>& ladder, const std::vector<ComplexMatrix>& values,
                                      double* spread) {
    if (ladder.size() < 3 || values.size() != ladder.size()) throw Error("residue ladder needs at least three rungs");
    std::vector<double> t;
    for (double y : ladder) {
        if (!(y > 0.0)) throw Error("residue ladder rungs must be positive");
        t.push_back(1.0 / y);
    }
    const ComplexMatrix full = neville_at_zero(t, values);
    const ComplexMatrix shorter = neville_at_zero({t.begin() + 1, t.end()}, {values.begin() + 1, values.end()});
    const double d = (full - shorter).norm();
    if (spread) *spread = d;
    if (!(d <= 1e-6 * full.norm() + 1e-12)) {
        std::ostringstream os;
        os << "no residue limit: extrapolants differ by " << d << " at |R| = " << full.norm();
        throw Error(os.str());
    }
    return full;
}

ResidueResult residue(const ModelMetric& m, const std::vector<double>& ladder) {
    ResidueResult r;
    r.ladder = ladder;
    std::vector<ComplexMatrix> vals;
    for (double y : ladder) {
        const ModelJet j = m.jet({0.0, y});
        vals.push_back(-kI * (-0.25 * (j.log_dx - kI * j.log_dy)));
    }
    r.R = extrapolate_to_infinity(ladder, vals, &r.extrapolation_spread);

    const Sl2Data& s = m.sl2();
    const ComplexMatrix pinv = s.basis.partialPivLu().inverse();
    r.reference = pinv.adjoint() * s.N_adapted.transpose() * s.basis.adjoint();
    const double ref2 = r.reference.squaredNorm();
    r.scale = ref2 > 0.0 ? (r.reference.adjoint() * r.R).trace() / ref2 : Complex(0.0);
    const double rn = r.R.norm();
    const int n = m.dim();
    if (rn == 0.0) {
        r.profile.assign(n, 1);
        return r;
    }
    r.proportionality_err = (r.R - r.scale * r.reference).norm() / rn;
    ComplexMatrix unit = r.R / rn, pw = ComplexMatrix::Identity(n, n);
    for (int k = 0; k < n; ++k) pw = pw * unit;
    r.nilpotency = pw.norm();
    r.profile = jordan_profile(NilpotentLog::from_matrix(unit));
    return r;
}

HiggsNormReport higgs_norm_check(const HiggsField& theta, int sections, unsigned long long seed) {
    HiggsNormReport rep;
    double ymin = std::numeric_limits<double>::infinity();
    std::vector<ComplexMatrix> unit;
    for (const auto& s : theta.samples) {
        unit.push_back(unitary_frame(s.h, s.theta));
        Eigen::JacobiSVD<ComplexMatrix> svd(unit.back());
        const double v = s.p.y * svd.singularValues()(0);
        rep.values.push_back(v);
        rep.sup = std::max(rep.sup, v);
        rep.finite = rep.finite && std::isfinite(v);
        ymin = std::min(ymin, s.p.y);
    }
    // Along increasing y, the max over samples sharing a y must not grow.
    std::vector<std::pair<double, double>> by_y;
    for (size_t i = 0; i < theta.samples.size(); ++i)
        if (theta.samples[i].p.y >= 2.0 * ymin) by_y.emplace_back(theta.samples[i].p.y, rep.values[i]);
    std::sort(by_y.begin(), by_y.end());
    std::vector<double> level_max;
    for (size_t i = 0; i < by_y.size(); ++i) {
        if (i == 0 || by_y[i].first != by_y[i - 1].first) level_max.push_back(by_y[i].second);
        else level_max.back() = std::max(level_max.back(), by_y[i].second);
    }
    for (size_t i = 1; i < level_max.size(); ++i)
        rep.non_increasing = rep.non_increasing && level_max[i] <= level_max[i - 1] * (1.0 + 1e-9);

    if (sections > 0 && theta.nx > 0 && !theta.samples.empty()) {
        // Smooth sections written in the unitary frame: a few low Fourier modes
        // with random coefficients, times a bump in y vanishing at the ends.
        const int n = static_cast<int>(theta.samples[0].theta.rows());
        double y_lo = ymin, y_hi = ymin;
        for (const auto& s : theta.samples) y_hi = std::max(y_hi, s.p.y);
        Rng rng(seed);
        for (int t = 0; t < sections; ++t) {
            std::vector<ComplexVector> coef(3, ComplexVector(n));
            for (auto& c : coef)
                for (int a = 0; a < n; ++a) c(a) = Complex(rng.normal(), rng.normal());
            double num = 0.0, den = 0.0;
            for (size_t i = 0; i < theta.samples.size(); ++i) {
                const auto& p = theta.samples[i].p;
                const double u = (p.y - y_lo) / std::max(y_hi - y_lo, 1e-300);
                const double bump = std::sin(kTwoPi / 2.0 * u);
                const ComplexVector sv = bump * (coef[0] + std::cos(p.x) * coef[1] + std::sin(2.0 * p.x) * coef[2]);
                // Area form dx dy / y², and |dz|²_ω = y².
                const double w = 1.0 / (p.y * p.y);
                num += w * p.y * p.y * (unit[i] * sv).squaredNorm();
                den += w * sv.squaredNorm();
            }
            if (den > 0.0) rep.l2_ratio = std::max(rep.l2_ratio, num / den);
        }
    }
    return rep;
}

double integrability_residual(const GridMap& g) {
    auto theta_at = [&](int i, int k, ComplexMatrix* bbar) {
        const PosDefMetric h = g.extended(i, k);
        const ComplexMatrix hinv = h.inverse();
        const ComplexMatrix hx = (g.extended(i + 1, k).matrix() - g.extended(i - 1, k).matrix()) / (2.0 * g.hx());
        const ComplexMatrix hy = (g.extended(i, k + 1).matrix() - g.extended(i, k - 1).matrix()) / (2.0 * g.hy());
        if (bbar) *bbar = 0.5 * hinv * (hx + kI * hy);
        return from_derivatives(hinv, hx, hy, HiggsSide::Right);
    };
    double worst = 0.0;
    for (int k = 2; k <= g.ny() - 2; ++k)
        for (int i = 0; i < g.nx(); ++i) {
            ComplexMatrix b;
            const ComplexMatrix th = theta_at(i, k, &b);
            const ComplexMatrix tx = (theta_at(i + 1, k, nullptr) - theta_at(i - 1, k, nullptr)) / (2.0 * g.hx());
            const ComplexMatrix ty = (theta_at(i, k + 1, nullptr) - theta_at(i, k - 1, nullptr)) / (2.0 * g.hy());
            const ComplexMatrix res = 0.5 * (tx + kI * ty) + 0.5 * (b * th - th * b);
            worst = std::max(worst, unitary_frame(g.at(i, k), res).norm());
        }
    return worst;
}

double loglog_slope(const std::vector<double>& y, const std::vector<double>& values) {
    const size_t n = y.size();
    if (n < 2 || values.size() != n) throw Error("slope needs matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double a = std::log(y[i]), b = std::log(values[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hb
