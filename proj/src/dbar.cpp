#include "hb/dbar.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <unsupported/Eigen/FFT>

#include "hb/error.hpp"
#include "hb/parallel.hpp"

namespace hb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Fitted r-exponents within this band count as a bounded tail.
constexpr double kTailExponentBand = 0.05;

constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                        0.8611363115940526};
constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                        0.3478548451374538};

int mode_of(int col, int n) { return col < n / 2 ? col : col - n; }
int col_of(int mode, int n) { return ((mode % n) + n) % n; }

// Row-wise angular Fourier coefficients: column c holds mode mode_of(c).
ComplexMatrix to_modes(const ComplexMatrix& f) {
    Eigen::FFT<double> fft;
    const int n = static_cast<int>(f.cols());
    ComplexMatrix out(f.rows(), f.cols());
    std::vector<Complex> in(static_cast<std::size_t>(n)), res;
    for (Eigen::Index j = 0; j < f.rows(); ++j) {
        for (int i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = f(j, i);
        fft.fwd(res, in);
        for (int i = 0; i < n; ++i) out(j, i) = res[static_cast<std::size_t>(i)] / static_cast<double>(n);
    }
    return out;
}

ComplexMatrix from_modes(const ComplexMatrix& m) {
    Eigen::FFT<double> fft;
    const int n = static_cast<int>(m.cols());
    ComplexMatrix out(m.rows(), m.cols());
    std::vector<Complex> in(static_cast<std::size_t>(n)), res;
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        for (int i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = m(j, i) * static_cast<double>(n);
        fft.inv(res, in);
        for (int i = 0; i < n; ++i) out(j, i) = res[static_cast<std::size_t>(i)];
    }
    return out;
}

void require_shape(const PolarGrid& g, const ComplexMatrix& f) {
    if (f.rows() != g.nr || f.cols() != g.ntheta) throw Error("field does not match the polar grid");
    if (!f.allFinite()) throw Error("field has non-finite samples");
}

// ∫_{s_j}^{s_j+ds} φ(s) w(s) e^s ds with φ cubic in s through four neighbouring rings.
template <class W>
Complex cell_integral(const PolarGrid& g, const ComplexMatrix& modes, int col, int j, W w) {
    const int b = std::clamp(j - 1, 0, g.nr - 4);
    const double h = g.ds();
    Complex acc{0.0, 0.0};
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
        const double s = g.s(j) + 0.5 * h * (1.0 + kGaussX[q]);
        const double x = (s - g.s(b)) / h;
        Complex phi{0.0, 0.0};
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int c = 0; c < 4; ++c) {
                if (c != a) l *= (x - c) / static_cast<double>(a - c);
            }
            phi += l * modes(b + a, col);
        }
        acc += kGaussW[q] * phi * w(s) * std::exp(s);
    }
    return 0.5 * h * acc;
}

// Decay exponent β of φ ~ (ρ/r_0)^β below the innermost ring, from the two
// innermost rings; zero when they do not decay.
double inner_exponent(const PolarGrid& g, const ComplexMatrix& modes, int col) {
    const double a0 = std::abs(modes(0, col)), a1 = std::abs(modes(1, col));
    if (!(a0 > 0.0 && a1 > a0)) return 0.0;
    return std::log(a1 / a0) / g.ds();
}

// Transform plus its value at the puncture.
ComplexMatrix transform(const PolarGrid& g, const ComplexMatrix& f, Complex* center) {
    require_shape(g, f);
    const ComplexMatrix fm = to_modes(f);
    ComplexMatrix um = ComplexMatrix::Zero(g.nr, g.ntheta);
    const int n = g.ntheta;
    const double h = g.ds();
    Complex c0{0.0, 0.0};
    parallel_for(n, [&](int col) {
        const int m = mode_of(col, n);
        if (m == -n / 2) return;  // Nyquist mode has no image inside the band
        const int out = col_of(m - 1, n);
        if (m <= 0) {
            // ψ(r) = 2 ∫_0^r φ (ρ/r)^{1-m} dρ.
            const double p = 1.0 - m;
            const double beta = inner_exponent(g, fm, col);
            Complex J = fm(0, col) * g.r(0) / (2.0 - m + beta);
            um(0, out) = 2.0 * J;
            for (int j = 0; j + 1 < g.nr; ++j) {
                const double send = g.s(j + 1);
                J = J * std::exp(-p * h) + cell_integral(g, fm, col, j, [&](double s) { return std::exp(p * (s - send)); });
                um(j + 1, out) = 2.0 * J;
            }
        } else {
            // ψ(r) = -2 ∫_r^α φ (r/ρ)^{m-1} dρ.
            const double p = m - 1.0;
            Complex K{0.0, 0.0};
            um(g.nr - 1, out) = 0.0;
            for (int j = g.nr - 2; j >= 0; --j) {
                const double sj = g.s(j);
                K = K * std::exp(-p * h) + cell_integral(g, fm, col, j, [&](double s) { return std::exp(-p * (s - sj)); });
                um(j, out) = -2.0 * K;
            }
            if (m == 1) c0 = -2.0 * (K + fm(0, col) * g.r(0) / (1.0 + inner_exponent(g, fm, col)));
        }
    });
    if (center) *center = c0;
    return from_modes(um);
}

}  // namespace

PolarGrid::PolarGrid(int nr_, int ntheta_, double alpha_, double rmin_ratio_)
    : nr(nr_), ntheta(ntheta_), alpha(alpha_), rmin_ratio(rmin_ratio_) {
    if (nr < 8) throw Error("polar grid needs at least 8 radii");
    if (ntheta < 4 || ntheta % 2 != 0) throw Error("polar grid needs an even angle count >= 4");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0,1)");
    if (!(rmin_ratio > 0.0 && rmin_ratio < 1.0)) throw Error("rmin_ratio must lie in (0,1)");
}

double PolarGrid::ds() const { return -std::log(rmin_ratio) / (nr - 1); }
double PolarGrid::s(int j) const { return std::log(alpha * rmin_ratio) + j * ds(); }
double PolarGrid::r(int j) const { return std::exp(s(j)); }
double PolarGrid::theta(int i) const { return 2.0 * kPi * i / ntheta; }
ComplexMatrix PolarGrid::zeros() const { return ComplexMatrix::Zero(nr, ntheta); }

void WeightedLineBundle::validate() const {
    if (k == 1) throw Error("excluded weight: k = 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0,1)");
}

double weighted_norm(const PolarGrid& g, const ComplexMatrix& field, int k, FieldKind kind) {
    require_shape(g, field);
    const bool form = kind == FieldKind::Form01;
    auto ring = [&](int j) { return field.row(j).cwiseAbs2().mean(); };
    auto density = [&](int j) {
        const double L = -g.s(j);
        return form ? std::pow(L, k) * std::exp(2.0 * g.s(j)) : std::pow(L, k - 2);
    };
    const double h = g.ds();
    double body = 0.0;
    // Gregory end corrections make the uniform rule fourth order.
    constexpr std::array<double, 3> kEnd{3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    for (int j = 0; j < g.nr; ++j) {
        const int edge = std::min(j, g.nr - 1 - j);
        const double wt = edge < 3 ? kEnd[static_cast<std::size_t>(edge)] : 1.0;
        body += wt * h * ring(j) * density(j);
    }

    // Tail below the innermost ring from |field|² ~ A r^{ea} L^{ec}.
    double tail = 0.0;
    const double A0 = ring(0);
    if (A0 > 0.0) {
        double ea = 0.0, ec = 0.0;
        if (ring(1) > 0.0 && ring(2) > 0.0) {
            Eigen::Matrix3d M;
            Eigen::Vector3d rhs;
            for (int j = 0; j < 3; ++j) {
                M(j, 0) = g.s(j);
                M(j, 1) = std::log(-g.s(j));
                M(j, 2) = 1.0;
                rhs(j) = std::log(ring(j));
            }
            Eigen::Vector3d sol = M.fullPivLu().solve(rhs);
            ea = sol(0);
            ec = sol(1);
        }
        const double er = ea + (form ? 2.0 : 0.0);
        const double eL = ec + k - (form ? 0.0 : 2.0);
        const double L0 = -g.s(0);
        const double d0 = density(0);
        if (er < -kTailExponentBand) {
            tail = kInf;
        } else if (er <= kTailExponentBand) {
            // |field|² density ~ A0 d0 (L/L0)^{eL}.
            tail = eL < -1.0 ? A0 * d0 * L0 / (-eL - 1.0) : kInf;
        } else {
            boost::math::quadrature::exp_sinh<double> integrator;
            auto fn = [&](double L) {
                if (!std::isfinite(L)) return 0.0;
                return std::exp(-er * (L - L0) + eL * std::log(L / L0));
            };
            tail = A0 * d0 * integrator.integrate(fn, L0, kInf);
        }
    }
    const double total = 2.0 * kPi * (body + tail);
    return std::isfinite(total) ? std::sqrt(total) : kInf;
}

ComplexMatrix cauchy_transform(const PolarGrid& g, const ComplexMatrix& f) { return transform(g, f, nullptr); }

ComplexMatrix dbar_apply(const PolarGrid& g, const ComplexMatrix& u) {
    require_shape(g, u);
    const ComplexMatrix um = to_modes(u);
    ComplexMatrix out = ComplexMatrix::Zero(g.nr, g.ntheta);
    const int n = g.ntheta;
    const double h = g.ds();
    for (int col = 0; col < n; ++col) {
        const int m = mode_of(col, n);
        if (m + 1 == n / 2) continue;  // would alias onto the Nyquist mode
        const int dst = col_of(m + 1, n);
        for (int j = 2; j + 2 < g.nr; ++j) {
            Complex d = (-um(j + 2, col) + 8.0 * um(j + 1, col) - 8.0 * um(j - 1, col) + um(j - 2, col)) / (12.0 * h);
            out(j, dst) = (d - static_cast<double>(m) * um(j, col)) / (2.0 * g.r(j));
        }
    }
    return from_modes(out);
}

DbarSolution solve_dbar(const DbarProblem& p, const WeightedLineBundle& b) {
    b.validate();
    if (std::abs(b.alpha - p.grid.alpha) > 1e-12) throw Error("bundle radius does not match the grid");
    DbarSolution sol;
    sol.norm_f = weighted_norm(p.grid, p.f, b.k, FieldKind::Form01);
    if (!std::isfinite(sol.norm_f)) throw Error("data not L²");
    Complex center;
    sol.u = transform(p.grid, p.f, &center);
    if (b.k > 1) {
        sol.u.array() -= center;
        sol.removed_constant = center;
    }
    sol.norm_u = weighted_norm(p.grid, sol.u, b.k, FieldKind::Section);
    sol.ratio = sol.norm_f > 0.0 ? sol.norm_u / sol.norm_f : 0.0;

    const ComplexMatrix d = dbar_apply(p.grid, sol.u);
    double err = 0.0;
    for (int j = 2; j + 2 < p.grid.nr; ++j) err = std::max(err, (d.row(j) - p.f.row(j)).cwiseAbs().maxCoeff());
    const double scale = p.f.cwiseAbs().maxCoeff();
    sol.residual = scale > 0.0 ? err / scale : err;
    return sol;
}

ManufacturedCase manufactured(const std::string& name, const PolarGrid& g) {
    ManufacturedCase c;
    c.name = name;
    c.f = g.zeros();
    const Complex I{0.0, 1.0};
    if (name == "constant") {
        c.u = g.zeros();
        for (int j = 0; j < g.nr; ++j) {
            for (int i = 0; i < g.ntheta; ++i) {
                c.f(j, i) = 1.0;
                c.u(j, i) = g.r(j) * std::exp(-I * g.theta(i));
            }
        }
    } else if (name == "ring") {
        // χ = 1 - exp(-r²/r0²) gives ψ = (2/r²)∫_0^r ρχ dρ = 1 - (r0²/r²)(1 - exp(-r²/r0²)).
        const double r0 = 0.2 * g.alpha;
        c.u = g.zeros();
        for (int j = 0; j < g.nr; ++j) {
            const double r = g.r(j);
            const double q = (r * r) / (r0 * r0);
            const double chi = -std::expm1(-q);
            const double psi = 1.0 + std::expm1(-q) / q;
            for (int i = 0; i < g.ntheta; ++i) {
                const double th = g.theta(i);
                c.f(j, i) = chi * std::exp(-I * th) / r;
                c.u(j, i) = psi * std::exp(-2.0 * I * th);
            }
        }
    } else if (name == "sweep") {
        for (int j = 0; j < g.nr; ++j) {
            const double x = g.r(j) / g.alpha;
            for (int i = 0; i < g.ntheta; ++i) c.f(j, i) = std::exp(I * g.theta(i)) * std::pow(1.0 - x * x, 2);
        }
    } else {
        throw Error("unknown manufactured case: " + name);
    }
    return c;
}

std::vector<SweepRow> sweep_constant(const PolarGrid& g, const ComplexMatrix& f, const std::vector<int>& ks) {
    std::vector<SweepRow> rows;
    for (int k : ks) {
        SweepRow row;
        row.k = k;
        if (k == 1) {
            row.refused = true;
            rows.push_back(row);
            continue;
        }
        auto sol = solve_dbar({g, f}, {k, g.alpha});
        row.C = sol.ratio;
        row.norm_u = sol.norm_u;
        row.norm_f = sol.norm_f;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace hb
