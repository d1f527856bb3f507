#include "hb/model.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

namespace hb {

ComplexMatrix nilpotent_exp(const ComplexMatrix& a) {
    const Eigen::Index n = a.rows();
    ComplexMatrix result = ComplexMatrix::Identity(n, n);
    ComplexMatrix term = ComplexMatrix::Identity(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        term = term * a / static_cast<double>(k);
        result += term;
    }
    return result;
}

ModelMetric::ModelMetric(Sl2Data sl2, double alpha, ModelConvention convention)
    : sl2_(std::move(sl2)), alpha_(alpha), conv_(convention) {
    if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw Error("alpha must lie in (0,1)");
    monodromy_ = nilpotent_exp(sl2_.N.N);
    basis_inv_ = sl2_.basis.partialPivLu().inverse();

    // c_{k+1}/c_k = (k+1)(b-1-k) inside a block, normalized to unit product.
    const int n = dim();
    weights_.assign(n, 1.0);
    const bool weighted = conv_.descending && conv_.radial == ModelConvention::Radial::Conformal;
    for (int start = 0; weighted && start < n;) {
        const int b = sl2_.blocks.at(sl2_.block_of_column[start]).size;
        std::vector<double> logc(b, 0.0);
        double mean = 0.0;
        for (int k = 1; k < b; ++k) {
            logc[k] = logc[k - 1] + std::log(double(k) * double(b - k));
            mean += logc[k] / b;
        }
        for (int k = 0; k < b; ++k) weights_[start + k] = std::exp(logc[k] - mean);
        start += b;
    }
}

int ModelMetric::exponent(int column) const {
    const int j = sl2_.labels.at(column);
    return conv_.descending ? -j : j;
}

void ModelMetric::require_in_chart(const PuncturedPoint& p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.y <= -std::log(alpha_)) {
        std::ostringstream os;
        os << "outside model chart: y=" << p.y << " must exceed -log(alpha)=" << -std::log(alpha_);
        throw Error(os.str());
    }
}

ModelJet ModelMetric::jet_adapted(const PuncturedPoint& p) const {
    require_in_chart(p);
    const int n = dim();
    const double s = conv_.angular_scale();
    const double ly = conv_.radial_scale() * p.y;
    const ComplexMatrix& na = sl2_.N_adapted;

    const ComplexMatrix e = nilpotent_exp(s * p.x * na);
    const ComplexMatrix einv_adj = nilpotent_exp(-s * p.x * na).adjoint();

    Eigen::VectorXd d(n), dlog(n);
    for (int k = 0; k < n; ++k) {
        d(k) = weights_[k] * std::pow(ly, exponent(k));
        dlog(k) = exponent(k) / p.y;
    }
    // D^-1 (sN) D without forming D^-1: entries scale by (λy)^{e_k - e_i}.
    ComplexMatrix twisted(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            twisted(i, k) = na(i, k) == 0.0 ? Complex(0.0)
                                             : s * na(i, k) * (weights_[k] / weights_[i]) * std::pow(ly, exponent(k) - exponent(i));

    const ComplexMatrix h = e * d.asDiagonal() * e.adjoint();
    ModelJet out;
    out.H = PosDefMetric(h);
    out.Hx = s * (na * h + h * na.adjoint());
    out.Hy = e * (dlog.cwiseProduct(d)).asDiagonal() * e.adjoint();
    out.log_dx = einv_adj * (twisted + s * na.adjoint()) * e.adjoint();
    out.log_dy = einv_adj * dlog.asDiagonal() * e.adjoint();
    return out;
}

ModelJet ModelMetric::jet(const PuncturedPoint& p) const {
    ModelJet a = jet_adapted(p);
    const ComplexMatrix& pb = sl2_.basis;
    const ComplexMatrix pinv_adj = basis_inv_.adjoint();
    ModelJet out;
    out.H = PosDefMetric(ComplexMatrix(pb * a.H.matrix() * pb.adjoint()));
    out.Hx = pb * a.Hx * pb.adjoint();
    out.Hy = pb * a.Hy * pb.adjoint();
    out.log_dx = pinv_adj * a.log_dx * pb.adjoint();
    out.log_dy = pinv_adj * a.log_dy * pb.adjoint();
    return out;
}

PosDefMetric ModelMetric::eval(const PuncturedPoint& p) const { return jet(p).H; }

PosDefMetric eval_model(const ModelMetric& m, const PuncturedPoint& p) { return m.eval(p); }

EquivarianceResult check_equivariance(const ModelMetric& m, const std::vector<PuncturedPoint>& samples) {
    EquivarianceResult r;
    for (const auto& p : samples) {
        const PosDefMetric shifted = m.eval({p.x + kTwoPi, p.y});
        const PosDefMetric moved = act(m.monodromy(), m.eval(p));
        r.max_rel_deviation = std::max(r.max_rel_deviation, relative_error(shifted.matrix(), moved.matrix()));
        ++r.samples;
    }
    return r;
}

double energy_density(const ModelMetric& m, const PuncturedPoint& p) {
    // Frame independent, so the better conditioned adapted frame is used.
    const ModelJet j = m.jet_adapted(p);
    return ((j.log_dx * j.log_dx).trace() + (j.log_dy * j.log_dy).trace()).real();
}

double energy_density_coefficient(int block, const ModelConvention& conv) {
    if (!conv.descending) throw Error("ascending exponents have no y^-2 energy law");
    const double b = block;
    const double casimir = b * (b * b - 1.0) / 3.0;
    if (conv.radial == ModelConvention::Radial::Conformal) return 2.0 * casimir;
    const double ratio = conv.angular_scale() / conv.radial_scale();
    return 2.0 * (b - 1.0) * ratio * ratio + casimir;
}

double energy_density_coefficient(const std::vector<int>& profile, const ModelConvention& conv) {
    double c = 0.0;
    for (int b : profile) c += energy_density_coefficient(b, conv);
    return c;
}

namespace {

// Mean over x of the density at height y (periodic trapezoid rule).
double x_mean_density(const ModelMetric& m, double y, int x_nodes) {
    double acc = 0.0;
    for (int i = 0; i < x_nodes; ++i) acc += energy_density(m, {kTwoPi * i / x_nodes, y});
    return acc / x_nodes;
}

double integrate_y(const ModelMetric& m, double y0, double y1, const EnergyQuadrature& q) {
    using boost::math::quadrature::gauss;
    const double t0 = std::log(y0), t1 = std::log(y1);
    const int panels = std::max(1, static_cast<int>(std::ceil((t1 - t0) / std::log(10.0) * q.panels_per_decade)));
    const double dt = (t1 - t0) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = t0 + k * dt;
        acc += gauss<double, 10>::integrate(
            [&](double t) {
                const double y = std::exp(t);
                return x_mean_density(m, y, q.x_nodes) * y;
            },
            a, a + dt);
    }
    return kTwoPi * acc;
}

}  // namespace

double energy_on_interval(const ModelMetric& m, double y0, double y1, const EnergyQuadrature& q) {
    m.require_in_chart({0.0, y0});
    if (!(y1 > y0)) throw Error("energy interval must have y1 > y0");
    return integrate_y(m, y0, y1, q);
}

EnergyResult total_energy(const ModelMetric& m, double y0, const EnergyQuadrature& q) {
    m.require_in_chart({0.0, y0});
    EnergyResult r;
    const double ycut = std::max(q.cutoff, 10.0 * y0);
    // The tail uses e = c/y²; check that law before trusting it.
    const double c0 = x_mean_density(m, y0, q.x_nodes) * y0 * y0;
    const double c1 = x_mean_density(m, ycut, q.x_nodes) * ycut * ycut;
    if (!std::isfinite(c1) || std::abs(c1 - c0) > 1e-6 * std::max(1.0, std::abs(c0))) {
        std::ostringstream os;
        os << "energy quadrature diverged: y^2 e(y) is " << c0 << " at y=" << y0 << " but " << c1
           << " at y=" << ycut;
        throw Error(os.str());
    }
    r.tail = kTwoPi * c1 / ycut;
    r.numeric = integrate_y(m, y0, ycut, q) + r.tail;
    r.closed_form = kTwoPi * energy_density_coefficient(m.sl2().profile, m.convention()) / y0;
    r.rel_err = r.closed_form == 0.0 ? std::abs(r.numeric) : std::abs(r.numeric - r.closed_form) / r.closed_form;
    return r;
}

double harmonicity_residual(const ModelMetric& m, const HarmonicityGrid& g) {
    const double hx = (g.x1 - g.x0) / g.nx;
    const double hy = (g.y1 - g.y0) / g.ny;
    std::vector<ComplexMatrix> h((g.nx + 1) * (g.ny + 1));
    auto at = [&](int i, int j) -> ComplexMatrix& { return h[j * (g.nx + 1) + i]; };
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) at(i, j) = m.eval({g.x0 + i * hx, g.y0 + j * hy}).matrix();

    double worst = 0.0;
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const PosDefMetric hc(at(i, j));
            const ComplexMatrix hinv = hc.inverse();
            const ComplexMatrix dx = hinv * (at(i + 1, j) - at(i - 1, j)) / (2.0 * hx);
            const ComplexMatrix dy = hinv * (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy);
            const ComplexMatrix lap = hinv * ((at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hx * hx) +
                                              (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hy * hy));
            const ComplexMatrix t = lap - dx * dx - dy * dy;
            // Invariant norm of the tension vector H t at H.
            worst = std::max(worst, (hc.sqrt() * t * hc.inverse_sqrt()).norm());
        }
    }
    return worst;
}

std::vector<std::pair<int, double>> norm_profile(const ModelMetric& m, double y) {
    const ModelJet j = m.jet_adapted({0.0, y});
    std::vector<std::pair<int, double>> out;
    for (int k = 0; k < m.dim(); ++k) out.emplace_back(m.sl2().labels[k], j.H.matrix()(k, k).real());
    return out;
}

}  // namespace hb
