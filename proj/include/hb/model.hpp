#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hb/mats.hpp"
#include "hb/monodromy.hpp"

namespace hb {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// exp(A) for nilpotent A by its terminating series.
ComplexMatrix nilpotent_exp(const ComplexMatrix& a);

/// A point of the universal cover of the punctured disk: x angular
/// (period 2π), y = -log r.
struct PuncturedPoint {
    double x = 0.0;
    double y = 1.0;

    static PuncturedPoint from_polar(double r, double x) { return {x, -std::log(r)}; }
    double r() const { return std::exp(-y); }
};

/// How the sl2 data is turned into a metric.
///
/// The map is exp(x/2π · N) · diag(c_j (λy)^{e_j}) · exp(x/2π · N)* in the
/// adapted basis. `Conformal` takes λ = 1/2π and the sl2-orbit weights c_j
/// (so that N* = N- for the metric at y = 2π); it is a harmonic map.
/// `Cylinder` takes λ = 1 and c_j = 1, which keeps ‖e_j‖² = y^{-j} but is
/// not harmonic. Descending exponents e_j = -j give finite energy; ascending
/// e_j = +j (always unweighted) is kept as a negative control.
struct ModelConvention {
    enum class Radial { Conformal, Cylinder };
    Radial radial = Radial::Conformal;
    bool descending = true;

    double angular_scale() const { return 1.0 / kTwoPi; }
    double radial_scale() const { return radial == Radial::Conformal ? 1.0 / kTwoPi : 1.0; }
    std::string radial_name() const { return radial == Radial::Conformal ? "y/2pi" : "y"; }
    std::string direction_name() const { return descending ? "descending" : "ascending"; }
};

/// Metric with first derivatives. Log-derivatives H^-1 H_x, H^-1 H_y are
/// assembled analytically so no ill-conditioned inverse is formed.
struct ModelJet {
    PosDefMetric H;
    ComplexMatrix Hx, Hy;
    ComplexMatrix log_dx, log_dy;
};

class ModelMetric {
public:
    ModelMetric(Sl2Data sl2, double alpha, ModelConvention convention = {});

    const Sl2Data& sl2() const { return sl2_; }
    double alpha() const { return alpha_; }
    const ModelConvention& convention() const { return conv_; }
    int dim() const { return sl2_.dim(); }
    /// exp(N), the monodromy transported by x -> x + 2π.
    const ComplexMatrix& monodromy() const { return monodromy_; }
    /// Exponent e_j of the diagonal factor for basis column c.
    int exponent(int column) const;
    /// Constant c_j of the diagonal factor; product over a block is one.
    double weight(int column) const { return weights_.at(column); }

    /// Throws "outside model chart" when y <= -log(alpha).
    void require_in_chart(const PuncturedPoint& p) const;

    PosDefMetric eval(const PuncturedPoint& p) const;
    ModelJet jet(const PuncturedPoint& p) const;
    /// Same quantities in the adapted basis (H_flat = P H_adapted P*).
    ModelJet jet_adapted(const PuncturedPoint& p) const;

private:
    Sl2Data sl2_;
    double alpha_;
    ModelConvention conv_;
    ComplexMatrix monodromy_;
    ComplexMatrix basis_inv_;
    std::vector<double> weights_;
};

PosDefMetric eval_model(const ModelMetric& m, const PuncturedPoint& p);

struct EquivarianceResult {
    double max_rel_deviation = 0.0;
    int samples = 0;
};

/// Max relative deviation of H(x+2π, y) from act(exp N, H(x, y)).
EquivarianceResult check_equivariance(const ModelMetric& m, const std::vector<PuncturedPoint>& samples);

/// tr((H^-1 H_x)²) + tr((H^-1 H_y)²) in the flat cylinder coordinates.
double energy_density(const ModelMetric& m, const PuncturedPoint& p);

/// Exact density coefficient c with e = c / y² for the given block size
/// (descending exponents); the ascending reading has no such law.
/// Conformal: 2b(b²-1)/3. Cylinder: 2(b-1)/(2π)² + b(b²-1)/3.
double energy_density_coefficient(int block, const ModelConvention& conv);
/// Σ over blocks of energy_density_coefficient.
double energy_density_coefficient(const std::vector<int>& profile, const ModelConvention& conv);

struct EnergyQuadrature {
    int x_nodes = 8;
    int panels_per_decade = 6;
    int gauss_points = 8;
    /// Past this y the exact y^-2 law is integrated analytically.
    double cutoff = 1e4;
};

struct EnergyResult {
    double numeric = 0.0;
    double closed_form = 0.0;
    double rel_err = 0.0;
    double tail = 0.0;
};

/// ∫_0^{2π} ∫_{y0}^∞ e dy dx with an analytic tail.
EnergyResult total_energy(const ModelMetric& m, double y0, const EnergyQuadrature& q = {});

/// ∫_0^{2π} ∫_{y0}^{y1} e dy dx with no tail; used for divergence probes.
double energy_on_interval(const ModelMetric& m, double y0, double y1, const EnergyQuadrature& q = {});

struct HarmonicityGrid {
    int nx = 32;
    int ny = 32;
    double x0 = 0.0;
    double x1 = kTwoPi;
    // One period in each direction, starting where λy = 1 for the conformal scale.
    double y0 = kTwoPi;
    double y1 = 2.0 * kTwoPi;
};

/// Sup over interior nodes of the invariant norm of the centered-difference
/// tension ∂_x(H^-1 H_x) + ∂_y(H^-1 H_y).
double harmonicity_residual(const ModelMetric& m, const HarmonicityGrid& grid);

/// (label j, ‖e_j‖²) at x = 0, in adapted-basis order: c_j (λy)^{e_j}.
std::vector<std::pair<int, double>> norm_profile(const ModelMetric& m, double y);

}  // namespace hb
