#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hb/mats.hpp"
#include "hb/model.hpp"

namespace hb {

/// Samples of an equivariant map on the fundamental domain
/// [0, 2π) × [y0, y1] of the cylinder.
///
/// Columns i = 0..nx-1 sit at x = 2π i/nx; rows k = 0..ny at y0 + k·hy.
/// Rows 0 and ny hold Dirichlet data. Across the seam the neighbor of
/// column nx-1 is act(twist, column 0), so equivariance holds by
/// construction.
class GridMap {
public:
    GridMap(int nx, int ny, double y0, double y1, ComplexMatrix twist, const PosDefMetric& fill);

    /// Samples the model everywhere, boundary rows included.
    static GridMap from_model(const ModelMetric& m, int nx, int ny, double y0, double y1);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int dim() const { return static_cast<int>(twist_.rows()); }
    double y0() const { return y0_; }
    double y1() const { return y1_; }
    double hx() const { return kTwoPi / nx_; }
    double hy() const { return (y1_ - y0_) / ny_; }
    double x(int i) const { return hx() * i; }
    double y(int k) const { return y0_ + hy() * k; }
    const ComplexMatrix& twist() const { return twist_; }

    const PosDefMetric& at(int i, int k) const { return h_[index(i, k)]; }
    PosDefMetric& at(int i, int k) { return h_[index(i, k)]; }
    /// Sample at any integer column, unwinding the seam with powers of the twist.
    PosDefMetric extended(int i, int k) const;

    /// Max relative mismatch between H(0, k) and the ghost column
    /// extended(nx, k) pulled back by the inverse twist. Zero up to roundoff.
    double seam_deviation() const;

private:
    int index(int i, int k) const { return k * nx_ + i; }

    int nx_, ny_;
    double y0_, y1_;
    ComplexMatrix twist_, twist_inv_;
    std::vector<PosDefMetric> h_;
};

enum class TensionKind {
    /// ∂_x(H^-1 H_x) + ∂_y(H^-1 H_y) with centered differences.
    Centered,
    /// H^{-1}·Σ_nbrs log_H(H_nbr)/h², the gradient of the discrete energy.
    Geodesic,
};

/// Tension at interior rows (k = 1..ny-1), indexed [k-1][i], as H^-1 τ.
std::vector<std::vector<ComplexMatrix>> tension(const GridMap& g, TensionKind kind = TensionKind::Geodesic);

/// Sup over interior nodes of the invariant norm ‖H^{1/2}(H^-1 τ)H^{-1/2}‖_F.
double tension_sup(const GridMap& g, TensionKind kind = TensionKind::Geodesic);

/// Σ ½d²·(hy/hx) over x-edges plus Σ ½d²·(hx/hy) over y-edges.
double discrete_energy(const GridMap& g);

struct FlowConfig {
    /// Over-relaxation factor in (0, 2); 0 picks the optimal value of the flat problem.
    double step = 0.0;
    double tol = 1e-8;
    int max_sweeps = 20000;
    /// Residual evaluation period, in sweeps.
    int check_every = 10;
};

struct FlowResult {
    GridMap map;
    int sweeps = 0;
    bool converged = false;
    double residual = 0.0;
    double step = 0.0;
    int backtracks = 0;
    /// Total discrete energy after each sweep; index 0 is the initial energy.
    std::vector<double> energy;
    double max_seam_deviation = 0.0;
};

/// Minimizes the discrete energy with Dirichlet rows fixed; stops when the
/// geodesic tension_sup drops below tol.
///
/// Red-black nonlinear SOR. Each node moves along
/// the geodesic toward the weighted Karcher step of its neighbors. A move
/// is accepted when the local energy provably drops: either the measured
/// drop is positive, or the step is below the Hessian comparison bound for
/// curvature >= -1, which certifies descent when the drop is under
/// roundoff. Rejected moves are halved. Throws "flow stalled" when no
/// accepted move exists for a node that is not yet stationary.
FlowResult relax(GridMap g, const FlowConfig& cfg = {});

/// Moves each interior sample by a random tangent vector of invariant norm
/// at most `size` (so dist <= size). Boundary rows are left alone.
GridMap perturb(const GridMap& g, double size, unsigned long long seed);

/// Max over nodes of dist(a(i,k), b(i,k)).
double sup_dist(const GridMap& a, const GridMap& b);

struct GradientBound {
    /// sup over interior nodes of |dh|²_ω / y², which equals the flat density.
    double C = 0.0;
    /// Max of |dh|²_ω / y² along each interior row.
    std::vector<double> row_max;
    bool finite = true;
    bool decreasing_in_y = true;
};

/// |dh|²_ω = y²·e_flat from centered geodesic differences.
GradientBound gradient_bound_check(const GridMap& g);

/// CSV with header i,k,x,y,dist of dist(g, reference) per node.
void write_dist_csv(std::ostream& os, const GridMap& g, const GridMap& reference);

}  // namespace hb
