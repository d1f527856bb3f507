#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "hb/model.hpp"

namespace hb {

using SparseOp = Eigen::SparseMatrix<Complex>;

/// Rectangle [x0,x1]×[y0,y1] cut into nx×ny cells; forms live on interior
/// nodes and vanish outside, which makes centered differences skew.
struct KahlerGrid {
    int nx = 32;
    int ny = 32;
    double x0 = 0.0, x1 = kTwoPi;
    double y0 = 2.0, y1 = 2.0 + kTwoPi;

    int cols() const { return nx - 1; }
    int rows() const { return ny - 1; }
    int nodes() const { return cols() * rows(); }
    double hx() const { return (x1 - x0) / nx; }
    double hy() const { return (y1 - y0) / ny; }
    double x(int c) const { return x0 + (c + 1) * hx(); }
    double y(int r) const { return y0 + (r + 1) * hy(); }
};

/// Base metric ω = σ(dx² + dy²): σ = 1 or the Poincaré σ = 1/y².
enum class KahlerBase { Euclidean, Poincare };

/// Fiber data at a point: the metric H and A = H^-1 H_z, B = H^-1 H_z̄.
struct BundlePoint {
    ComplexMatrix H, A, B;
};
using BundleData = std::function<BundlePoint(double x, double y)>;

/// Discrete D'_u, D''_u, D, D^c_u, Λ on total forms (f, a dz, c dz̄, w dz∧dz̄)
/// with fiber dimension n, together with the weighted inner product.
///
/// With θ = -½A dz and θ† = -½B dz̄:
///   D'_u  f = (f_z + ½Af) dz - ½Bf dz̄,   D'_u (a,c) = (c_z + ½Ac + ½Ba) dz∧dz̄
///   D''_u f = -½Af dz + (f_z̄ + ½Bf) dz̄,  D''_u (a,c) = -(a_z̄ + ½Ba + ½Ac) dz∧dz̄
/// D = D'_u + D''_u, D^c_u = D''_u - D'_u and Λw = -2i w/σ.
/// Pointwise weights: σH on functions, 2H on 1-forms, (4/σ)H on 2-forms.
class OperatorQuad {
public:
    OperatorQuad(const KahlerGrid& grid, KahlerBase base, int n, const BundleData& bundle);

    /// Trivial flat bundle of rank n.
    static OperatorQuad flat(const KahlerGrid& grid, KahlerBase base, int n);
    /// The model's flat bundle with its metric.
    static OperatorQuad from_model(const ModelMetric& m, const KahlerGrid& grid, KahlerBase base);

    const KahlerGrid& grid() const { return grid_; }
    int fiber() const { return n_; }
    Eigen::Index size() const { return 4 * static_cast<Eigen::Index>(grid_.nodes()) * n_; }
    /// Offset of component (0=f, 1=a, 2=c, 3=w) at node (col, row).
    Eigen::Index index(int comp, int col, int row) const;

    const SparseOp& Dprime() const { return d1_; }
    const SparseOp& Ddprime() const { return d2_; }
    const SparseOp& D() const { return d_; }
    const SparseOp& Dc() const { return dc_; }
    const SparseOp& Lambda() const { return lambda_; }

    /// M^-1 A^H M, the adjoint for the weighted inner product.
    SparseOp adjoint(const SparseOp& a) const;
    const SparseOp& Ddprime_adjoint() const { return d2_adj_; }
    const SparseOp& D_adjoint() const { return d_adj_; }
    Complex inner(const ComplexVector& u, const ComplexVector& v) const;
    double norm(const ComplexVector& u) const;

private:
    KahlerGrid grid_;
    int n_;
    SparseOp m_, minv_;
    SparseOp d1_, d2_, d_, dc_, lambda_;
    SparseOp d2_adj_, d_adj_;
};

struct KahlerErrors {
    /// ‖(D''_u)*η + i[Λ,D'_u]η‖ / ‖(D''_u)*η‖
    double dbar_adjoint = 0.0;
    /// ‖D*η - i[Λ,D^c_u]η‖ / ‖D*η‖
    double d_adjoint = 0.0;
    /// ‖Δη - 2Δ''η‖ / ‖Δη‖
    double laplacian = 0.0;
};

/// Random test form: per-component random vectors times a fixed smooth bump
/// supported in the middle 60% of the rectangle. Scalar forms use n = 1.
ComplexVector bump_form(const OperatorQuad& q, unsigned long long seed);

/// Errors for one test form.
KahlerErrors kahler_errors(const OperatorQuad& q, const ComplexVector& eta);

struct KahlerRefinement {
    std::vector<int> grids;
    /// errors[g][t] for grid g and trial t.
    std::vector<std::vector<KahlerErrors>> errors;
    /// Smallest observed order per identity, over trials and consecutive grids.
    double min_order_dbar = 0.0, min_order_d = 0.0, min_order_laplacian = 0.0;
    /// Δ vs 2Δ'' error shrinks on every trial at every refinement.
    bool laplacian_monotone = true;
};

/// Runs `trials` seeded forms (same seeds on every grid) over the grid list.
KahlerRefinement kahler_identity_check(const std::function<OperatorQuad(const KahlerGrid&)>& build,
                                       const std::vector<int>& grids, int trials, unsigned long long seed,
                                       KahlerGrid domain = {});

}  // namespace hb
