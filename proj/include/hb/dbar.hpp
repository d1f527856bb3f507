#pragma once

#include <string>
#include <vector>

#include "hb/mats.hpp"

namespace hb {

/// Polar grid on Δ*_α: radii geometric from α·rmin_ratio to α (uniform in
/// s = log r), angles uniform. Fields are nr × ntheta matrices, row = radius.
struct PolarGrid {
    int nr = 256;
    int ntheta = 256;
    double alpha = 0.5;
    double rmin_ratio = 1e-3;

    PolarGrid() = default;
    PolarGrid(int nr_, int ntheta_, double alpha_, double rmin_ratio_ = 1e-3);

    double s(int j) const;
    double r(int j) const;
    double theta(int i) const;
    double ds() const;
    ComplexMatrix zeros() const;
};

/// ‖σ‖² = L^k with L = -log r.
struct WeightedLineBundle {
    int k = 0;
    double alpha = 0.5;
    /// Throws "excluded weight" for k = 1.
    void validate() const;
};

struct DbarProblem {
    PolarGrid grid;
    ComplexMatrix f;  // coefficient of f dt̄ ⊗ σ
};

struct DbarSolution {
    ComplexMatrix u;
    /// sup |∂̄u - f| / sup |f| over radii with a full difference stencil.
    double residual = 0.0;
    double norm_u = 0.0;
    double norm_f = 0.0;
    /// norm_u / norm_f.
    double ratio = 0.0;
    /// Value at the puncture subtracted for k > 1; zero otherwise.
    Complex removed_constant{0.0, 0.0};
};

enum class FieldKind { Section, Form01 };

/// Sections ∫|u|² L^k dA_ω; (0,1)-forms ∫|f|² L^k |dt̄|²_ω dA_ω with
/// dA_ω = dA/(r²L²) and |dt̄|²_ω = r²L². The part below the innermost radius
/// is integrated from the law r^a L^c fitted to the three innermost rings.
/// Returns +inf for a non-integrable tail.
double weighted_norm(const PolarGrid& g, const ComplexMatrix& field, int k, FieldKind kind);

/// Cauchy transform (1/π)∬ f(s)/(t-s) dA(s), evaluated exactly per angular
/// mode by radial recursions; cells use 4-point Gauss with cubic
/// interpolation in log r.
ComplexMatrix cauchy_transform(const PolarGrid& g, const ComplexMatrix& f);

/// ∂u/∂t̄: spectral in θ, fourth-order differences in log r. Rows without
/// a full stencil are zero.
ComplexMatrix dbar_apply(const PolarGrid& g, const ComplexMatrix& u);

/// Solves ∂̄u = f with u L² for ‖σ‖² = L^k. k < 1 keeps the plain transform;
/// k > 1 subtracts its value at the puncture. Throws "excluded weight" for
/// k = 1 and "data not L²" when f has infinite weighted norm.
DbarSolution solve_dbar(const DbarProblem& p, const WeightedLineBundle& b);

struct ManufacturedCase {
    std::string name;
    ComplexMatrix f;
    ComplexMatrix u;  // exact transform when known, else empty
};

/// "constant": f ≡ 1, u = t̄. "ring": f = χ(r)/t with χ = 1 - exp(-r²/r0²),
/// r0 = α/5, u = ψ(r) e^{-2iθ}. "sweep": f = e^{iθ}(1 - (r/α)²)², whose
/// transform has a nonzero value at the puncture.
ManufacturedCase manufactured(const std::string& name, const PolarGrid& g);

struct SweepRow {
    int k = 0;
    bool refused = false;
    double C = 0.0;
    double norm_u = 0.0;
    double norm_f = 0.0;
};

/// C(k) = ‖u‖/‖f‖ for each k; k = 1 is reported as refused.
std::vector<SweepRow> sweep_constant(const PolarGrid& g, const ComplexMatrix& f, const std::vector<int>& ks);

}  // namespace hb
