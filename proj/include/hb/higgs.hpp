#pragma once

#include <vector>

#include "hb/flow.hpp"
#include "hb/model.hpp"

namespace hb {

/// Which side the metric derivative sits on: θ_z = -½ H^-1 ∂_z H (Right,
/// default) or θ_z = -½ (∂_z H) H^-1 (Left, kept as a negative control).
enum class HiggsSide { Right, Left };

struct HiggsSample {
    PuncturedPoint p;
    PosDefMetric h;
    /// dz coefficient in the flat frame.
    ComplexMatrix theta;
};

/// θ_z samples, ∂_z = ½(∂_x - i∂_y). Grid-extracted fields are row-major
/// over the interior rows with `nx` columns; point lists have nx = 0.
struct HiggsField {
    HiggsSide side = HiggsSide::Right;
    int nx = 0;
    std::vector<HiggsSample> samples;
};

/// Analytic extraction from the model jet.
HiggsField extract_higgs(const ModelMetric& m, const std::vector<PuncturedPoint>& points,
                         HiggsSide side = HiggsSide::Right);
/// Centered differences on the interior rows of a grid.
HiggsField extract_higgs(const GridMap& g, HiggsSide side = HiggsSide::Right);

struct ResidueResult {
    /// lim t θ_t along x = 0, with t = e^{iz} so that t θ_t = -i θ_z.
    ComplexMatrix R;
    /// Best complex multiple relating R to `reference`.
    Complex scale;
    /// The conjugate of N that R is compared against: P^{-*} N_adapted^T P*.
    ComplexMatrix reference;
    double proportionality_err = 0.0;
    /// ‖R^n‖ / ‖R‖^n (0 for R = 0).
    double nilpotency = 0.0;
    std::vector<int> profile;
    std::vector<double> ladder;
    /// Difference of the extrapolants from the ladder without its first rung and from the full ladder.
    double extrapolation_spread = 0.0;
};

/// Polynomial extrapolation in 1/y to 1/y = 0 (Neville) of values sampled
/// on the ladder. Throws "no residue limit" when dropping the first rung
/// moves the result by more than 1e-6 relative.
ComplexMatrix extrapolate_to_infinity(const std::vector<double>& ladder, const std::vector<ComplexMatrix>& values,
                                      double* spread = nullptr);

/// Residue of the model's Higgs field along x = 0.
ResidueResult residue(const ModelMetric& m, const std::vector<double>& ladder = {50.0, 100.0, 200.0, 400.0});

/// Frozen value of `scale` for the conformal model: i/(8π).
Complex residue_scale_oracle();

struct HiggsNormReport {
    /// sup |θ|_{ω,h} = y·‖H^{1/2} θ H^{-1/2}‖₂ over samples.
    double sup = 0.0;
    /// |θ|_{ω,h} per sample, in sample order.
    std::vector<double> values;
    bool finite = true;
    /// Non-increasing (to 1e-9 relative) in y over samples with y >= 2·y_min.
    bool non_increasing = true;
    /// max over test sections of ∫|θ s|²_{ω,h} / ∫|s|²_h (grid fields only).
    double l2_ratio = 0.0;
    bool pass() const { return finite && non_increasing; }
};

/// Pointwise norm check. For grid fields it also evaluates `sections`
/// random smooth unit-L² test sections with the given seed.
HiggsNormReport higgs_norm_check(const HiggsField& theta, int sections = 0, unsigned long long seed = 1);

/// Sup over interior samples of the unitary-frame norm of
/// ∂_z̄ θ + ½[H^-1 H_z̄, θ], which equals -τ/8 for θ = -½H^-1 H_z.
double integrability_residual(const GridMap& g);

/// log-log slope of values against y, least squares.
double loglog_slope(const std::vector<double>& y, const std::vector<double>& values);

}  // namespace hb
