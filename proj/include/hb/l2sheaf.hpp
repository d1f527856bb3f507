#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hb/mats.hpp"
#include "hb/monodromy.hpp"

namespace hb {

/// Wedge factors of a log form, as bits.
inline constexpr unsigned kDt1 = 1u;  // dt1/t1
inline constexpr unsigned kDt2 = 2u;  // dt2/t2

/// One summand t^a · Π log^p(t_k) · (form) ⊗ v.
struct GermTerm {
    std::array<int, 2> a{0, 0};
    std::array<int, 2> logp{0, 0};
    unsigned form = 0;
    /// Exact weights (l1, l2) of v for W^1 and W^2; one-variable germs use labels[0].
    std::array<int, 2> labels{0, 0};
    /// Optional explicit vector, checked against the labels when filtration data is given.
    std::optional<ComplexVector> coefficient;

    int degree() const { return static_cast<int>((form & kDt1) != 0) + static_cast<int>((form & kDt2) != 0); }
};

struct GermExpression {
    int vars = 2;
    std::vector<GermTerm> terms;

    /// Common form degree; throws if terms disagree.
    int degree() const;
};

/// A basis splitting both weight filtrations at once, with optional Hodge
/// levels: W^k_l is spanned by the columns whose k-th label is <= l, and
/// F^p by the columns whose level is >= p.
struct FiltrationData {
    ComplexMatrix basis;
    std::vector<std::array<int, 2>> labels;
    std::vector<int> hodge;

    int dim() const { return static_cast<int>(basis.rows()); }
    /// One variable: labels from the sl2-adapted basis.
    static FiltrationData from_sl2(const Sl2Data& s);
    /// N1 = Na ⊗ 1, N2 = 1 ⊗ Nb on the tensor product; W^1 = W(N1) and
    /// W^2 = W(N1 + N2), so labels are (j_a, j_a + j_b).
    static FiltrationData product(const Sl2Data& a, const Sl2Data& b);

    /// Basis coordinates of v.
    ComplexVector coordinates(const ComplexVector& v) const;
};

/// D_ε = {L1/L2 > ε, L2 > ε} with L_k = -log|t_k|.
struct RegionSpec {
    double eps = 0.5;
};

struct L2Verdict {
    bool member = true;
    /// True when some term carries a log power, which the formulae do not cover.
    bool rejected = false;
    /// Certifying summand per term, or the reason it fails.
    std::vector<std::string> trace;
};

/// Membership in Ω^r(H)_(2) by matching each term against the four summands
/// of the explicit formulae (two variables) or tH + W_{<=0}, dt/t⊗(tH + W_{<=-2})
/// (one variable). A germ is a member iff every term is.
/// Throws "beyond Prop. 1 scope" for degree > 2 or more than two variables.
L2Verdict is_l2(const GermExpression& g, const RegionSpec& region = {}, const FiltrationData* f = nullptr);

/// How the oracle integrates ‖germ‖²: over L1, L2 > ε (Product, the default)
/// or over the literal sector L1 > εL2, L2 > ε (Sector, which disagrees with
/// the formulae and is kept to document that).
enum class NormRegion { Product, Sector };

struct NormModel {
    NormRegion region = NormRegion::Product;
};

struct NumericVerdict {
    bool member = true;
    /// Σ over terms of ∫‖term‖² dvol; +inf when any term diverges.
    double estimate = 0.0;
    std::vector<double> per_term;
};

/// Oracle: ‖v‖² = (L1/L2)^{l1} L2^{l2} (one variable L^l), |t^a|² = e^{-2a·L},
/// |log t|^{2p} ~ L^{2p}, |dt_k/t_k|² = L_k² and dvol = Π dθ_k dL_k / L_k².
/// Convergence is decided from the exponents; finite values are estimated by
/// exp-sinh quadrature. Throws "split germ first" for a coefficient that is
/// not pure of its stated labels.
NumericVerdict is_l2_numeric(const GermExpression& g, const RegionSpec& region = {}, const NormModel& model = {},
                             const FiltrationData* f = nullptr);

/// Splits every term with an explicit coefficient into pure-label parts
/// along the basis of f; zero parts are dropped. Deterministic order.
GermExpression split_germ(const GermExpression& g, const FiltrationData& f);

/// Formal Higgs action N_k ⊗ dt_k/t_k on one term: adds the wedge factor and
/// shifts labels by (-2,-2) for k = 1 and (0,-2) for k = 2. Empty when the
/// factor is already present.
std::optional<GermTerm> apply_higgs(const GermTerm& t, int k);

struct GradedProbe {
    bool in_Fp = false;
    bool graded_zero = false;
    bool in_Fp1 = false;
    /// in_Fp and graded_zero imply in_Fp1.
    bool kernel_ok = true;
    /// The graded image is L² with the quotient norm.
    bool graded_member = false;
    /// The constructed lift lies in F^pΩ^r_(2) and maps back onto the graded germ.
    bool lift_ok = true;
    GermExpression graded, lift;
};

/// One germ of F^pΩ^r against the sequence F^{p+1} -> F^p -> Ω^r ⊗ E^{p-r}.
/// Terms need explicit coefficients; f needs Hodge levels.
GradedProbe graded_sequence_probe(const FiltrationData& f, const GermExpression& g, int p);

}  // namespace hb
