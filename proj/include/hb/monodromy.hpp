#pragma once

#include <optional>
#include <vector>

#include "hb/exact.hpp"
#include "hb/mats.hpp"

namespace hb {

/// A unipotent matrix gamma: (gamma - I)^n = 0. Construction validates,
/// exactly when every entry is rational and to 1e-10 otherwise.
class UnipotentMonodromy {
public:
    explicit UnipotentMonodromy(const ComplexMatrix& gamma);

    const ComplexMatrix& gamma() const { return gamma_; }
    const std::optional<RationalMatrix>& exact() const { return exact_; }
    int dim() const { return static_cast<int>(gamma_.rows()); }

private:
    ComplexMatrix gamma_;
    std::optional<RationalMatrix> exact_;
};

/// Nilpotent logarithm N of a unipotent monodromy (or a nilpotent matrix given directly).
struct NilpotentLog {
    ComplexMatrix N;
    std::optional<RationalMatrix> exact;

    int dim() const { return static_cast<int>(N.rows()); }
    /// Wraps a nilpotent matrix; throws when N^n != 0.
    static NilpotentLog from_matrix(const ComplexMatrix& n);
};

NilpotentLog log_unipotent(const UnipotentMonodromy& gamma);

/// Jordan block sizes of N from the rank sequence of its powers, descending.
std::vector<int> jordan_profile(const NilpotentLog& n);

struct Sl2Block {
    int size = 0;
    /// Adapted basis vectors, ordered by ascending weight label.
    std::vector<ComplexVector> basis;
    std::vector<int> labels;
};

struct ExactSl2 {
    RationalMatrix N, basis, H0, Y, Nminus;
};

/// Jacobson-Morozov data of a nilpotent N.
///
/// Labels follow the filtration convention N e_j = e_{j-2}, Y e_j = j e_j.
/// The sl2 neutral element is H0 = -Y, so that [H0, N] = 2N,
/// [H0, N-] = -2N- and [N, N-] = H0 hold simultaneously.
struct Sl2Data {
    NilpotentLog N;
    std::vector<int> profile;
    std::vector<Sl2Block> blocks;
    /// Columns are the adapted basis, block by block (descending size),
    /// ascending labels inside a block.
    ComplexMatrix basis;
    std::vector<int> labels;
    std::vector<int> block_of_column;
    /// Flat-frame matrices.
    ComplexMatrix H0, Y, Nminus;
    /// The same operators in the adapted basis.
    ComplexMatrix N_adapted, H0_adapted, Y_adapted, Nminus_adapted;
    std::optional<ExactSl2> exact;

    int dim() const { return N.dim(); }
};

Sl2Data sl2_triple(const NilpotentLog& n);

struct BracketReport {
    bool exact = false;       // evaluated in rational arithmetic
    double h_n = 0.0;         // ||[H0,N] - 2N||
    double h_nminus = 0.0;    // ||[H0,N-] + 2N-||
    double n_nminus = 0.0;    // ||[N,N-] - H0||
    double chain = 0.0;       // ||N P - P N_adapted||
    bool holds() const { return h_n == 0.0 && h_nminus == 0.0 && n_nminus == 0.0 && chain == 0.0; }
    bool holds(double tol) const { return h_n <= tol && h_nminus <= tol && n_nminus <= tol && chain <= tol; }
};

BracketReport check_brackets(const Sl2Data& s);

/// Increasing filtration W_l, one subspace (as basis columns) per weight.
struct WeightFiltration {
    std::vector<int> weights;
    std::vector<ComplexMatrix> spaces;
    std::optional<std::vector<RationalMatrix>> exact;

    /// W_l for an arbitrary integer l (zero below the lowest weight, everything above the highest).
    ComplexMatrix space(int l) const;
    int dim_at(int l) const;
};

WeightFiltration weight_filtration(const Sl2Data& s);
WeightFiltration weight_filtration(const NilpotentLog& n);

/// Independent construction W_l = sum over a,c >= 0 with a - c - 1 <= l of
/// ker N^a ∩ Im N^c; uses no sl2 data.
WeightFiltration weight_filtration_from_kernels(const NilpotentLog& n);

struct FiltrationReport {
    bool exact = false;
    bool nested = false;
    bool lowers_by_two = false;   // N W_l ⊆ W_{l-2}
    bool gr_isomorphic = false;   // N^l : Gr_l -> Gr_{-l} bijective for l > 0
    bool ok() const { return nested && lowers_by_two && gr_isomorphic; }
};

FiltrationReport check_filtration(const NilpotentLog& n, const WeightFiltration& w);

/// Subspace equality of every W_l.
bool same_filtration(const WeightFiltration& a, const WeightFiltration& b);

/// Jordan block matrix (upper shift) with the given block sizes, as a direct sum.
ComplexMatrix jordan_matrix(const std::vector<int>& profile);

}  // namespace hb
