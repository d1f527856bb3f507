#include "hb/monodromy.hpp"

#include <algorithm>
#include <map>

namespace hb {

namespace {

template <class T>
DenseMatrix<T> minus_identity(const DenseMatrix<T>& m) {
    return m - DenseMatrix<T>::identity(m.rows());
}

template <class T>
DenseMatrix<T> log_series(const DenseMatrix<T>& gamma) {
    const int n = gamma.rows();
    DenseMatrix<T> m = minus_identity(gamma);
    DenseMatrix<T> term = m;
    DenseMatrix<T> acc(n, n);
    for (int k = 1; k < std::max(n, 2); ++k) {
        T coeff = FieldOps<T>::one() / FieldOps<T>::from_int(k);
        if (k % 2 == 0) coeff = -coeff;
        acc = acc + term * coeff;
        term = term * m;
    }
    return acc;
}

template <class T>
std::vector<int> profile_from_ranks(const DenseMatrix<T>& n) {
    const int dim = n.rows();
    std::vector<int> ranks(dim + 2, 0);
    DenseMatrix<T> p = DenseMatrix<T>::identity(dim);
    for (int k = 0; k <= dim + 1; ++k) {
        ranks[k] = rank(p);
        p = p * n;
    }
    std::vector<int> sizes;
    for (int k = 1; k <= dim; ++k) {
        int at_least_k = ranks[k - 1] - ranks[k];
        int at_least_k1 = ranks[k] - ranks[k + 1];
        for (int c = 0; c < at_least_k - at_least_k1; ++c) sizes.push_back(k);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

template <class T>
struct AdaptedBasis {
    DenseMatrix<T> basis;
    std::vector<int> labels;
    std::vector<int> block_of_column;
    std::vector<int> block_sizes;
};

template <class T>
AdaptedBasis<T> adapted_basis(const DenseMatrix<T>& n, const std::vector<int>& profile) {
    const int dim = n.rows();
    const int top = profile.empty() ? 0 : profile.front();
    std::vector<DenseMatrix<T>> kernels(top + 2);
    kernels[0] = DenseMatrix<T>(dim, 0);
    for (int k = 1; k <= top + 1; ++k) kernels[k] = nullspace(power(n, k));

    std::map<int, int> wanted;
    for (int b : profile) ++wanted[b];

    AdaptedBasis<T> out;
    out.basis = DenseMatrix<T>(dim, 0);
    for (int b = top; b >= 1; --b) {
        if (wanted[b] == 0) continue;
        // Chain tops of length b span a complement of ker N^{b-1} + N ker N^{b+1} in ker N^b.
        DenseMatrix<T> occupied = span_sum(kernels[b - 1], n * kernels[b + 1]);
        int picked = 0;
        const DenseMatrix<T>& cand = kernels[b];
        for (int c = 0; c < cand.cols() && picked < wanted[b]; ++c) {
            DenseMatrix<T> v = cand.column(c);
            if (span_contains(occupied, v)) continue;
            occupied = occupied.hcat(v);
            std::vector<DenseMatrix<T>> chain;
            DenseMatrix<T> w = v;
            for (int i = 0; i < b; ++i) {
                chain.push_back(w);
                w = n * w;
            }
            const int block_id = static_cast<int>(out.block_sizes.size());
            // chain[i] = N^i v carries label b-1-2i; store ascending labels.
            for (int i = b - 1; i >= 0; --i) {
                out.basis = out.basis.hcat(chain[i]);
                out.labels.push_back(b - 1 - 2 * i);
                out.block_of_column.push_back(block_id);
            }
            out.block_sizes.push_back(b);
            ++picked;
        }
        if (picked != wanted[b]) throw Error("adapted basis construction failed (numerically unstable nilpotent?)");
    }
    return out;
}

template <class T>
struct Sl2Matrices {
    DenseMatrix<T> N_ad, H0_ad, Y_ad, Nminus_ad;
};

template <class T>
Sl2Matrices<T> adapted_matrices(const AdaptedBasis<T>& ab) {
    const int dim = static_cast<int>(ab.labels.size());
    Sl2Matrices<T> m{DenseMatrix<T>(dim, dim), DenseMatrix<T>(dim, dim), DenseMatrix<T>(dim, dim),
                     DenseMatrix<T>(dim, dim)};
    int col = 0;
    for (int b : ab.block_sizes) {
        for (int i = 0; i < b; ++i) {
            const int label = ab.labels[col + i];
            m.Y_ad(col + i, col + i) = FieldOps<T>::from_int(label);
            m.H0_ad(col + i, col + i) = FieldOps<T>::from_int(-label);
            if (i > 0) m.N_ad(col + i - 1, col + i) = FieldOps<T>::one();
            if (i + 1 < b) {
                // N- e_j = (m+1)(b-1-m) e_{j+2}, j = -(b-1) + 2m
                m.Nminus_ad(col + i + 1, col + i) = FieldOps<T>::from_int(static_cast<long long>(i + 1) * (b - 1 - i));
            }
        }
        col += b;
    }
    return m;
}

template <class T>
std::vector<DenseMatrix<T>> filtration_spaces(const DenseMatrix<T>& basis, const std::vector<int>& labels,
                                              const std::vector<int>& weights) {
    std::vector<DenseMatrix<T>> spaces;
    for (int w : weights) {
        DenseMatrix<T> s(basis.rows(), 0);
        for (size_t c = 0; c < labels.size(); ++c)
            if (labels[c] <= w) s = s.hcat(basis.column(static_cast<int>(c)));
        spaces.push_back(s);
    }
    return spaces;
}

template <class T>
std::vector<DenseMatrix<T>> kernel_image_spaces(const DenseMatrix<T>& n, const std::vector<int>& weights) {
    const int dim = n.rows();
    std::vector<DenseMatrix<T>> kers(dim + 1), ims(dim + 1);
    for (int k = 0; k <= dim; ++k) {
        DenseMatrix<T> p = power(n, k);
        kers[k] = k == 0 ? DenseMatrix<T>(dim, 0) : nullspace(p);
        ims[k] = independent_columns(p);
    }
    std::vector<DenseMatrix<T>> spaces;
    for (int l : weights) {
        DenseMatrix<T> s(dim, 0);
        for (int a = 0; a <= dim; ++a)
            for (int c = 0; c <= dim; ++c)
                if (a - c - 1 <= l) s = span_sum(s, span_intersection(kers[a], ims[c]));
        spaces.push_back(s);
    }
    return spaces;
}

template <class T>
DenseMatrix<T> space_at(const std::vector<DenseMatrix<T>>& spaces, const std::vector<int>& weights, int l,
                        int dim) {
    if (weights.empty() || l < weights.front()) return DenseMatrix<T>(dim, 0);
    DenseMatrix<T> out(dim, 0);
    for (size_t i = 0; i < weights.size(); ++i)
        if (weights[i] <= l) out = spaces[i];
    return out;
}

template <class T>
FiltrationReport check_filtration_t(const DenseMatrix<T>& n, const std::vector<DenseMatrix<T>>& spaces,
                                    const std::vector<int>& weights) {
    const int dim = n.rows();
    FiltrationReport r;
    r.nested = true;
    for (size_t i = 1; i < spaces.size(); ++i)
        if (!span_contains(spaces[i], spaces[i - 1])) r.nested = false;
    if (!spaces.empty() && rank(spaces.back()) != dim) r.nested = false;

    r.lowers_by_two = true;
    for (size_t i = 0; i < weights.size(); ++i) {
        DenseMatrix<T> lower = space_at(spaces, weights, weights[i] - 2, dim);
        if (!span_contains(lower, n * spaces[i])) r.lowers_by_two = false;
    }

    r.gr_isomorphic = true;
    const int lmax = weights.empty() ? 0 : std::max(weights.back(), -weights.front());
    for (int l = 1; l <= lmax; ++l) {
        const int gr_pos = rank(space_at(spaces, weights, l, dim)) - rank(space_at(spaces, weights, l - 1, dim));
        const int gr_neg = rank(space_at(spaces, weights, -l, dim)) - rank(space_at(spaces, weights, -l - 1, dim));
        if (gr_pos != gr_neg) {
            r.gr_isomorphic = false;
            continue;
        }
        DenseMatrix<T> below = space_at(spaces, weights, -l - 1, dim);
        DenseMatrix<T> image = power(n, l) * space_at(spaces, weights, l, dim);
        if (!span_contains(space_at(spaces, weights, -l, dim), image)) r.gr_isomorphic = false;
        const int induced_rank = rank(below.hcat(image)) - rank(below);
        if (induced_rank != gr_pos) r.gr_isomorphic = false;
    }
    return r;
}

std::vector<int> distinct_sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double norm_of(const ComplexMatrix& m) { return m.norm(); }

template <class T>
std::vector<ComplexMatrix> to_complex_all(const std::vector<DenseMatrix<T>>& v) {
    std::vector<ComplexMatrix> out;
    for (const auto& m : v) out.push_back(to_complex(m));
    return out;
}

}  // namespace

UnipotentMonodromy::UnipotentMonodromy(const ComplexMatrix& gamma) : gamma_(gamma) {
    if (gamma.rows() < 1 || gamma.rows() != gamma.cols() || !gamma.allFinite()) {
        throw Error("monodromy must be a finite square matrix");
    }
    const int n = static_cast<int>(gamma.rows());
    exact_ = to_rational(gamma);
    if (exact_) {
        if (!power(minus_identity(*exact_), n).is_zero()) throw Error("monodromy not unipotent");
    } else {
        ComplexMatrix m = gamma - ComplexMatrix::Identity(n, n);
        ComplexMatrix p = ComplexMatrix::Identity(n, n);
        for (int k = 0; k < n; ++k) p = p * m;
        if (p.norm() >= 1e-10) throw Error("monodromy not unipotent");
    }
}

NilpotentLog NilpotentLog::from_matrix(const ComplexMatrix& n) {
    if (n.rows() < 1 || n.rows() != n.cols() || !n.allFinite()) throw Error("nilpotent must be a finite square matrix");
    NilpotentLog out{n, to_rational(n)};
    const int dim = static_cast<int>(n.rows());
    if (out.exact) {
        if (!power(*out.exact, dim).is_zero()) throw Error("matrix is not nilpotent");
    } else {
        ComplexMatrix p = ComplexMatrix::Identity(dim, dim);
        for (int k = 0; k < dim; ++k) p = p * n;
        if (p.norm() >= 1e-10 * std::max(1.0, std::pow(n.norm(), dim))) throw Error("matrix is not nilpotent");
    }
    return out;
}

NilpotentLog log_unipotent(const UnipotentMonodromy& gamma) {
    if (gamma.exact()) {
        RationalMatrix n = log_series(*gamma.exact());
        return NilpotentLog{to_complex(n), n};
    }
    NumericMatrix n = log_series(to_numeric(gamma.gamma()));
    return NilpotentLog{to_complex(n), std::nullopt};
}

std::vector<int> jordan_profile(const NilpotentLog& n) {
    if (n.exact) return profile_from_ranks(*n.exact);
    return profile_from_ranks(to_numeric(n.N));
}

Sl2Data sl2_triple(const NilpotentLog& n) {
    Sl2Data out;
    out.N = n;
    out.profile = jordan_profile(n);

    auto fill = [&](const auto& nmat) {
        using T = std::decay_t<decltype(nmat(0, 0))>;
        AdaptedBasis<T> ab = adapted_basis(nmat, out.profile);
        Sl2Matrices<T> ad = adapted_matrices(ab);
        DenseMatrix<T> pinv = inverse(ab.basis);
        DenseMatrix<T> h0 = ab.basis * ad.H0_ad * pinv;
        DenseMatrix<T> y = ab.basis * ad.Y_ad * pinv;
        DenseMatrix<T> nm = ab.basis * ad.Nminus_ad * pinv;
        out.basis = to_complex(ab.basis);
        out.labels = ab.labels;
        out.block_of_column = ab.block_of_column;
        out.H0 = to_complex(h0);
        out.Y = to_complex(y);
        out.Nminus = to_complex(nm);
        out.N_adapted = to_complex(ad.N_ad);
        out.H0_adapted = to_complex(ad.H0_ad);
        out.Y_adapted = to_complex(ad.Y_ad);
        out.Nminus_adapted = to_complex(ad.Nminus_ad);
        int col = 0;
        for (int b : ab.block_sizes) {
            Sl2Block blk;
            blk.size = b;
            for (int i = 0; i < b; ++i) {
                blk.basis.push_back(out.basis.col(col + i));
                blk.labels.push_back(ab.labels[col + i]);
            }
            out.blocks.push_back(std::move(blk));
            col += b;
        }
        if constexpr (std::is_same_v<T, Rational>) {
            out.exact = ExactSl2{nmat, ab.basis, h0, y, nm};
        }
    };
    if (n.exact) {
        fill(*n.exact);
    } else {
        fill(to_numeric(n.N));
    }
    return out;
}

BracketReport check_brackets(const Sl2Data& s) {
    BracketReport r;
    if (s.exact) {
        const ExactSl2& e = *s.exact;
        RationalMatrix pn = e.basis * to_rational(s.N_adapted).value();
        r.exact = true;
        r.h_n = (commutator(e.H0, e.N) - e.N * Rational(2)).is_zero() ? 0.0 : 1.0;
        r.h_nminus = (commutator(e.H0, e.Nminus) + e.Nminus * Rational(2)).is_zero() ? 0.0 : 1.0;
        r.n_nminus = (commutator(e.N, e.Nminus) - e.H0).is_zero() ? 0.0 : 1.0;
        r.chain = (e.N * e.basis - pn).is_zero() ? 0.0 : 1.0;
        return r;
    }
    const ComplexMatrix& N = s.N.N;
    r.h_n = norm_of(s.H0 * N - N * s.H0 - 2.0 * N);
    r.h_nminus = norm_of(s.H0 * s.Nminus - s.Nminus * s.H0 + 2.0 * s.Nminus);
    r.n_nminus = norm_of(N * s.Nminus - s.Nminus * N - s.H0);
    r.chain = norm_of(N * s.basis - s.basis * s.N_adapted);
    return r;
}

ComplexMatrix WeightFiltration::space(int l) const {
    const Eigen::Index dim = spaces.empty() ? 0 : spaces.back().rows();
    ComplexMatrix out(dim, 0);
    for (size_t i = 0; i < weights.size(); ++i)
        if (weights[i] <= l) out = spaces[i];
    return out;
}

int WeightFiltration::dim_at(int l) const { return static_cast<int>(space(l).cols()); }

WeightFiltration weight_filtration(const Sl2Data& s) {
    WeightFiltration w;
    w.weights = distinct_sorted(s.labels);
    if (s.exact) {
        auto spaces = filtration_spaces(s.exact->basis, s.labels, w.weights);
        w.spaces = to_complex_all(spaces);
        w.exact = std::move(spaces);
    } else {
        w.spaces = to_complex_all(filtration_spaces(to_numeric(s.basis), s.labels, w.weights));
    }
    return w;
}

WeightFiltration weight_filtration(const NilpotentLog& n) { return weight_filtration(sl2_triple(n)); }

WeightFiltration weight_filtration_from_kernels(const NilpotentLog& n) {
    const int dim = n.dim();
    std::vector<int> weights;
    // Candidate weights span [-(dim-1), dim-1]; keep the levels where W jumps.
    WeightFiltration w;
    auto build = [&](const auto& nmat) {
        std::vector<int> all;
        for (int l = -(dim - 1); l <= dim - 1; ++l) all.push_back(l);
        auto spaces = kernel_image_spaces(nmat, all);
        int prev = 0;
        using M = std::decay_t<decltype(spaces.front())>;
        std::vector<M> kept;
        for (size_t i = 0; i < all.size(); ++i) {
            int r = rank(spaces[i]);
            if (r != prev) {
                w.weights.push_back(all[i]);
                kept.push_back(spaces[i]);
                prev = r;
            }
        }
        w.spaces = to_complex_all(kept);
        if constexpr (std::is_same_v<M, RationalMatrix>) w.exact = kept;
    };
    if (n.exact) {
        build(*n.exact);
    } else {
        build(to_numeric(n.N));
    }
    return w;
}

FiltrationReport check_filtration(const NilpotentLog& n, const WeightFiltration& w) {
    if (n.exact && w.exact) {
        FiltrationReport r = check_filtration_t(*n.exact, *w.exact, w.weights);
        r.exact = true;
        return r;
    }
    std::vector<NumericMatrix> spaces;
    for (const auto& s : w.spaces) spaces.push_back(to_numeric(s));
    return check_filtration_t(to_numeric(n.N), spaces, w.weights);
}

bool same_filtration(const WeightFiltration& a, const WeightFiltration& b) {
    if (a.weights != b.weights) return false;
    for (size_t i = 0; i < a.weights.size(); ++i) {
        if (a.exact && b.exact) {
            if (!same_span((*a.exact)[i], (*b.exact)[i])) return false;
        } else if (!same_span(to_numeric(a.spaces[i]), to_numeric(b.spaces[i]))) {
            return false;
        }
    }
    return true;
}

ComplexMatrix jordan_matrix(const std::vector<int>& profile) {
    int n = 0;
    for (int b : profile) n += b;
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    int off = 0;
    for (int b : profile) {
        for (int i = 0; i + 1 < b; ++i) m(off + i, off + i + 1) = 1.0;
        off += b;
    }
    return m;
}

}  // namespace hb
