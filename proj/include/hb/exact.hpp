#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hb/mats.hpp"

namespace hb {

using Rational = boost::multiprecision::cpp_rational;

/// Scalar policy for the dense elimination routines below. The rational
/// policy is exact; the complex policy decides zero against a tolerance.
template <class T>
struct FieldOps;

template <>
struct FieldOps<Rational> {
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational from_int(long long v) { return Rational(v); }
    static bool is_zero(const Rational& v, double /*scale*/) { return v == 0; }
    static double magnitude(const Rational& v) { return std::abs(v.convert_to<double>()); }
};

template <>
struct FieldOps<Complex> {
    static Complex zero() { return {0.0, 0.0}; }
    static Complex one() { return {1.0, 0.0}; }
    static Complex from_int(long long v) { return {static_cast<double>(v), 0.0}; }
    static bool is_zero(const Complex& v, double scale) { return std::abs(v) <= 1e-9 * std::max(1.0, scale); }
    static double magnitude(const Complex& v) { return std::abs(v); }
};

/// Small row-major dense matrix over an exact or approximate field.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, FieldOps<T>::zero()) {}

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = FieldOps<T>::one();
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    DenseMatrix operator*(const DenseMatrix& o) const {
        if (cols_ != o.rows_) throw Error("dimension mismatch");
        DenseMatrix out(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const T& a = (*this)(i, k);
                if (a == FieldOps<T>::zero()) continue;
                for (int j = 0; j < o.cols_; ++j) out(i, j) += a * o(k, j);
            }
        return out;
    }
    DenseMatrix operator+(const DenseMatrix& o) const { return zip(o, [](const T& a, const T& b) { return a + b; }); }
    DenseMatrix operator-(const DenseMatrix& o) const { return zip(o, [](const T& a, const T& b) { return a - b; }); }
    DenseMatrix operator*(const T& s) const {
        DenseMatrix out = *this;
        for (auto& v : out.data_) v *= s;
        return out;
    }
    bool operator==(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

    DenseMatrix column(int c) const {
        DenseMatrix out(rows_, 1);
        for (int r = 0; r < rows_; ++r) out(r, 0) = (*this)(r, c);
        return out;
    }
    void set_column(int c, const DenseMatrix& v) {
        for (int r = 0; r < rows_; ++r) (*this)(r, c) = v(r, 0);
    }
    /// Horizontal concatenation.
    DenseMatrix hcat(const DenseMatrix& o) const {
        if (rows_ != o.rows_ && cols_ != 0 && o.cols_ != 0) throw Error("dimension mismatch");
        int r = cols_ == 0 ? o.rows_ : rows_;
        DenseMatrix out(r, cols_ + o.cols_);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j);
            for (int j = 0; j < o.cols_; ++j) out(i, cols_ + j) = o(i, j);
        }
        return out;
    }

    double max_magnitude() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, FieldOps<T>::magnitude(v));
        return m;
    }
    bool is_zero() const {
        for (const auto& v : data_)
            if (!FieldOps<T>::is_zero(v, 1.0)) return false;
        return true;
    }

private:
    template <class F>
    DenseMatrix zip(const DenseMatrix& o, F f) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw Error("dimension mismatch");
        DenseMatrix out(rows_, cols_);
        for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = f(data_[i], o.data_[i]);
        return out;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using RationalMatrix = DenseMatrix<Rational>;
using NumericMatrix = DenseMatrix<Complex>;

template <class T>
DenseMatrix<T> commutator(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    return a * b - b * a;
}

template <class T>
DenseMatrix<T> power(const DenseMatrix<T>& a, int k) {
    DenseMatrix<T> out = DenseMatrix<T>::identity(a.rows());
    for (int i = 0; i < k; ++i) out = out * a;
    return out;
}

/// Reduced row echelon form; returns pivot columns. `scale` sets the zero
/// threshold for approximate fields.
template <class T>
std::vector<int> rref_in_place(DenseMatrix<T>& m, double scale) {
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
        int best = -1;
        double best_mag = 0.0;
        for (int r = row; r < m.rows(); ++r) {
            if (FieldOps<T>::is_zero(m(r, col), scale)) continue;
            double mag = FieldOps<T>::magnitude(m(r, col));
            if (best < 0 || mag > best_mag) {
                best = r;
                best_mag = mag;
            }
        }
        if (best < 0) continue;
        for (int c = 0; c < m.cols(); ++c) std::swap(m(row, c), m(best, c));
        T inv = FieldOps<T>::one() / m(row, col);
        for (int c = 0; c < m.cols(); ++c) m(row, c) *= inv;
        for (int r = 0; r < m.rows(); ++r) {
            if (r == row) continue;
            T f = m(r, col);
            if (f == FieldOps<T>::zero()) continue;
            for (int c = 0; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <class T>
int rank(const DenseMatrix<T>& m) {
    DenseMatrix<T> w = m;
    return static_cast<int>(rref_in_place(w, m.max_magnitude()).size());
}

/// Basis of {v : M v = 0} in reduced column echelon form (one vector per free column).
template <class T>
DenseMatrix<T> nullspace(const DenseMatrix<T>& m) {
    DenseMatrix<T> w = m;
    auto pivots = rref_in_place(w, m.max_magnitude());
    std::vector<int> is_pivot(m.cols(), -1);
    for (size_t i = 0; i < pivots.size(); ++i) is_pivot[pivots[i]] = static_cast<int>(i);
    std::vector<int> free;
    for (int c = 0; c < m.cols(); ++c)
        if (is_pivot[c] < 0) free.push_back(c);
    DenseMatrix<T> out(m.cols(), static_cast<int>(free.size()));
    for (size_t k = 0; k < free.size(); ++k) {
        int fc = free[k];
        out(fc, static_cast<int>(k)) = FieldOps<T>::one();
        for (size_t i = 0; i < pivots.size(); ++i) out(pivots[i], static_cast<int>(k)) = -w(static_cast<int>(i), fc);
    }
    return out;
}

/// Maximal linearly independent subset of the columns, scanned left to right.
template <class T>
DenseMatrix<T> independent_columns(const DenseMatrix<T>& m) {
    DenseMatrix<T> w = m;
    auto pivots = rref_in_place(w, m.max_magnitude());
    DenseMatrix<T> out(m.rows(), static_cast<int>(pivots.size()));
    for (size_t k = 0; k < pivots.size(); ++k) out.set_column(static_cast<int>(k), m.column(pivots[k]));
    return out;
}

template <class T>
DenseMatrix<T> span_sum(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    return independent_columns(a.hcat(b));
}

template <class T>
DenseMatrix<T> span_intersection(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    if (a.cols() == 0 || b.cols() == 0) return DenseMatrix<T>(std::max(a.rows(), b.rows()), 0);
    DenseMatrix<T> stacked = a.hcat(b * FieldOps<T>::from_int(-1));
    DenseMatrix<T> ns = nullspace(stacked);
    DenseMatrix<T> coeff(a.cols(), ns.cols());
    for (int i = 0; i < a.cols(); ++i)
        for (int j = 0; j < ns.cols(); ++j) coeff(i, j) = ns(i, j);
    return independent_columns(a * coeff);
}

/// True when every column of `sub` lies in span(basis).
template <class T>
bool span_contains(const DenseMatrix<T>& basis, const DenseMatrix<T>& sub) {
    if (sub.cols() == 0) return true;
    return rank(basis.hcat(sub)) == rank(basis);
}

template <class T>
bool same_span(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
    return span_contains(a, b) && span_contains(b, a);
}

/// Inverse of a square matrix; throws when singular.
template <class T>
DenseMatrix<T> inverse(const DenseMatrix<T>& m) {
    int n = m.rows();
    DenseMatrix<T> aug = m.hcat(DenseMatrix<T>::identity(n));
    auto pivots = rref_in_place(aug, m.max_magnitude());
    if (static_cast<int>(pivots.size()) < n || pivots[n - 1] != n - 1) throw Error("singular matrix");
    DenseMatrix<T> out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = aug(i, n + j);
    return out;
}

/// Exact rational view of a numeric matrix when every entry is real with a
/// denominator up to 1000; std::nullopt otherwise.
std::optional<RationalMatrix> to_rational(const ComplexMatrix& m);

ComplexMatrix to_complex(const RationalMatrix& m);
ComplexMatrix to_complex(const NumericMatrix& m);
NumericMatrix to_numeric(const ComplexMatrix& m);

}  // namespace hb
