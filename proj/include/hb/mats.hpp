#pragma once

#include <complex>

#include <Eigen/Dense>

#include "hb/error.hpp"

namespace hb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Inversions of a PosDefMetric refuse condition numbers above this.
inline constexpr double kConditionGuard = 1e12;

/// Constant in front of tr(H^-1 A H^-1 B); fixed to one and echoed in reports.
inline constexpr double kMetricNormalization = 1.0;

/// A = A*, enforced by replacing the input with (A + A*)/2.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const ComplexMatrix& a);

    static HermitianMatrix zero(Eigen::Index n);
    static HermitianMatrix identity(Eigen::Index n);

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

    HermitianMatrix operator+(const HermitianMatrix& o) const;
    HermitianMatrix operator-(const HermitianMatrix& o) const;
    HermitianMatrix operator*(double s) const;

private:
    ComplexMatrix m_;
};

/// A point of P_n: a positive-definite Hermitian matrix.
class PosDefMetric {
public:
    PosDefMetric() = default;
    /// Throws hb::Error("not positive definite") when a Cholesky factorization fails.
    explicit PosDefMetric(const HermitianMatrix& h);
    explicit PosDefMetric(const ComplexMatrix& h) : PosDefMetric(HermitianMatrix(h)) {}

    static PosDefMetric identity(Eigen::Index n);

    const ComplexMatrix& matrix() const { return h_.matrix(); }
    const HermitianMatrix& hermitian() const { return h_; }
    Eigen::Index dim() const { return h_.dim(); }

    /// Eigenvalue ratio max/min.
    double condition_number() const;
    /// Guarded by kConditionGuard.
    ComplexMatrix inverse() const;
    ComplexMatrix sqrt() const;
    ComplexMatrix inverse_sqrt() const;

private:
    HermitianMatrix h_;
};

/// g∘H = g H g*; left action of GL(n,C) on P_n.
PosDefMetric act(const ComplexMatrix& g, const PosDefMetric& h);

/// Invariant Riemannian inner product tr(H^-1 A H^-1 B) on T_H P_n.
double inner(const PosDefMetric& h, const HermitianMatrix& a, const HermitianMatrix& b);

/// exp(sA), the geodesic through the identity with velocity A.
PosDefMetric geodesic(const HermitianMatrix& a, double s);

/// Eigendecomposition-based exponential of a Hermitian matrix.
PosDefMetric hermitian_exp(const HermitianMatrix& a);

/// Principal logarithm of a positive-definite matrix.
HermitianMatrix matlog_pd(const PosDefMetric& h);

/// General matrix exponential (Pade scaling and squaring).
ComplexMatrix matexp(const ComplexMatrix& a);

/// Geodesic distance sqrt(sum log^2 lambda_i), lambda_i the eigenvalues of H1^-1 H2.
double dist(const PosDefMetric& h1, const PosDefMetric& h2);

/// Riemannian log map: the tangent vector at H pointing to Q, of length dist(H, Q).
HermitianMatrix log_map(const PosDefMetric& h, const PosDefMetric& q);

/// Riemannian exp map: H^{1/2} exp(H^{-1/2} V H^{-1/2}) H^{1/2}.
PosDefMetric exp_map(const PosDefMetric& h, const HermitianMatrix& v);

/// Frobenius-relative distance ||A - B|| / max(||B||, tiny).
double relative_error(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace hb
