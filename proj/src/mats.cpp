#include "hb/mats.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace hb {

namespace {

void require_finite_square(const ComplexMatrix& a) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
        throw Error("matrix must be square with dim >= 1");
    }
    if (!a.allFinite()) {
        throw Error("matrix has non-finite entries");
    }
}

Eigen::SelfAdjointEigenSolver<ComplexMatrix> eigen_of(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
    if (es.info() != Eigen::Success) {
        throw Error("Hermitian eigendecomposition failed");
    }
    return es;
}

ComplexMatrix apply_spectral(const ComplexMatrix& a, double (*f)(double)) {
    auto es = eigen_of(a);
    Eigen::VectorXd mapped = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * mapped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& a) {
    require_finite_square(a);
    m_ = (a + a.adjoint()) * 0.5;
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index n) {
    return HermitianMatrix(ComplexMatrix::Zero(n, n));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
    return HermitianMatrix(ComplexMatrix::Identity(n, n));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
    return HermitianMatrix(m_ + o.m_);
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
    return HermitianMatrix(m_ - o.m_);
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
    return HermitianMatrix(m_ * s);
}

PosDefMetric::PosDefMetric(const HermitianMatrix& h) : h_(h) {
    Eigen::LLT<ComplexMatrix> llt(h_.matrix());
    if (llt.info() != Eigen::Success) {
        throw Error("not positive definite");
    }
}

PosDefMetric PosDefMetric::identity(Eigen::Index n) {
    return PosDefMetric(HermitianMatrix::identity(n));
}

double PosDefMetric::condition_number() const {
    auto ev = eigen_of(matrix()).eigenvalues();
    return ev.maxCoeff() / ev.minCoeff();
}

ComplexMatrix PosDefMetric::inverse() const {
    auto es = eigen_of(matrix());
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0 || ev.maxCoeff() / ev.minCoeff() > kConditionGuard) {
        throw Error("metric condition number exceeds guard; rescale the input");
    }
    Eigen::VectorXd inv = ev.cwiseInverse();
    ComplexMatrix out = es.eigenvectors() * inv.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    return (out + out.adjoint()) * 0.5;
}

ComplexMatrix PosDefMetric::sqrt() const {
    return apply_spectral(matrix(), [](double v) { return std::sqrt(v); });
}

ComplexMatrix PosDefMetric::inverse_sqrt() const {
    return apply_spectral(matrix(), [](double v) { return 1.0 / std::sqrt(v); });
}

PosDefMetric act(const ComplexMatrix& g, const PosDefMetric& h) {
    require_finite_square(g);
    if (g.rows() != h.dim()) {
        throw Error("dimension mismatch");
    }
    Eigen::FullPivLU<ComplexMatrix> lu(g);
    if (!lu.isInvertible()) {
        throw Error("non-invertible group element");
    }
    return PosDefMetric(HermitianMatrix(g * h.matrix() * g.adjoint()));
}

double inner(const PosDefMetric& h, const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != h.dim() || b.dim() != h.dim()) {
        throw Error("dimension mismatch");
    }
    Eigen::LLT<ComplexMatrix> llt(h.matrix());
    ComplexMatrix ha = llt.solve(a.matrix());
    ComplexMatrix hb = llt.solve(b.matrix());
    return kMetricNormalization * (ha * hb).trace().real();
}

PosDefMetric hermitian_exp(const HermitianMatrix& a) {
    return PosDefMetric(HermitianMatrix(apply_spectral(a.matrix(), [](double v) { return std::exp(v); })));
}

PosDefMetric geodesic(const HermitianMatrix& a, double s) {
    return hermitian_exp(a * s);
}

HermitianMatrix matlog_pd(const PosDefMetric& h) {
    auto es = eigen_of(h.matrix());
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw Error("not positive definite");
    }
    Eigen::VectorXd logs = es.eigenvalues().array().log().matrix();
    return HermitianMatrix(es.eigenvectors() * logs.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
}

ComplexMatrix matexp(const ComplexMatrix& a) {
    require_finite_square(a);
    return a.exp();
}

double dist(const PosDefMetric& h1, const PosDefMetric& h2) {
    if (h1.dim() != h2.dim()) {
        throw Error("dimension mismatch");
    }
    // H2 v = lambda H1 v
    Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> ges(h2.matrix(), h1.matrix(), Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) {
        throw Error("generalized eigendecomposition failed");
    }
    double acc = 0.0;
    for (double lam : ges.eigenvalues()) {
        double l = std::log(lam);
        acc += l * l;
    }
    return std::sqrt(acc);
}

HermitianMatrix log_map(const PosDefMetric& h, const PosDefMetric& q) {
    ComplexMatrix s = h.sqrt();
    ComplexMatrix si = h.inverse_sqrt();
    PosDefMetric rel(HermitianMatrix(si * q.matrix() * si));
    return HermitianMatrix(s * matlog_pd(rel).matrix() * s);
}

PosDefMetric exp_map(const PosDefMetric& h, const HermitianMatrix& v) {
    ComplexMatrix s = h.sqrt();
    ComplexMatrix si = h.inverse_sqrt();
    PosDefMetric e = hermitian_exp(HermitianMatrix(si * v.matrix() * si));
    return PosDefMetric(HermitianMatrix(s * e.matrix() * s));
}

double relative_error(const ComplexMatrix& a, const ComplexMatrix& b) {
    double denom = std::max(b.norm(), std::numeric_limits<double>::min());
    return (a - b).norm() / denom;
}

}  // namespace hb
