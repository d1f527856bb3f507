#include "hb/exact.hpp"

#include <cmath>

namespace hb {

std::optional<RationalMatrix> to_rational(const ComplexMatrix& m) {
    RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const Complex v = m(i, j);
            if (v.imag() != 0.0 || !std::isfinite(v.real())) return std::nullopt;
            bool found = false;
            for (long long d = 1; d <= 1000; ++d) {
                double scaled = v.real() * static_cast<double>(d);
                if (std::abs(scaled) > 9e15) break;
                if (scaled == std::round(scaled)) {
                    out(static_cast<int>(i), static_cast<int>(j)) =
                        Rational(static_cast<long long>(std::llround(scaled)), d);
                    found = true;
                    break;
                }
            }
            if (!found) return std::nullopt;
        }
    }
    return out;
}

ComplexMatrix to_complex(const RationalMatrix& m) {
    ComplexMatrix out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = Complex(m(i, j).convert_to<double>(), 0.0);
    return out;
}

ComplexMatrix to_complex(const NumericMatrix& m) {
    ComplexMatrix out(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

NumericMatrix to_numeric(const ComplexMatrix& m) {
    NumericMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(static_cast<int>(i), static_cast<int>(j)) = m(i, j);
    return out;
}

}  // namespace hb
