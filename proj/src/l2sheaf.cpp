#include "hb/l2sheaf.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "hb/error.hpp"

namespace hb {

namespace {

constexpr double kTwoPiL2 = 6.283185307179586476925286766559;
constexpr double kCoordTol = 1e-12;

void require_scope(const GermExpression& g) {
    if (g.vars != 1 && g.vars != 2) throw Error("beyond Prop. 1 scope: germs need 1 or 2 variables");
    for (const auto& t : g.terms) {
        if (t.a[0] < 0 || t.a[1] < 0) throw Error("monomial exponents must be >= 0");
        if (t.logp[0] < 0 || t.logp[1] < 0) throw Error("log powers must be >= 0");
        if ((t.form & ~(kDt1 | kDt2)) != 0) throw Error("beyond Prop. 1 scope: unknown form factor");
        if (g.vars == 1 && (t.a[1] != 0 || t.logp[1] != 0 || (t.form & kDt2) != 0)) {
            throw Error("one-variable germ uses t2");
        }
    }
}

std::string term_label(const GermTerm& t, int vars) {
    std::ostringstream os;
    os << "t^(" << t.a[0];
    if (vars == 2) os << "," << t.a[1];
    os << ")";
    if (t.form & kDt1) os << " dt1/t1";
    if (t.form & kDt2) os << " dt2/t2";
    os << " l=(" << t.labels[0];
    if (vars == 2) os << "," << t.labels[1];
    os << ")";
    return os.str();
}

// Throws unless the coefficient is pure of the term's labels.
void require_pure(const GermTerm& t, int vars, const FiltrationData* f) {
    if (!t.coefficient || f == nullptr) return;
    ComplexVector c = f->coordinates(*t.coefficient);
    double scale = c.cwiseAbs().maxCoeff();
    if (scale == 0.0) throw Error("zero coefficient vector");
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (std::abs(c(i)) <= kCoordTol * scale) continue;
        const auto& lab = f->labels[static_cast<std::size_t>(i)];
        bool same = lab[0] == t.labels[0] && (vars == 1 || lab[1] == t.labels[1]);
        if (!same) throw Error("split germ first: coefficient is not pure of labels " + term_label(t, vars));
    }
}

// L^q e^{-2aL}, zero at the far end of the quadrature.
double weight(int q, int a, double L) {
    if (!std::isfinite(L)) return 0.0;
    return std::exp(q * std::log(L) - 2.0 * a * L);
}

// ∫_eps^∞ L^q e^{-2aL} dL, or +inf.
double radial_integral(int q, int a, double eps) {
    if (a == 0) {
        if (q >= -1) return std::numeric_limits<double>::infinity();
        return std::pow(eps, q + 1) / static_cast<double>(-q - 1);
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [q, a](double L) { return weight(q, a, L); };
    return integrator.integrate(f, eps, std::numeric_limits<double>::infinity());
}

// ∫_{L2>eps} ∫_{L1>eps·L2} L1^q1 e^{-2a1 L1} L2^q2 e^{-2a2 L2}.
double sector_integral(int q1, int a1, int q2, int a2, double eps) {
    if (a1 == 0) {
        if (q1 >= -1) return std::numeric_limits<double>::infinity();
        double c = std::pow(eps, q1 + 1) / static_cast<double>(-q1 - 1);
        return c * radial_integral(q1 + q2 + 1, a2, eps);
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    auto outer = [&](double L2) {
        boost::math::quadrature::exp_sinh<double> inner_int;
        auto inner = [q1, a1](double L1) { return weight(q1, a1, L1); };
        if (!std::isfinite(L2)) return 0.0;
        double j = inner_int.integrate(inner, eps * L2, std::numeric_limits<double>::infinity());
        return j * weight(q2, a2, L2);
    };
    return integrator.integrate(outer, eps, std::numeric_limits<double>::infinity());
}

ComplexVector kron(const ComplexVector& x, const ComplexVector& y) {
    ComplexVector out(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out.segment(i * y.size(), y.size()) = x(i) * y;
    return out;
}

bool has_log(const GermTerm& t) { return t.logp[0] != 0 || t.logp[1] != 0; }

// Membership of one term; writes the certifying summand or the failure.
bool term_member(const GermTerm& t, int vars, std::string& why) {
    const bool d1 = (t.form & kDt1) != 0;
    const bool d2 = (t.form & kDt2) != 0;
    const int l1 = t.labels[0];
    const int l2 = t.labels[1];
    std::string prefix = d1 && d2 ? "dt1/t1^dt2/t2 (x) " : d1 ? "dt1/t1 (x) " : d2 ? "dt2/t2 (x) " : "";
    if (vars == 1) {
        if (t.a[0] >= 1) {
            why = prefix + "tH";
            return true;
        }
        int bound = d1 ? -2 : 0;
        bool ok = l1 <= bound;
        why = prefix + "W_" + std::to_string(bound) + (ok ? "" : " fails: l=" + std::to_string(l1));
        return ok;
    }
    const bool p1 = t.a[0] >= 1;
    const bool p2 = t.a[1] >= 1;
    // t1 summand bounds l2 - l1, t2 summand bounds l1.
    const int c21 = d2 ? -2 : 0;
    const int c1 = d1 ? -2 : 0;
    const bool ok21 = l2 - l1 <= c21;
    const bool ok1 = l1 <= c1;
    std::string w21 = "l2-l1<=" + std::to_string(c21);
    std::string w1 = "l1<=" + std::to_string(c1);
    bool ok;
    if (p1 && p2) {
        why = prefix + "t1t2H";
        return true;
    } else if (p1) {
        ok = ok21;
        why = prefix + "t1 W[" + w21 + "]";
    } else if (p2) {
        ok = ok1;
        why = prefix + "t2 W1_" + std::to_string(c1);
    } else {
        ok = ok1 && ok21;
        why = prefix + "W[" + w1 + ", " + w21 + "]";
    }
    if (!ok) why += " fails: l=(" + std::to_string(l1) + "," + std::to_string(l2) + ")";
    return ok;
}

}  // namespace

int GermExpression::degree() const {
    if (terms.empty()) return 0;
    int r = terms.front().degree();
    for (const auto& t : terms) {
        if (t.degree() != r) throw Error("germ mixes form degrees");
    }
    return r;
}

FiltrationData FiltrationData::from_sl2(const Sl2Data& s) {
    FiltrationData f;
    f.basis = s.basis;
    for (int l : s.labels) f.labels.push_back({l, l});
    return f;
}

FiltrationData FiltrationData::product(const Sl2Data& a, const Sl2Data& b) {
    const Eigen::Index na = a.basis.rows();
    const Eigen::Index nb = b.basis.rows();
    FiltrationData f;
    f.basis = ComplexMatrix::Zero(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) {
            f.basis.col(i * nb + j) = kron(a.basis.col(i), b.basis.col(j));
            int ja = a.labels[static_cast<std::size_t>(i)];
            int jb = b.labels[static_cast<std::size_t>(j)];
            f.labels.push_back({ja, ja + jb});
        }
    }
    return f;
}

ComplexVector FiltrationData::coordinates(const ComplexVector& v) const {
    if (v.size() != basis.rows()) throw Error("coefficient dimension mismatch");
    if (labels.size() != static_cast<std::size_t>(basis.cols())) throw Error("filtration labels do not match basis");
    Eigen::FullPivLU<ComplexMatrix> lu(basis);
    if (!lu.isInvertible()) throw Error("filtration basis is singular");
    return lu.solve(v);
}

L2Verdict is_l2(const GermExpression& g, const RegionSpec& region, const FiltrationData* f) {
    require_scope(g);
    if (g.degree() > g.vars) throw Error("beyond Prop. 1 scope: form degree exceeds variables");
    if (!(region.eps > 0.0 && region.eps < 1.0)) throw Error("epsilon must lie in (0,1)");
    L2Verdict v;
    for (const auto& t : g.terms) {
        require_pure(t, g.vars, f);
        if (has_log(t)) {
            v.rejected = true;
            v.member = false;
            v.trace.push_back(term_label(t, g.vars) + ": log power outside the formulae");
            continue;
        }
        std::string why;
        bool ok = term_member(t, g.vars, why);
        v.member = v.member && ok;
        v.trace.push_back(term_label(t, g.vars) + ": " + why);
    }
    return v;
}

NumericVerdict is_l2_numeric(const GermExpression& g, const RegionSpec& region, const NormModel& model,
                             const FiltrationData* f) {
    require_scope(g);
    if (g.degree() > g.vars) throw Error("beyond Prop. 1 scope: form degree exceeds variables");
    if (!(region.eps > 0.0 && region.eps < 1.0)) throw Error("epsilon must lie in (0,1)");
    NumericVerdict out;
    for (const auto& t : g.terms) {
        require_pure(t, g.vars, f);
        const int e1 = (t.form & kDt1) ? 1 : 0;
        const int e2 = (t.form & kDt2) ? 1 : 0;
        double val;
        if (g.vars == 1) {
            int q = t.labels[0] + 2 * t.logp[0] + 2 * e1 - 2;
            val = kTwoPiL2 * radial_integral(q, t.a[0], region.eps);
        } else {
            int q1 = t.labels[0] + 2 * t.logp[0] + 2 * e1 - 2;
            int q2 = t.labels[1] - t.labels[0] + 2 * t.logp[1] + 2 * e2 - 2;
            double core = model.region == NormRegion::Product
                              ? radial_integral(q1, t.a[0], region.eps) * radial_integral(q2, t.a[1], region.eps)
                              : sector_integral(q1, t.a[0], q2, t.a[1], region.eps);
            val = kTwoPiL2 * kTwoPiL2 * core;
        }
        out.per_term.push_back(val);
        out.estimate += val;
        if (!std::isfinite(val)) out.member = false;
    }
    return out;
}

GermExpression split_germ(const GermExpression& g, const FiltrationData& f) {
    GermExpression out;
    out.vars = g.vars;
    for (const auto& t : g.terms) {
        if (!t.coefficient) {
            out.terms.push_back(t);
            continue;
        }
        ComplexVector c = f.coordinates(*t.coefficient);
        double scale = c.cwiseAbs().maxCoeff();
        std::map<std::array<int, 2>, ComplexVector> parts;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            if (std::abs(c(i)) <= kCoordTol * scale) continue;
            auto lab = f.labels[static_cast<std::size_t>(i)];
            if (g.vars == 1) lab[1] = lab[0];
            auto [it, fresh] = parts.try_emplace(lab, ComplexVector::Zero(c.size()));
            it->second += c(i) * f.basis.col(i);
        }
        for (auto& [lab, vec] : parts) {
            GermTerm p = t;
            p.labels = lab;
            p.coefficient = vec;
            out.terms.push_back(std::move(p));
        }
    }
    return out;
}

std::optional<GermTerm> apply_higgs(const GermTerm& t, int k) {
    if (k != 1 && k != 2) throw Error("Higgs direction must be 1 or 2");
    unsigned bit = k == 1 ? kDt1 : kDt2;
    if (t.form & bit) return std::nullopt;
    GermTerm out = t;
    out.form |= bit;
    out.coefficient.reset();
    if (k == 1) out.labels[0] -= 2;
    out.labels[1] -= 2;
    return out;
}

GradedProbe graded_sequence_probe(const FiltrationData& f, const GermExpression& g, int p) {
    if (f.hodge.size() != f.labels.size()) throw Error("graded probe needs Hodge levels");
    for (const auto& t : g.terms) {
        if (!t.coefficient) throw Error("graded probe needs explicit coefficients");
    }
    const int r = g.degree();
    const int level = p - r;
    GermExpression split = split_germ(g, f);

    auto min_level = [&](const GermExpression& e) {
        int lo = std::numeric_limits<int>::max();
        for (const auto& t : e.terms) {
            ComplexVector c = f.coordinates(*t.coefficient);
            double scale = c.cwiseAbs().maxCoeff();
            for (Eigen::Index i = 0; i < c.size(); ++i) {
                if (std::abs(c(i)) > kCoordTol * scale) lo = std::min(lo, f.hodge[static_cast<std::size_t>(i)]);
            }
        }
        return lo;
    };
    auto member = [&](const GermExpression& e) { return is_l2(e, {}, &f).member; };

    GradedProbe out;
    const bool l2 = member(split);
    const int lo = min_level(split);
    out.in_Fp = l2 && lo >= level;
    out.in_Fp1 = l2 && lo >= level + 1;

    out.graded.vars = g.vars;
    for (const auto& t : split.terms) {
        ComplexVector c = f.coordinates(*t.coefficient);
        double scale = c.cwiseAbs().maxCoeff();
        ComplexVector keep = ComplexVector::Zero(c.size());
        bool any = false;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            if (f.hodge[static_cast<std::size_t>(i)] == level && std::abs(c(i)) > kCoordTol * scale) {
                keep += c(i) * f.basis.col(i);
                any = true;
            }
        }
        if (!any) continue;
        GermTerm gt = t;
        gt.coefficient = keep;
        out.graded.terms.push_back(std::move(gt));
    }
    out.graded_zero = out.graded.terms.empty();
    out.kernel_ok = !(out.in_Fp && out.graded_zero) || out.in_Fp1;
    // Basis vectors are Hodge-orthogonal, so the quotient norm of a graded
    // class equals the norm of its level-(p-r) representative.
    out.graded_member = out.graded_zero || member(out.graded);
    out.lift = out.graded;
    if (out.graded_member && !out.graded_zero) {
        out.lift_ok = member(out.lift) && min_level(out.lift) >= level;
    }
    return out;
}

}  // namespace hb
