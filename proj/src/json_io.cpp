#include "hb/json_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hb {

namespace {

const Json& field(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw InputError("expected an object at " + where);
    auto it = j.find(key);
    if (it == j.end()) throw InputError("missing field " + where + "/" + key);
    return *it;
}

template <class T>
T get_as(const Json& j, const std::string& where) {
    try {
        return j.get<T>();
    } catch (const Json::exception&) {
        throw InputError("wrong type at " + where);
    }
}

long long parse_integer(std::string_view s, const std::string& where) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw InputError("bad rational entry at " + where);
    return v;
}

Complex entry_from_json(const Json& e, const std::string& where) {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    if (e.is_string()) {
        const std::string s = e.get<std::string>();
        const auto slash = s.find('/');
        if (slash == std::string::npos) return {static_cast<double>(parse_integer(s, where)), 0.0};
        const long long num = parse_integer(std::string_view(s).substr(0, slash), where);
        const long long den = parse_integer(std::string_view(s).substr(slash + 1), where);
        if (den == 0) throw InputError("zero denominator at " + where);
        return {static_cast<double>(num) / static_cast<double>(den), 0.0};
    }
    throw InputError("bad matrix entry at " + where);
}

Json entry_to_json(Complex z) {
    if (z.imag() == 0.0) return z.real();
    return Json::array({z.real(), z.imag()});
}

std::array<int, 2> int_pair(const Json& j, const std::string& where, int vars) {
    if (!j.is_array() || j.size() < 1 || j.size() > 2) throw InputError("expected 1 or 2 integers at " + where);
    std::array<int, 2> out{0, 0};
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = get_as<int>(j[i], where + "/" + std::to_string(i));
    if (j.size() == 1 && vars == 2) throw InputError("expected 2 integers at " + where);
    return out;
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InputError("malformed JSON in " + source + " at line " + std::to_string(line) + ", column " +
                         std::to_string(col));
    }
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InputError("expected a non-empty array of rows at " + where);
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) throw InputError("expected a non-empty row at " + where + "/0");
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rw = where + "/" + std::to_string(r);
        if (!j[r].is_array() || j[r].size() != cols) throw InputError("ragged row at " + rw);
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                entry_from_json(j[r][c], rw + "/" + std::to_string(c));
        }
    }
    return m;
}

Json matrix_to_json(const ComplexMatrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(entry_to_json(m(r, c)));
        out.push_back(row);
    }
    return out;
}

ComplexVector vector_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InputError("expected a non-empty vector at " + where);
    ComplexVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = entry_from_json(j[i], where + "/" + std::to_string(i));
    }
    return v;
}

Json vector_to_json(const ComplexVector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(entry_to_json(v(i)));
    return out;
}

NilpotentLog nilpotent_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("expected an object at /");
    try {
        if (j.contains("gamma")) return log_unipotent(UnipotentMonodromy(matrix_from_json(j["gamma"], "/gamma")));
        if (j.contains("N")) return NilpotentLog::from_matrix(matrix_from_json(j["N"], "/N"));
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(e.what());
    }
    throw InputError("missing field /gamma or /N");
}

Json sl2_to_json(const Sl2Data& s) {
    Json blocks = Json::array();
    for (const auto& b : s.blocks) {
        Json basis = Json::array();
        for (const auto& v : b.basis) basis.push_back(vector_to_json(v));
        blocks.push_back({{"size", b.size}, {"basis", basis}, {"labels", b.labels}});
    }
    return {{"n", s.dim()},
            {"N", matrix_to_json(s.N.N)},
            {"blocks", blocks},
            {"H0", matrix_to_json(s.H0)},
            {"Y", matrix_to_json(s.Y)}};
}

Sl2Data sl2_from_json(const Json& j, const std::string& where) {
    ComplexMatrix n = matrix_from_json(field(j, "N", where), where + "/N");
    if (j.contains("n") && get_as<int>(j["n"], where + "/n") != n.rows()) {
        throw InputError("dimension mismatch at " + where + "/n");
    }
    try {
        return sl2_triple(NilpotentLog::from_matrix(n));
    } catch (const Error& e) {
        throw InputError(std::string(e.what()) + " at " + where + "/N");
    }
}

Json convention_to_json(const ModelConvention& c) {
    return {{"d", c.direction_name()}, {"angular", "x/2pi"}, {"radial", c.radial_name()}};
}

ModelMetric model_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("expected an object at /");
    ModelConvention conv;
    if (j.contains("convention")) {
        const Json& c = j["convention"];
        if (c.contains("d")) {
            const auto d = get_as<std::string>(c["d"], "/convention/d");
            if (d != "descending" && d != "ascending") throw InputError("unknown value at /convention/d");
            conv.descending = d == "descending";
        }
        if (c.contains("angular") && get_as<std::string>(c["angular"], "/convention/angular") != "x/2pi") {
            throw InputError("unsupported value at /convention/angular");
        }
        if (c.contains("radial")) {
            const auto r = get_as<std::string>(c["radial"], "/convention/radial");
            if (r == "y/2pi") {
                conv.radial = ModelConvention::Radial::Conformal;
            } else if (r == "y") {
                conv.radial = ModelConvention::Radial::Cylinder;
            } else {
                throw InputError("unknown value at /convention/radial");
            }
        }
    }
    Sl2Data s;
    if (j.contains("sl2")) {
        s = sl2_from_json(j["sl2"], "/sl2");
    } else if (j.contains("profile")) {
        auto profile = get_as<std::vector<int>>(j["profile"], "/profile");
        for (int b : profile) {
            if (b < 1) throw InputError("block sizes must be positive at /profile");
        }
        if (profile.empty()) throw InputError("empty /profile");
        s = sl2_triple(NilpotentLog::from_matrix(jordan_matrix(profile)));
    } else {
        throw InputError("missing field /sl2 or /profile");
    }
    const double alpha = get_as<double>(field(j, "alpha", ""), "/alpha");
    try {
        return ModelMetric(std::move(s), alpha, conv);
    } catch (const Error& e) {
        throw InputError(e.what());
    }
}

std::vector<GermExpression> germs_from_json(const Json& j) {
    if (!j.is_array()) throw InputError("expected an array of germs at /");
    std::vector<GermExpression> out;
    for (std::size_t gi = 0; gi < j.size(); ++gi) {
        const std::string gw = "/" + std::to_string(gi);
        GermExpression g;
        g.vars = get_as<int>(field(j[gi], "vars", gw), gw + "/vars");
        const Json& terms = field(j[gi], "terms", gw);
        if (!terms.is_array()) throw InputError("expected an array at " + gw + "/terms");
        for (std::size_t ti = 0; ti < terms.size(); ++ti) {
            const std::string tw = gw + "/terms/" + std::to_string(ti);
            const Json& tj = terms[ti];
            GermTerm t;
            if (tj.contains("a")) t.a = int_pair(tj["a"], tw + "/a", g.vars);
            if (tj.contains("logp")) t.logp = int_pair(tj["logp"], tw + "/logp", g.vars);
            t.labels = int_pair(field(tj, "labels", tw), tw + "/labels", g.vars);
            if (tj.contains("form")) {
                for (const auto& f : tj["form"]) {
                    const auto name = get_as<std::string>(f, tw + "/form");
                    if (name == "dt1/t1") {
                        t.form |= kDt1;
                    } else if (name == "dt2/t2") {
                        t.form |= kDt2;
                    } else {
                        throw InputError("unknown form factor at " + tw + "/form");
                    }
                }
            }
            if (tj.contains("coefficient")) t.coefficient = vector_from_json(tj["coefficient"], tw + "/coefficient");
            g.terms.push_back(std::move(t));
        }
        out.push_back(std::move(g));
    }
    return out;
}

Json germ_to_json(const GermExpression& g) {
    Json terms = Json::array();
    for (const auto& t : g.terms) {
        Json form = Json::array();
        if (t.form & kDt1) form.push_back("dt1/t1");
        if (t.form & kDt2) form.push_back("dt2/t2");
        Json tj = {{"a", t.a}, {"logp", t.logp}, {"form", form}, {"labels", t.labels}};
        if (g.vars == 1) {
            tj["a"] = Json::array({t.a[0]});
            tj["logp"] = Json::array({t.logp[0]});
            tj["labels"] = Json::array({t.labels[0]});
        }
        if (t.coefficient) tj["coefficient"] = vector_to_json(*t.coefficient);
        terms.push_back(tj);
    }
    return {{"vars", g.vars}, {"terms", terms}};
}

ManufacturedCase rhs_from_json(const Json& j, const PolarGrid& g) {
    if (!j.is_object()) throw InputError("expected an object at /");
    if (j.contains("case")) {
        const auto name = get_as<std::string>(j["case"], "/case");
        if (name != "constant" && name != "ring" && name != "sweep") throw InputError("unknown value at /case");
        return manufactured(name, g);
    }
    ManufacturedCase c;
    c.name = "sampled";
    c.f = matrix_from_json(field(j, "f", ""), "/f");
    if (c.f.rows() != g.nr || c.f.cols() != g.ntheta) throw InputError("/f does not match the grid shape");
    return c;
}

}  // namespace hb
