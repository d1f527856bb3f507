#pragma once

#include <string>
#include <vector>

#include "hb/dbar.hpp"
#include "hb/error.hpp"
#include "hb/l2sheaf.hpp"
#include "hb/model.hpp"
#include "hb/monodromy.hpp"
#include "hb/report.hpp"

namespace hb {

/// Malformed or schema-violating input; the CLI maps it to exit status 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

std::string read_file(const std::string& path);

/// Parses text, reporting "malformed JSON in <source> at line L, column C".
Json parse_json(const std::string& text, const std::string& source);

/// Rows of entries; an entry is a number, [re, im], or a string "p/q".
/// `where` is a JSON-pointer-like path used in error messages.
ComplexMatrix matrix_from_json(const Json& j, const std::string& where);
/// Real entries as numbers, complex ones as [re, im].
Json matrix_to_json(const ComplexMatrix& m);
ComplexVector vector_from_json(const Json& j, const std::string& where);
Json vector_to_json(const ComplexVector& v);

/// {"gamma": matrix} (unipotent monodromy) or {"N": matrix} (its logarithm).
NilpotentLog nilpotent_from_json(const Json& j);

/// { "n", "N", "blocks": [{size, basis, labels}], "H0", "Y" }.
Json sl2_to_json(const Sl2Data& s);
/// Rebuilds the triple from "N", the other fields being derived data.
Sl2Data sl2_from_json(const Json& j, const std::string& where);

/// { "sl2": sl2 payload, "alpha", "convention": {"d", "angular", "radial"} };
/// "profile": [sizes] may replace "sl2" and builds the Jordan normal form.
ModelMetric model_from_json(const Json& j);
Json convention_to_json(const ModelConvention& c);

/// [{ "vars", "terms": [{ "a", "logp", "form", "labels", "coefficient"? }] }].
std::vector<GermExpression> germs_from_json(const Json& j);
Json germ_to_json(const GermExpression& g);

/// {"case": name} for a manufactured case, or {"f": rows} sampled on the grid.
ManufacturedCase rhs_from_json(const Json& j, const PolarGrid& g);

}  // namespace hb
