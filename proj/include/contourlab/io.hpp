#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/melnikov.hpp"
#include "contourlab/monodromy.hpp"
#include "contourlab/normal_var.hpp"
#include "contourlab/poly.hpp"
#include "contourlab/tri_group.hpp"

namespace contourlab::io {

using json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double ("%.17g").
std::string fmt(double v);

json to_json(cplx z);
cplx cplx_from_json(const json& j);

/// {"terms": [[deg_x, deg_y, re, im], ...]}; a bare number is a constant.
json to_json(const Poly& p);
Poly poly_from_json(const json& j);

/// {"h": [re, im], "points": [[xr, xi, yr, yi], ...]}
json to_json(const FiberLoop& loop);
FiberLoop loop_from_json(const json& j);

/// {"samples": [[re, im], ...], "closed": bool}
json to_json(const BasePath& path);
BasePath path_from_json(const json& j);

json to_json(const TriMatrix& w);
TriMatrix tri_from_json(const json& j);

json to_json(const LoopFunctionals& f);
json to_json(const CriticalData& c);
json to_json(const MonodromyReport& r);
json to_json(const MelnikovExpansion& e);
json to_json(const System3D& s);

/// One CSV row, every number through fmt.
void write_row(std::ostream& os, const std::vector<std::string>& cells);

}  // namespace contourlab::io
