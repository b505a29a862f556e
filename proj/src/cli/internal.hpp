#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contourlab/cli.hpp"

namespace contourlab::cli {

struct Check {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

/// Suites: group, psi, monodromy, melnikov, normalvar, all.
bool known_suite(const std::string& suite);
std::vector<Check> verify_suite(const ProblemSpec& spec, const std::string& suite, std::uint64_t seed);

/// Number list or {"from": a, "to": b, "n": k} (k >= 1, endpoints included).
std::vector<cplx> grid_from_json(const io::json& j);

}  // namespace contourlab::cli
