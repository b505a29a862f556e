#pragma once

#include <map>
#include <ostream>
#include <string>

#include "contourlab/fiber.hpp"
#include "contourlab/ham_time.hpp"
#include "contourlab/io.hpp"
#include "contourlab/monodromy.hpp"
#include "contourlab/normal_var.hpp"

namespace contourlab::cli {

/// Tolerances addressable as "tolerances": {...} in the spec file and as
/// --tol-<name> on the command line (the flag wins).
struct Tolerances {
  std::map<std::string, double> values;

  Tolerances();
  double operator[](const std::string& name) const;
  void set(const std::string& name, double v);  ///< throws on unknown names or v <= 0
  FiberControls fiber_controls() const;
  FlowControls flow_controls() const;
};

/// Parsed problem file. Missing coefficient polynomials default to
/// A = 1, b = 1, p = x, S = 1 and P = Q = R = 0.
struct ProblemSpec {
  Poly H, A, b, p, P, Q, R, S;
  io::json loops = io::json::object();
  io::json doc = io::json::object();
  Tolerances tol;

  Coefficients coefficients() const { return {A, b, p}; }
  System3D system(double eps) const;
  /// Frame recipe from the "monodromy" section (elliptic defaults).
  FrameSetup frame_setup() const;
};

ProblemSpec parse_spec(const io::json& doc);
ProblemSpec load_spec(const std::string& path);

/// Builds the named loop from its recipe, resolving referenced loops first.
/// Recipes: real_oval, vanishing_cycle, frame, transport, compose, invert,
/// rebase. Results are cached in `cache`.
FiberLoop build_loop(const ProblemSpec& spec, const std::string& name, std::map<std::string, FiberLoop>& cache);

/// Entry point of the command-line tool. Exit codes: 0 success, 1 a
/// computation or verification failed, 2 usage or spec error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace contourlab::cli
