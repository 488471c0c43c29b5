#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gail/core.hpp"

namespace gail::cli {

using Json = nlohmann::ordered_json;

/// Runs one command line (without the program name). Exit codes: 0 clean,
/// 1 configuration or parse error, 2 a warning exit flag was raised,
/// 3 an embedded example failed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Single JSON report object with stable field order.
Json make_report(const std::string& command, Json inputs, Json estimate, const SolverDiagnostics& diag,
                 bool with_time);

struct Fixture {
  std::string name;
  std::string command;
  /// Produces a report carrying "pass", "truth" and "truth_source".
  std::function<Json(std::uint64_t seed, bool with_time)> run;
};

/// The embedded table of worked examples.
const std::vector<Fixture>& doc_fixtures();

/// Runs every fixture; returns {"seed", "examples": [...], "summary": {...}}.
Json run_doc_examples(std::uint64_t seed, bool with_time = false);

/// Parses "l1,u1;l2,u2;..." ("inf" and "-inf" allowed) into lower/upper rows.
void parse_box(const std::string& text, Eigen::VectorXd& lower, Eigen::VectorXd& upper);

}  // namespace gail::cli
