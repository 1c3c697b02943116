#pragma once

#include <optional>
#include <string>

#include "macsplit/verifier.hpp"

namespace macsplit {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-disk problem description. Rates may be absent for inputs that only
/// carry powers (vertex and sample subcommands fill them in).
struct ProblemFile {
  std::vector<double> powers;
  std::vector<double> rates;  // empty when not specified
  double noise = 1.0;
  std::optional<double> tolerance;

  bool has_rates() const { return !rates.empty(); }
  RateAllocation to_allocation() const;  // throws ParseError without rates
};

/// On-disk plan: the problem echo, the splitting result, its verification
/// report, and optionally the combination tree. User ids and piece ids are
/// 1-based in the file; decode_order entries index into virtual_users.
struct PlanFile {
  ProblemFile problem;
  SplitPlan plan;
  VerificationReport report;
  std::optional<CombinationTree> tree;
};

// All emitters print numbers with 17 significant digits (lossless binary64
// round-trip) and a fixed field order, so output is byte-stable.
std::string problem_to_json(const ProblemFile& problem);
std::string plan_to_json(const PlanFile& file);

ProblemFile parse_problem_json(const std::string& text);
PlanFile parse_plan_json(const std::string& text);

ProblemFile read_problem_file(const std::string& path);
PlanFile read_plan_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace macsplit
