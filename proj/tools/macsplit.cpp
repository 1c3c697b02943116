// macsplit: plan and verify rate-splitting transmissions for the N-user
// Gaussian multiple-access channel.
//
// Subcommands:
//   check    classify a rate tuple against the capacity region
//   vertex   rates reached by plain successive decoding under a permutation
//   split    compute splitting coefficients, virtual users, decode order
//   verify   independently re-verify an emitted plan file
//   sample   generate a dominant-face rate tuple from seeded vertex mixing
//
// Exit codes: 0 success, 1 semantic failure (not tight, verification
// failed), 2 usage or parse error.

#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macsplit/planfile.hpp"

namespace {

using namespace macsplit;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double resolve_tolerance(const CLI::App& app, double flag_value,
                         const ProblemFile& problem) {
  if (app.count("--tolerance") > 0) return flag_value;
  if (problem.tolerance) return *problem.tolerance;
  return kDefaultTolerance;
}

std::string subset_text(const std::vector<std::size_t>& subset) {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k) os << ", ";
    os << subset[k] + 1;
  }
  os << '}';
  return os.str();
}

void print_stack_diagram(const SplitPlan& plan, const RateAllocation& ra,
                         const VerificationReport& report, bool passed) {
  std::printf("noise floor: %s\n", fmt_short(ra.noise).c_str());
  std::printf("stack (bottom -> top):\n");
  for (const VirtualUser& vu : plan.virtual_users) {
    std::printf("  [%14.8f, %14.8f)  power %12.8f  user %d  rate %.8f\n",
                vu.nis, vu.nis + vu.power, vu.power, vu.parent_user + 1,
                vu.rate);
  }
  std::printf("epsilon:");
  for (std::size_t u = 0; u < plan.epsilon.size(); ++u) {
    std::printf("  u%zu %.8f", u + 1, plan.epsilon[u]);
  }
  std::printf("\ndecode order (first decoded first):");
  for (std::size_t k = 0; k < plan.decode_order.size(); ++k) {
    const VirtualUser& vu = plan.virtual_users[plan.decode_order[k]];
    std::printf("%s u%d", k ? " ->" : "", vu.parent_user + 1);
  }
  double max_err = 0.0;
  for (double e : report.per_user_rate_error) max_err = std::max(max_err, e);
  std::printf("\nvirtual users: %zu (limit %zu)\n", report.virtual_count,
              2 * ra.size() - 1);
  std::printf("verification: %s (max stack gap %s, max rate error %s)\n",
              passed ? "PASS" : "FAIL", fmt_short(report.max_stack_gap).c_str(),
              fmt_short(max_err).c_str());
}

int run_check(const std::string& path, double tol, const std::string& format,
              const CLI::App& app, double tol_flag) {
  const ProblemFile problem = read_problem_file(path);
  const RateAllocation ra = problem.to_allocation();
  tol = resolve_tolerance(app, tol_flag, problem);
  const MembershipVerdict verdict = polymatroid_membership(ra, tol);
  if (format == "json") {
    std::ostringstream os;
    os << "{\n  \"status\": \"";
    switch (verdict.status) {
      case MembershipStatus::DominantFace: os << "dominant-face"; break;
      case MembershipStatus::Interior: os << "interior"; break;
      case MembershipStatus::Outside: os << "outside"; break;
    }
    os << "\"";
    if (verdict.violated_subset) {
      os << ",\n  \"violated_subset\": [";
      for (std::size_t k = 0; k < verdict.violated_subset->size(); ++k) {
        if (k) os << ", ";
        os << (*verdict.violated_subset)[k] + 1;
      }
      os << "]";
    }
    os << ",\n  \"max_violation\": " << fmt(verdict.max_violation);
    os << ",\n  \"sum_gap\": " << fmt(verdict.sum_gap) << "\n}\n";
    std::fputs(os.str().c_str(), stdout);
  } else {
    switch (verdict.status) {
      case MembershipStatus::DominantFace:
        std::printf("status: dominant-face (sum rate matches the capacity within %s)\n",
                    fmt_short(tol).c_str());
        break;
      case MembershipStatus::Interior:
        std::printf("status: interior\ngap to the dominant face: %s\n",
                    fmt_short(verdict.sum_gap).c_str());
        break;
      case MembershipStatus::Outside:
        std::printf("status: outside\nviolated subset: %s  excess rate: %s\n",
                    subset_text(*verdict.violated_subset).c_str(),
                    fmt_short(verdict.max_violation).c_str());
        break;
    }
  }
  return verdict.status == MembershipStatus::DominantFace ? 0 : 1;
}

int run_vertex(const std::string& path, const std::vector<int>& pi_arg,
               const std::string& format, const std::string& output) {
  const ProblemFile problem = read_problem_file(path);
  const std::size_t n = problem.powers.size();
  Permutation pi(n);
  if (pi_arg.empty()) {
    std::iota(pi.begin(), pi.end(), std::size_t{0});
  } else {
    if (pi_arg.size() != n) {
      throw std::invalid_argument("vertex: permutation length must match the user count");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (pi_arg[k] < 1 || static_cast<std::size_t>(pi_arg[k]) > n) {
        throw std::invalid_argument("vertex: permutation entries must be 1-based user ids");
      }
      pi[k] = static_cast<std::size_t>(pi_arg[k]) - 1;
    }
    if (!is_permutation(pi)) {
      throw std::invalid_argument("vertex: --pi is not a permutation");
    }
  }
  const std::vector<Rate> rates = vertex_rates(problem.powers, problem.noise, pi);
  if (format == "json") {
    std::ostringstream os;
    os << "{\n  \"rates\": [";
    for (std::size_t k = 0; k < n; ++k) os << (k ? ", " : "") << fmt(rates[k]);
    os << "],\n  \"receiver_decode_order\": [";
    for (std::size_t k = 0; k < n; ++k) {
      os << (k ? ", " : "") << pi[n - 1 - k] + 1;
    }
    os << "]\n}\n";
    std::fputs(os.str().c_str(), stdout);
  } else {
    std::printf("rates:");
    for (double r : rates) std::printf(" %s", fmt(r).c_str());
    std::printf("\nreceiver decode order:");
    for (std::size_t k = 0; k < n; ++k) {
      std::printf("%s u%zu", k ? " ->" : "", pi[n - 1 - k] + 1);
    }
    std::printf("\n");
  }
  if (!output.empty()) {
    ProblemFile out = problem;
    out.rates = rates;
    write_file(output, problem_to_json(out));
  }
  return 0;
}

int run_split(const std::string& path, const std::string& format,
              const std::string& output, bool emit_tree, const CLI::App& app,
              double tol_flag) {
  const ProblemFile problem = read_problem_file(path);
  const RateAllocation ra = problem.to_allocation();
  const double tol = resolve_tolerance(app, tol_flag, problem);

  const SplitPlan plan = compute_split_plan(ra, tol);
  const VerificationReport report = verify_plan(plan, ra, tol);
  const bool passed = verification_passed(report, ra, tol);

  PlanFile file;
  file.problem = problem;
  file.problem.tolerance = tol;
  file.plan = plan;
  file.report = report;
  if (emit_tree) file.tree = build_combination_tree(ra, tol);

  const std::string text = plan_to_json(file);
  if (!output.empty()) write_file(output, text);
  if (format == "json") {
    std::fputs(text.c_str(), stdout);
  } else {
    print_stack_diagram(plan, ra, report, passed);
  }
  return passed ? 0 : 1;
}

int run_verify(const std::string& path, const std::string& format,
               const CLI::App& app, double tol_flag) {
  const PlanFile file = read_plan_file(path);
  const RateAllocation ra = file.problem.to_allocation();
  const double tol = resolve_tolerance(app, tol_flag, file.problem);
  const VerificationReport report = verify_plan(file.plan, ra, tol);
  const bool passed = verification_passed(report, ra, tol);
  double max_err = 0.0;
  for (double e : report.per_user_rate_error) max_err = std::max(max_err, e);
  if (format == "json") {
    std::ostringstream os;
    os << "{\n  \"passed\": " << (passed ? "true" : "false");
    os << ",\n  \"stacking_ok\": " << (report.stacking_ok ? "true" : "false");
    os << ",\n  \"max_stack_gap\": " << fmt(report.max_stack_gap);
    os << ",\n  \"per_user_rate_error\": [";
    for (std::size_t k = 0; k < report.per_user_rate_error.size(); ++k) {
      os << (k ? ", " : "") << fmt(report.per_user_rate_error[k]);
    }
    os << "],\n  \"virtual_count\": " << report.virtual_count << "\n}\n";
    std::fputs(os.str().c_str(), stdout);
  } else {
    std::printf("verification: %s\n", passed ? "PASS" : "FAIL");
    std::printf("stacking: %s  max stack gap: %s\n",
                report.stacking_ok ? "ok" : "BROKEN",
                fmt_short(report.max_stack_gap).c_str());
    std::printf("max rate error: %s  virtual users: %zu\n",
                fmt_short(max_err).c_str(), report.virtual_count);
  }
  return passed ? 0 : 1;
}

int run_sample(const std::string& path, std::uint64_t seed,
               const std::string& format, const std::string& output) {
  const ProblemFile problem = read_problem_file(path);
  for (double p : problem.powers) {
    if (!(p > 0.0)) throw std::invalid_argument("sample: powers must be positive");
  }
  const RateAllocation ra =
      sample_dominant_face(problem.powers, problem.noise, seed);
  ProblemFile out = problem;
  out.rates = ra.rates;
  const std::string text = problem_to_json(out);
  if (!output.empty()) write_file(output, text);
  if (format == "json") {
    std::fputs(text.c_str(), stdout);
  } else {
    std::printf("seed: %" PRIu64 "\nrates:", seed);
    for (double r : ra.rates) std::printf(" %s", fmt(r).c_str());
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-splitting planner for the Gaussian multiple-access channel"};
  app.require_subcommand(1);

  double tol_flag = kDefaultTolerance;
  std::string format = "text";
  std::string output;
  app.add_option("--tolerance", tol_flag,
                 "relative tolerance for equality comparisons")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", format, "output format (text or json)")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--output", output, "write the result to this path");

  std::string problem_path, plan_path;
  std::vector<int> pi_arg;
  bool emit_tree = false;
  std::uint64_t seed = 0;

  CLI::App* check = app.add_subcommand(
      "check", "classify a rate tuple against the capacity region");
  check->fallthrough();
  check->add_option("problem", problem_path, "problem JSON file")->required();

  CLI::App* vertex = app.add_subcommand(
      "vertex", "successive-decoding rates for one permutation");
  vertex->fallthrough();
  vertex->add_option("problem", problem_path, "problem JSON file")->required();
  vertex->add_option("--pi", pi_arg,
                     "encoding order as comma-separated 1-based user ids "
                     "(bottom of the stack first; default identity)")
      ->delimiter(',');

  CLI::App* split = app.add_subcommand(
      "split", "compute a full splitting plan and verify it");
  split->fallthrough();
  split->add_option("problem", problem_path, "problem JSON file")->required();
  split->add_flag("--emit-tree", emit_tree,
                  "include the combination tree in the plan output");

  CLI::App* verify =
      app.add_subcommand("verify", "re-verify an emitted plan file");
  verify->fallthrough();
  verify->add_option("plan", plan_path, "plan JSON file")->required();

  CLI::App* sample = app.add_subcommand(
      "sample", "generate a dominant-face rate tuple (test helper)");
  sample->fallthrough();
  sample->add_option("problem", problem_path,
                     "problem JSON file (rates are ignored)")
      ->required();
  sample->add_option("--seed", seed, "seed for the deterministic generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check) return run_check(problem_path, tol_flag, format, app, tol_flag);
    if (*vertex) return run_vertex(problem_path, pi_arg, format, output);
    if (*split) return run_split(problem_path, format, output, emit_tree, app, tol_flag);
    if (*verify) return run_verify(plan_path, format, app, tol_flag);
    if (*sample) return run_sample(problem_path, seed, format, output);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotTightError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.verdict().status == MembershipStatus::Interior) {
      std::cerr << "gap to the dominant face: " << fmt_short(e.verdict().sum_gap)
                << "\n";
    } else if (e.verdict().violated_subset) {
      std::cerr << "violated subset: "
                << subset_text(*e.verdict().violated_subset)
                << "  excess rate: " << fmt_short(e.verdict().max_violation)
                << "\n";
    }
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
