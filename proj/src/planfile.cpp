#include "macsplit/planfile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace macsplit {

namespace {

using nlohmann::json;

// 17 significant digits round-trip any binary64 value exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_number_array(std::ostringstream& os, const std::vector<double>& values) {
  os << '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << ", ";
    os << fmt(values[k]);
  }
  os << ']';
}

void emit_index_array(std::ostringstream& os, const std::vector<std::size_t>& values,
                      std::size_t base) {
  os << '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << ", ";
    os << values[k] + base;
  }
  os << ']';
}

void emit_problem(std::ostringstream& os, const ProblemFile& p,
                  const std::string& indent) {
  os << "{\n";
  os << indent << "  \"powers\": ";
  emit_number_array(os, p.powers);
  if (p.has_rates()) {
    os << ",\n" << indent << "  \"rates\": ";
    emit_number_array(os, p.rates);
  }
  os << ",\n" << indent << "  \"noise\": " << fmt(p.noise);
  if (p.tolerance) {
    os << ",\n" << indent << "  \"tolerance\": " << fmt(*p.tolerance);
  }
  os << "\n" << indent << "}";
}

const char* relation_name(PairRelation rel) {
  switch (rel) {
    case PairRelation::Overlapping: return "overlapping";
    case PairRelation::Contiguous: return "contiguous";
    default: return "discontinuous";
  }
}

PairRelation relation_from_name(const std::string& name) {
  if (name == "overlapping") return PairRelation::Overlapping;
  if (name == "contiguous") return PairRelation::Contiguous;
  if (name == "discontinuous") return PairRelation::Discontinuous;
  throw ParseError("plan file: unknown pair relation '" + name + "'");
}

void emit_tree(std::ostringstream& os, const CombinationTree& tree) {
  os << "{\n    \"nodes\": [\n";
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const TreeNode& node = tree.nodes[k];
    os << "      {\"id\": " << k + 1 << ", \"power\": " << fmt(node.entry.power)
       << ", \"rate\": " << fmt(node.entry.rate)
       << ", \"nis\": " << fmt(node.entry.nis) << ", \"members\": [";
    for (std::size_t j = 0; j < node.entry.members.size(); ++j) {
      if (j) os << ", ";
      os << node.entry.members[j] + 1;
    }
    os << "], \"children\": ";
    if (node.is_leaf()) {
      os << "null, \"relation\": null";
    } else {
      os << '[' << node.child_low + 1 << ", " << node.child_high + 1
         << "], \"relation\": \"" << relation_name(node.relation) << '"';
    }
    os << '}' << (k + 1 < tree.nodes.size() ? "," : "") << '\n';
  }
  os << "    ]\n  }";
}

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(where + ": missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

std::vector<double> require_number_array(const json& j, const std::string& key,
                                         const std::string& where) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(where + ": missing or non-array field '" + key + "'");
  }
  std::vector<double> out;
  for (const json& v : j[key]) {
    if (!v.is_number()) {
      throw ParseError(where + ": field '" + key + "' must contain numbers only");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("problem: expected a JSON object");
  ProblemFile p;
  p.powers = require_number_array(j, "powers", "problem");
  if (p.powers.empty()) throw ParseError("problem: powers must not be empty");
  if (j.contains("rates")) {
    p.rates = require_number_array(j, "rates", "problem");
    if (p.rates.size() != p.powers.size()) {
      throw ParseError("problem: rates and powers must have the same length");
    }
  }
  p.noise = require_number(j, "noise", "problem");
  if (j.contains("tolerance")) {
    if (!j["tolerance"].is_number()) {
      throw ParseError("problem: tolerance must be a number");
    }
    p.tolerance = j["tolerance"].get<double>();
  }
  return p;
}

}  // namespace

RateAllocation ProblemFile::to_allocation() const {
  if (!has_rates()) {
    throw ParseError("problem: a rate tuple is required for this operation");
  }
  try {
    return RateAllocation(powers, rates, noise);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("problem: ") + e.what());
  }
}

std::string problem_to_json(const ProblemFile& problem) {
  std::ostringstream os;
  emit_problem(os, problem, "");
  os << '\n';
  return os.str();
}

std::string plan_to_json(const PlanFile& file) {
  const SplitPlan& plan = file.plan;
  std::vector<std::size_t> decode_position(plan.virtual_users.size(), 0);
  for (std::size_t k = 0; k < plan.decode_order.size(); ++k) {
    decode_position[plan.decode_order[k]] = k;
  }

  std::ostringstream os;
  os << "{\n  \"problem\": ";
  emit_problem(os, file.problem, "  ");
  os << ",\n  \"epsilon\": ";
  emit_number_array(os, plan.epsilon);
  os << ",\n  \"virtual_users\": [\n";
  for (std::size_t k = 0; k < plan.virtual_users.size(); ++k) {
    const VirtualUser& vu = plan.virtual_users[k];
    os << "    {\"user\": " << vu.parent_user + 1
       << ", \"power\": " << fmt(vu.power) << ", \"nis\": " << fmt(vu.nis)
       << ", \"rate\": " << fmt(vu.rate)
       << ", \"decode_position\": " << decode_position[k] + 1 << '}'
       << (k + 1 < plan.virtual_users.size() ? "," : "") << '\n';
  }
  os << "  ],\n  \"decode_order\": ";
  emit_index_array(os, plan.decode_order, 1);
  os << ",\n  \"verification\": {\n";
  os << "    \"stacking_ok\": " << (file.report.stacking_ok ? "true" : "false")
     << ",\n";
  os << "    \"per_user_rate_error\": ";
  emit_number_array(os, file.report.per_user_rate_error);
  os << ",\n    \"reconstructed_rates\": ";
  emit_number_array(os, file.report.reconstructed_rates);
  os << ",\n    \"virtual_count\": " << file.report.virtual_count;
  os << ",\n    \"max_stack_gap\": " << fmt(file.report.max_stack_gap);
  os << "\n  }";
  if (file.tree) {
    os << ",\n  \"tree\": ";
    emit_tree(os, *file.tree);
  }
  os << "\n}\n";
  return os.str();
}

ProblemFile parse_problem_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("problem: invalid JSON: ") + e.what());
  }
  return problem_from_json(j);
}

PlanFile parse_plan_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan file: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("problem")) {
    throw ParseError("plan file: missing 'problem' object");
  }
  PlanFile file;
  file.problem = problem_from_json(j["problem"]);
  if (!file.problem.has_rates()) {
    throw ParseError("plan file: the embedded problem must carry rates");
  }
  const std::size_t n = file.problem.powers.size();

  file.plan.epsilon = require_number_array(j, "epsilon", "plan file");
  if (file.plan.epsilon.size() != n) {
    throw ParseError("plan file: epsilon length does not match the user count");
  }

  if (!j.contains("virtual_users") || !j["virtual_users"].is_array()) {
    throw ParseError("plan file: missing 'virtual_users' array");
  }
  for (const json& v : j["virtual_users"]) {
    if (!v.is_object()) throw ParseError("plan file: virtual user must be an object");
    VirtualUser vu;
    const double user = require_number(v, "user", "plan file virtual user");
    if (user < 1 || user > static_cast<double>(n) ||
        user != static_cast<double>(static_cast<int>(user))) {
      throw ParseError("plan file: virtual user references an invalid user id");
    }
    vu.parent_user = static_cast<int>(user) - 1;
    vu.power = require_number(v, "power", "plan file virtual user");
    vu.nis = require_number(v, "nis", "plan file virtual user");
    vu.rate = require_number(v, "rate", "plan file virtual user");
    file.plan.virtual_users.push_back(vu);
  }
  const std::size_t m = file.plan.virtual_users.size();

  const std::vector<double> order =
      require_number_array(j, "decode_order", "plan file");
  for (double v : order) {
    if (v < 1 || v > static_cast<double>(m) ||
        v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw ParseError("plan file: decode_order entry out of range");
    }
    file.plan.decode_order.push_back(static_cast<std::size_t>(v) - 1);
  }

  if (j.contains("verification")) {
    const json& v = j["verification"];
    if (!v.is_object() || !v.contains("stacking_ok") ||
        !v["stacking_ok"].is_boolean()) {
      throw ParseError("plan file: malformed verification report");
    }
    file.report.stacking_ok = v["stacking_ok"].get<bool>();
    file.report.per_user_rate_error =
        require_number_array(v, "per_user_rate_error", "verification");
    file.report.reconstructed_rates =
        require_number_array(v, "reconstructed_rates", "verification");
    file.report.virtual_count =
        static_cast<std::size_t>(require_number(v, "virtual_count", "verification"));
    file.report.max_stack_gap = require_number(v, "max_stack_gap", "verification");
  }

  if (j.contains("tree")) {
    const json& t = j["tree"];
    if (!t.is_object() || !t.contains("nodes") || !t["nodes"].is_array()) {
      throw ParseError("plan file: malformed tree dump");
    }
    CombinationTree tree;
    tree.noise = file.problem.noise;
    tree.user_count = n;
    const std::size_t node_count = t["nodes"].size();
    for (const json& nj : t["nodes"]) {
      if (!nj.is_object()) throw ParseError("plan file: tree node must be an object");
      TreeNode node;
      node.entry.id = static_cast<int>(require_number(nj, "id", "tree node")) - 1;
      node.entry.power = require_number(nj, "power", "tree node");
      node.entry.rate = require_number(nj, "rate", "tree node");
      node.entry.nis = require_number(nj, "nis", "tree node");
      for (double mv : require_number_array(nj, "members", "tree node")) {
        node.entry.members.push_back(static_cast<int>(mv) - 1);
      }
      if (nj.contains("children") && !nj["children"].is_null()) {
        const json& c = nj["children"];
        if (!c.is_array() || c.size() != 2) {
          throw ParseError("plan file: tree node children must be a pair");
        }
        node.child_low = c[0].get<int>() - 1;
        node.child_high = c[1].get<int>() - 1;
        if (node.child_low < 0 || node.child_high < 0 ||
            node.child_low >= static_cast<int>(node_count) ||
            node.child_high >= static_cast<int>(node_count)) {
          throw ParseError("plan file: tree node child id out of range");
        }
        if (!nj.contains("relation") || !nj["relation"].is_string()) {
          throw ParseError("plan file: internal tree node needs a relation");
        }
        node.relation = relation_from_name(nj["relation"].get<std::string>());
      }
      tree.nodes.push_back(std::move(node));
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      const TreeNode& node = tree.nodes[k];
      if (!node.is_leaf()) {
        tree.merge_order.push_back(static_cast<int>(k));
        tree.nodes[static_cast<std::size_t>(node.child_low)].parent = static_cast<int>(k);
        tree.nodes[static_cast<std::size_t>(node.child_high)].parent = static_cast<int>(k);
      }
    }
    file.tree = std::move(tree);
  }
  return file;
}

ProblemFile read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_json(buffer.str());
}

PlanFile read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_plan_json(buffer.str());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace macsplit
