#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpref/model.hpp"

namespace cpref {

class CheckerNotFound : public Error {
 public:
  using Error::Error;
};

class CheckerParseFailure : public Error {
 public:
  CheckerParseFailure(std::string message, std::string raw_output)
      : Error(std::move(message)), raw_output_(std::move(raw_output)) {}
  const std::string& raw_output() const { return raw_output_; }

 private:
  std::string raw_output_;
};

/// Model text plus the CTL specifications to check against it, ready to be
/// replayed on an external SMV model checker.
struct SmvDocument {
  std::string model_text;
  std::vector<std::string> ctl_specs;  // each already prefixed with "SPEC "
  std::vector<std::pair<std::string, std::string>> name_map;  // renames only

  std::string full_text() const {
    std::string out = model_text;
    if (!ctl_specs.empty()) out += '\n';
    for (const auto& s : ctl_specs) out += s + '\n';
    return out;
  }
};

namespace detail {

inline const std::set<std::string>& smv_reserved() {
  static const std::set<std::string> words{
      "MODULE", "VAR",     "IVAR",   "FROZENVAR", "DEFINE", "INIT",  "TRANS",   "INVAR",
      "ASSIGN", "SPEC",    "CTLSPEC", "LTLSPEC",  "main",   "g",     "g1",      "g2",
      "start",  "TRUE",    "FALSE",  "case",      "esac",   "next",  "init",    "self",
      "union",  "in",      "mod",    "xor",       "xnor",   "word",  "boolean", "integer",
      "array",  "process", "of",     "MIN",       "MAX"};
  return words;
}

/// Collision-free SMV identifiers for every preference variable. A name may
/// not collide with reserved words nor with any already-claimed name,
/// ch-name or _0-name; offenders get "_v" suffixes, recorded in the map.
struct SmvNames {
  std::vector<std::string> state;  // per variable index
  std::vector<std::pair<std::string, std::string>> renames;

  explicit SmvNames(const PreferenceSpec& spec) {
    std::set<std::string> taken = smv_reserved();
    for (const auto& v : spec.variables) {
      std::string candidate = v.name;
      auto clashes = [&taken](const std::string& n) {
        return taken.count(n) || taken.count("ch" + n) || taken.count(n + "_0");
      };
      while (clashes(candidate)) candidate += "_v";
      taken.insert(candidate);
      taken.insert("ch" + candidate);
      taken.insert(candidate + "_0");
      if (candidate != v.name) renames.emplace_back(v.name, candidate);
      state.push_back(std::move(candidate));
    }
  }

  std::string ch(std::size_t i) const { return "ch" + state[i]; }
  std::string frozen(std::size_t i) const { return state[i] + "_0"; }
};

inline std::string domain_set(const Variable& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.domain.size(); ++i) {
    if (i) s += ',';
    s += v.domain[i];
  }
  return s + "}";
}

/// One guard: worse-value test on the target, the condition equalities in
/// declaration order, then the full ch pattern (1 on the target and every
/// less-important variable).
inline std::string guard_text(const PreferenceSpec& spec, const SmvNames& names,
                              const PreferenceStatement& p, bool reversed) {
  std::size_t target = *spec.variable_index(p.target);
  std::string s = names.state[target] + "=" + (reversed ? p.better : p.worse);
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const auto& name = spec.variables[i].name;
    auto it = p.condition.find(name);
    if (it != p.condition.end()) s += " & " + names.state[i] + "=" + it->second;
  }
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const auto& name = spec.variables[i].name;
    bool changing = name == p.target || p.less_important.count(name);
    s += " & " + names.ch(i) + "=" + (changing ? "1" : "0");
  }
  return s;
}

/// The next-value this statement forces on `var`: the better (or, reversed,
/// the worse) value when `var` is the target, the whole domain when it is
/// less important.
inline std::string guard_result(const PreferenceSpec& spec, const PreferenceStatement& p,
                                const std::string& var, bool reversed) {
  if (var == p.target) return reversed ? p.worse : p.better;
  return domain_set(spec.variable(var));
}

struct GuardedStatements {
  const std::vector<PreferenceStatement>* statements;
  bool reversed;
  std::string marker;  // g, g1 or g2
};

inline std::string emit_module(const PreferenceSpec& spec, const SmvNames& names,
                               const std::vector<GuardedStatements>& groups) {
  std::ostringstream os;
  os << "MODULE main\n";
  os << "VAR\n";
  for (std::size_t i = 0; i < spec.variables.size(); ++i)
    os << "  " << names.state[i] << " : " << domain_set(spec.variables[i]) << ";\n";
  for (const auto& group : groups) os << "  " << group.marker << " : {0,1};\n";
  os << "FROZENVAR\n";
  for (std::size_t i = 0; i < spec.variables.size(); ++i)
    os << "  " << names.frozen(i) << " : " << domain_set(spec.variables[i]) << ";\n";
  os << "IVAR\n";
  for (std::size_t i = 0; i < spec.variables.size(); ++i)
    os << "  " << names.ch(i) << " : {0,1};\n";
  os << "DEFINE\n";
  os << "start := ";
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    if (i) os << " & ";
    os << names.state[i] << "=" << names.frozen(i);
  }
  os << ";\n\nINIT start=TRUE;\n\nASSIGN\n";
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const std::string& var = spec.variables[i].name;
    os << " next(" << names.state[i] << ") := case\n";
    for (const auto& group : groups)
      for (const auto& p : *group.statements) {
        if (p.target != var && !p.less_important.count(var)) continue;
        os << "  " << guard_text(spec, names, p, group.reversed) << " : "
           << guard_result(spec, p, var, group.reversed) << ";\n";
      }
    os << "  TRUE : " << names.state[i] << ";\n esac;\n";
  }
  for (const auto& group : groups) {
    os << " next(" << group.marker << ") := case\n";
    for (const auto& p : *group.statements)
      os << "  " << guard_text(spec, names, p, group.reversed) << " : 1;\n";
    os << "  TRUE : 0;\n esac;\n";
  }
  return os.str();
}

}  // namespace detail

/// SMV text for one specification: state variables plus the g flip marker,
/// frozen start copies, one ch input per variable, and per-statement guards.
inline SmvDocument emit_smv(const PreferenceSpec& spec) {
  detail::SmvNames names(spec);
  SmvDocument doc;
  doc.name_map = names.renames;
  doc.model_text =
      detail::emit_module(spec, names, {{&spec.statements, false, "g"}});
  return doc;
}

/// The combined model for a subsumption or equivalence check: P1's flips set
/// g1, the reversals of P2's flips set g2.
inline SmvDocument emit_smv_combined(const PreferenceSpec& p1, const PreferenceSpec& p2) {
  PreferenceSpec aligned = align_universe(p1, p2);
  detail::SmvNames names(p1);
  SmvDocument doc;
  doc.name_map = names.renames;
  doc.model_text = detail::emit_module(
      p1, names, {{&p1.statements, false, "g1"}, {&aligned.statements, true, "g2"}});
  return doc;
}

namespace detail {

inline std::string outcome_formula(const PreferenceSpec& spec, const SmvNames& names,
                                   const Outcome& o) {
  std::string s = "(";
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    if (i) s += " & ";
    s += names.state[i] + "=" + o.value_of(spec.variables[i].name);
  }
  return s + ")";
}

}  // namespace detail

/// CTL specifications for a query. Dominance yields the reachability formula
/// and its negation (the negation's counterexample is the dominance proof);
/// consistency the start-cycle formula; subsumption and equivalence the
/// combined-model formula, which for equivalence covers the P1-to-P2
/// direction (swap the specifications for the other).
inline std::vector<std::string> emit_ctl(const Query& query, const PreferenceSpec& spec) {
  detail::SmvNames names(spec);
  switch (query.kind) {
    case QueryKind::Dominance: {
      std::string inner = detail::outcome_formula(spec, names, query.worse) + " -> EF " +
                          detail::outcome_formula(spec, names, query.better);
      return {"SPEC " + inner, "SPEC !(" + inner + ")"};
    }
    case QueryKind::Consistency:
      return {"SPEC start -> !(EX (g=1 & EF start))"};
    case QueryKind::Subsumption:
    case QueryKind::Equivalence:
      return {"SPEC AX (g1=1 -> EX E [ g2=1 U (start & g2=1) ])"};
  }
  return {};
}

struct CheckResult {
  std::string formula;
  bool holds = false;
  std::string counterexample;  // raw checker text, empty when none
};

/// Parses "-- specification ... is true/false" lines; everything between one
/// verdict and the next is kept as that verdict's counterexample text.
inline std::vector<CheckResult> parse_checker_output(const std::string& output) {
  std::vector<CheckResult> results;
  std::istringstream is(output);
  std::string line;
  while (std::getline(is, line)) {
    std::string_view sv = detail::trim(line);
    if (sv.rfind("-- specification", 0) == 0) {
      std::string_view rest = detail::trim(sv.substr(16));
      bool holds;
      if (rest.size() > 8 && rest.substr(rest.size() - 8) == " is true") {
        holds = true;
        rest = rest.substr(0, rest.size() - 8);
      } else if (rest.size() > 9 && rest.substr(rest.size() - 9) == " is false") {
        holds = false;
        rest = rest.substr(0, rest.size() - 9);
      } else {
        continue;
      }
      results.push_back({std::string(detail::trim(rest)), holds, ""});
    } else if (!results.empty()) {
      results.back().counterexample += line + "\n";
    }
  }
  if (results.empty())
    throw CheckerParseFailure("no specification verdicts found in checker output", output);
  return results;
}

/// Reconstructs the outcome sequence of a counterexample trace. The checker
/// prints full assignments for the first state and deltas afterwards, so
/// values carry forward; input and auxiliary variables are ignored.
inline std::vector<Outcome> parse_trace_states(const std::string& trace,
                                               const PreferenceSpec& spec,
                                               const std::vector<std::pair<std::string, std::string>>&
                                                   name_map = {}) {
  auto original_name = [&](const std::string& smv) -> std::string {
    for (const auto& [orig, renamed] : name_map)
      if (renamed == smv) return orig;
    return smv;
  };
  std::vector<Outcome> states;
  std::map<std::string, std::string> current;
  bool in_state = false, any_state = false;
  auto snapshot = [&]() {
    if (!any_state) return;
    Outcome o;
    for (const auto& v : spec.variables) {
      auto it = current.find(v.name);
      if (it == current.end())
        throw CheckerParseFailure("trace state missing variable '" + v.name + "'", trace);
      if (!v.has_value(it->second))
        throw CheckerParseFailure(
            "trace value '" + it->second + "' not in the domain of '" + v.name + "'", trace);
      o.values[v.name] = it->second;
    }
    states.push_back(std::move(o));
  };
  std::istringstream is(trace);
  std::string line;
  while (std::getline(is, line)) {
    std::string_view sv = detail::trim(line);
    if (sv.rfind("-> State:", 0) == 0) {
      snapshot();
      in_state = true;
      any_state = true;
      continue;
    }
    if (sv.rfind("-> Input:", 0) == 0) {
      in_state = false;
      continue;
    }
    if (!in_state) continue;
    auto eq = sv.find('=');
    if (eq == std::string_view::npos) continue;
    std::string name = original_name(std::string(detail::trim(sv.substr(0, eq))));
    std::string value(detail::trim(sv.substr(eq + 1)));
    if (spec.find_variable(name)) current[name] = value;
  }
  snapshot();
  return states;
}

/// Writes the document to a temporary file and runs the external checker on
/// it, one file path argument, capturing stdout.
inline std::vector<CheckResult> run_external(const SmvDocument& doc,
                                             const std::string& checker_path) {
  namespace fs = std::filesystem;
  fs::path file = fs::temp_directory_path() /
                  ("cpref-" + std::to_string(
                                  std::chrono::steady_clock::now().time_since_epoch().count()) +
                   ".smv");
  {
    std::ofstream out(file);
    if (!out) throw Error("cannot write temporary model file " + file.string());
    out << doc.full_text();
  }
  std::string command = "\"" + checker_path + "\" \"" + file.string() + "\" 2>&1";
  std::string output;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) {
    fs::remove(file);
    throw CheckerNotFound("cannot run checker '" + checker_path + "'");
  }
  std::array<char, 4096> buffer;
  std::size_t n;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
    output.append(buffer.data(), n);
  int status = ::pclose(pipe);
  fs::remove(file);
  if (status != 0 && output.find("-- specification") == std::string::npos)
    throw CheckerNotFound("checker '" + checker_path + "' failed (exit status " +
                          std::to_string(status) + "): " + output.substr(0, 400));
  return parse_checker_output(output);
}

}  // namespace cpref
