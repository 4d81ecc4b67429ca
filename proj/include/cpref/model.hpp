#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cpref {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome does not range over exactly the declared variables.
class OutcomeMismatch : public Error {
 public:
  using Error::Error;
};

/// A referenced variable is not declared in the specification.
class UndefinedVariable : public Error {
 public:
  using Error::Error;
};

/// A referenced value is not in the variable's domain.
class UndefinedValue : public Error {
 public:
  using Error::Error;
};

/// An assignment string without a '=' separator.
class MalformedAssignment : public Error {
 public:
  using Error::Error;
};

/// An outcome string that does not assign every declared variable.
class IncompleteOutcome : public Error {
 public:
  using Error::Error;
};

/// The two specifications do not declare the same variables and domains.
class VariableMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Variable names must be usable as SMV identifiers.
inline bool is_valid_name(std::string_view s) {
  if (s.empty()) return false;
  if (s[0] >= '0' && s[0] <= '9') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_';
  });
}

/// Domain values may additionally be pure numerals (SMV integer constants).
inline bool is_valid_value(std::string_view s) {
  if (s.empty()) return false;
  bool numeral = std::all_of(s.begin(), s.end(),
                             [](char c) { return c >= '0' && c <= '9'; });
  return numeral || is_valid_name(s);
}

struct Variable {
  std::string name;
  std::vector<std::string> domain;  // declaration order; used for encoding, never preference

  bool operator==(const Variable&) const = default;

  bool has_value(std::string_view v) const {
    return std::find(domain.begin(), domain.end(), v) != domain.end();
  }

  std::size_t value_index(std::string_view v) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (domain[i] == v) return i;
    throw UndefinedValue("value '" + std::string(v) + "' is not in the domain of variable '" +
                         name + "'");
  }
};

/// A total assignment of every declared variable to a domain value.
struct Outcome {
  std::map<std::string, std::string> values;

  const std::string& value_of(const std::string& var) const {
    auto it = values.find(var);
    if (it == values.end())
      throw OutcomeMismatch("outcome assigns no value to variable '" + var + "'");
    return it->second;
  }

  bool operator==(const Outcome&) const = default;
  auto operator<=>(const Outcome&) const = default;
};

/// One statement "condition: target=better > target=worse [lessImportant]".
struct PreferenceStatement {
  std::string id;
  std::string target;
  std::map<std::string, std::string> condition;  // partial assignment, may be empty
  std::string better;
  std::string worse;
  std::set<std::string> less_important;  // may be empty

  bool operator==(const PreferenceStatement&) const = default;
};

struct PreferenceSpec {
  std::string name;
  std::vector<Variable> variables;
  std::vector<PreferenceStatement> statements;

  bool operator==(const PreferenceSpec&) const = default;

  const Variable* find_variable(std::string_view n) const {
    for (const auto& v : variables)
      if (v.name == n) return &v;
    return nullptr;
  }

  const Variable& variable(std::string_view n) const {
    if (const Variable* v = find_variable(n)) return *v;
    throw UndefinedVariable("variable '" + std::string(n) +
                            "' is not defined in the preference specification");
  }

  std::optional<std::size_t> variable_index(std::string_view n) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == n) return i;
    return std::nullopt;
  }

  const PreferenceStatement* find_statement(std::string_view id) const {
    for (const auto& s : statements)
      if (s.id == id) return &s;
    return nullptr;
  }

  /// Number of outcomes, saturating at uint64 max.
  std::uint64_t outcome_count() const {
    std::uint64_t n = 1;
    for (const auto& v : variables) {
      if (v.domain.empty()) return 0;
      if (n > std::numeric_limits<std::uint64_t>::max() / v.domain.size())
        return std::numeric_limits<std::uint64_t>::max();
      n *= v.domain.size();
    }
    return n;
  }
};

enum class LanguageClass { CpNet, TcpNet, CpTheory };

inline std::string to_string(LanguageClass c) {
  switch (c) {
    case LanguageClass::CpNet: return "CP-net";
    case LanguageClass::TcpNet: return "TCP-net";
    case LanguageClass::CpTheory: return "CP-theory";
  }
  return "?";
}

/// CP-net when every statement has an empty less-important set, TCP-net when
/// the largest such set is a singleton, CP-theory otherwise.
inline LanguageClass classify_language(const PreferenceSpec& spec) {
  std::size_t max_omega = 0;
  for (const auto& s : spec.statements)
    max_omega = std::max(max_omega, s.less_important.size());
  if (max_omega == 0) return LanguageClass::CpNet;
  if (max_omega == 1) return LanguageClass::TcpNet;
  return LanguageClass::CpTheory;
}

struct Violation {
  std::string statement_id;  // empty for declaration-level problems
  std::string rule;
  std::string detail;
};

/// Structural checks; an empty result means every other operation accepts the spec.
inline std::vector<Violation> validate_spec(const PreferenceSpec& spec) {
  std::vector<Violation> out;
  auto add = [&out](std::string id, std::string rule, std::string detail) {
    out.push_back({std::move(id), std::move(rule), std::move(detail)});
  };

  std::set<std::string> var_names;
  for (const auto& v : spec.variables) {
    if (!is_valid_name(v.name))
      add("", "BadVariableName", "variable name '" + v.name + "' is not a valid identifier");
    if (!var_names.insert(v.name).second)
      add("", "DuplicateVariable", "variable '" + v.name + "' declared more than once");
    if (v.domain.size() < 2)
      add("", "DomainTooSmall", "variable '" + v.name + "' needs at least two domain values");
    std::set<std::string> vals;
    for (const auto& d : v.domain) {
      if (!is_valid_value(d))
        add("", "BadDomainValue",
            "domain value '" + d + "' of variable '" + v.name + "' is not a valid token");
      if (!vals.insert(d).second)
        add("", "DuplicateDomainValue",
            "variable '" + v.name + "' lists domain value '" + d + "' twice");
    }
  }

  std::set<std::string> ids;
  for (const auto& s : spec.statements) {
    if (s.id.empty()) add(s.id, "MissingStatementId", "statement without an id");
    if (!ids.insert(s.id).second)
      add(s.id, "DuplicateStatementId", "statement id '" + s.id + "' used more than once");

    const Variable* target = spec.find_variable(s.target);
    if (!target) {
      add(s.id, "UndeclaredVariable",
          "variable '" + s.target + "' is not defined in the preference specification");
    } else {
      if (!target->has_value(s.better))
        add(s.id, "UndefinedValue",
            "value '" + s.better + "' is not in the domain of '" + s.target + "'");
      if (!target->has_value(s.worse))
        add(s.id, "UndefinedValue",
            "value '" + s.worse + "' is not in the domain of '" + s.target + "'");
    }
    if (s.better == s.worse)
      add(s.id, "DegeneratePreference",
          "statement prefers value '" + s.better + "' over itself");

    for (const auto& [var, val] : s.condition) {
      const Variable* cv = spec.find_variable(var);
      if (!cv) {
        add(s.id, "UndeclaredVariable",
            "variable '" + var + "' is not defined in the preference specification");
        continue;
      }
      if (!cv->has_value(val))
        add(s.id, "UndefinedValue",
            "value '" + val + "' is not in the domain of '" + var + "'");
      if (var == s.target)
        add(s.id, "TargetInCondition", "condition constrains the target variable '" + var + "'");
      if (s.less_important.count(var))
        add(s.id, "ConditionOverlapsLessImportant",
            "variable '" + var + "' appears in both the condition and the less-important set");
    }
    for (const auto& var : s.less_important) {
      if (!spec.find_variable(var))
        add(s.id, "UndeclaredVariable",
            "variable '" + var + "' is not defined in the preference specification");
      if (var == s.target)
        add(s.id, "TargetInLessImportant",
            "target variable '" + var + "' appears in the less-important set");
    }
  }
  return out;
}

enum class QueryKind { Dominance, Consistency, Subsumption, Equivalence };

inline std::string to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Dominance: return "DOMINANCE";
    case QueryKind::Consistency: return "CONSISTENCY";
    case QueryKind::Subsumption: return "SUBSUMPTION";
    case QueryKind::Equivalence: return "EQUIVALENCE";
  }
  return "?";
}

inline std::optional<QueryKind> query_kind_from(std::string_view s) {
  if (s == "DOMINANCE") return QueryKind::Dominance;
  if (s == "CONSISTENCY") return QueryKind::Consistency;
  if (s == "SUBSUMPTION") return QueryKind::Subsumption;
  if (s == "EQUIVALENCE") return QueryKind::Equivalence;
  return std::nullopt;
}

struct Query {
  QueryKind kind = QueryKind::Consistency;
  Outcome better;  // dominance only
  Outcome worse;   // dominance only
  std::vector<std::string> spec_refs;  // one spec, or two ordered P1,P2
};

enum class EngineKind { Explicit, Symbolic };

inline std::string to_string(EngineKind e) {
  return e == EngineKind::Explicit ? "EXPLICIT" : "SYMBOLIC";
}

/// One improving flip: from the worse outcome to the better one, licensed by
/// the named statement.
struct Flip {
  Outcome from;
  Outcome to;
  std::string statement_id;

  bool operator==(const Flip&) const = default;
};

enum class ProofKind { DominancePath, InconsistencyCycle, NonSubsumptionFlip };

enum class FailedDirection { P1NotInP2, P2NotInP1 };

/// A replayable justification. Paths chain from the worse outcome to the
/// better one; cycles chain back to their first outcome; non-subsumption
/// proofs hold exactly one flip.
struct Proof {
  ProofKind kind = ProofKind::DominancePath;
  std::vector<Flip> steps;
  std::optional<FailedDirection> direction;  // equivalence/subsumption failures

  bool operator==(const Proof&) const = default;
};

inline std::string to_string(ProofKind k) {
  switch (k) {
    case ProofKind::DominancePath: return "DOMINANCE-PATH";
    case ProofKind::InconsistencyCycle: return "INCONSISTENCY-CYCLE";
    case ProofKind::NonSubsumptionFlip: return "NON-SUBSUMPTION-FLIP";
  }
  return "?";
}

inline std::string to_string(FailedDirection d) {
  return d == FailedDirection::P1NotInP2 ? "P1-NOT-IN-P2" : "P2-NOT-IN-P1";
}

struct QueryResult {
  bool answer = false;
  std::optional<Proof> proof;
  EngineKind engine = EngineKind::Symbolic;
  std::chrono::microseconds elapsed{0};
};

/// What an engine returns before timing and engine tagging are attached.
struct Answer {
  bool value = false;
  std::optional<Proof> proof;
};

/// "var=value" with surrounding whitespace tolerated.
inline std::pair<std::string, std::string> split_assignment(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos)
    throw MalformedAssignment("expected 'variable=value', got '" + std::string(text) + "'");
  std::string var(detail::trim(text.substr(0, eq)));
  std::string val(detail::trim(text.substr(eq + 1)));
  if (var.empty() || val.empty())
    throw MalformedAssignment("expected 'variable=value', got '" + std::string(text) + "'");
  return {var, val};
}

/// Validates one "var=value" against the declarations.
inline std::pair<std::string, std::string> parse_assignment(const PreferenceSpec& spec,
                                                            std::string_view text) {
  auto [var, val] = split_assignment(text);
  const Variable& v = spec.variable(var);
  if (!v.has_value(val))
    throw UndefinedValue("value '" + val + "' is not in the domain of variable '" + var + "'");
  return {var, val};
}

/// Comma-separated "var=value" pairs naming every declared variable exactly once.
inline Outcome parse_outcome(const PreferenceSpec& spec, std::string_view text) {
  Outcome o;
  std::string_view rest = text;
  while (!detail::trim(rest).empty()) {
    auto comma = rest.find(',');
    std::string_view item = comma == std::string_view::npos ? rest : rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    auto [var, val] = parse_assignment(spec, item);
    if (!o.values.emplace(var, val).second)
      throw Error("variable '" + var + "' assigned twice in outcome '" + std::string(text) + "'");
  }
  for (const auto& v : spec.variables)
    if (!o.values.count(v.name))
      throw IncompleteOutcome("outcome '" + std::string(text) + "' assigns no value to '" +
                              v.name + "'");
  return o;
}

/// Renders an outcome as "a=0,b=1,..." in variable declaration order.
inline std::string format_outcome(const PreferenceSpec& spec, const Outcome& o) {
  std::string s;
  for (const auto& v : spec.variables) {
    if (!s.empty()) s += ',';
    s += v.name;
    s += '=';
    s += o.value_of(v.name);
  }
  return s;
}

/// Lexicographic comparison by domain-value indices in declaration order.
inline int compare_outcomes(const PreferenceSpec& spec, const Outcome& a, const Outcome& b) {
  for (const auto& v : spec.variables) {
    std::size_t ia = v.value_index(a.value_of(v.name));
    std::size_t ib = v.value_index(b.value_of(v.name));
    if (ia != ib) return ia < ib ? -1 : 1;
  }
  return 0;
}

/// Both specs must declare the same variables with the same ordered domains;
/// declaration order may differ.
inline void check_same_universe(const PreferenceSpec& a, const PreferenceSpec& b) {
  if (a.variables.size() != b.variables.size())
    throw VariableMismatch("specifications declare different variable sets");
  for (const auto& v : a.variables) {
    const Variable* w = b.find_variable(v.name);
    if (!w || w->domain != v.domain)
      throw VariableMismatch("variable '" + v.name + "' differs between the two specifications");
  }
}

/// Rebuilds `b` over `a`'s variable declaration order so both share one
/// outcome encoding.
inline PreferenceSpec align_universe(const PreferenceSpec& a, const PreferenceSpec& b) {
  check_same_universe(a, b);
  PreferenceSpec aligned = b;
  aligned.variables = a.variables;
  return aligned;
}

inline constexpr std::uint64_t kDefaultNodeLimit = std::uint64_t{1} << 20;
inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

}  // namespace cpref
