#pragma once

#include <set>
#include <string>
#include <vector>

#include "cpref/model.hpp"

namespace cpref {

/// Throws OutcomeMismatch unless the outcome assigns exactly the declared
/// variables to values of their domains.
inline void check_outcome(const PreferenceSpec& spec, const Outcome& o) {
  if (o.values.size() != spec.variables.size())
    throw OutcomeMismatch("outcome assigns " + std::to_string(o.values.size()) +
                          " variables, specification declares " +
                          std::to_string(spec.variables.size()));
  for (const auto& v : spec.variables) {
    const std::string& val = o.value_of(v.name);  // throws when missing
    if (!v.has_value(val))
      throw OutcomeMismatch("value '" + val + "' is not in the domain of variable '" + v.name +
                            "'");
  }
}

namespace detail {

/// The shared core of the two flip definitions. With an empty less-important
/// set this is exactly the intra-variable ceteris paribus rule; otherwise the
/// less-important variables are left unconstrained.
inline bool licenses_flip(const PreferenceSpec& spec, const PreferenceStatement& p,
                          const Outcome& from, const Outcome& to) {
  if (to.value_of(p.target) != p.better || from.value_of(p.target) != p.worse) return false;
  for (const auto& [var, val] : p.condition)
    if (from.value_of(var) != val || to.value_of(var) != val) return false;
  for (const auto& v : spec.variables) {
    if (v.name == p.target || p.condition.count(v.name) || p.less_important.count(v.name))
      continue;
    if (from.value_of(v.name) != to.value_of(v.name)) return false;
  }
  return true;
}

}  // namespace detail

/// Ids of every statement licensing an improving flip from `from` to `to`.
inline std::set<std::string> is_improving_flip(const PreferenceSpec& spec, const Outcome& from,
                                               const Outcome& to) {
  check_outcome(spec, from);
  check_outcome(spec, to);
  std::set<std::string> ids;
  if (from == to) return ids;
  for (const auto& p : spec.statements)
    if (detail::licenses_flip(spec, p, from, to)) ids.insert(p.id);
  return ids;
}

/// All improving flips leaving `from`: the out-edges of the induced preference
/// graph at that outcome. For a statement with a nonempty less-important set
/// there is one flip per assignment of those variables, their current values
/// included. Sorted by (to, statement id) for determinism.
inline std::vector<Flip> improving_successors(const PreferenceSpec& spec, const Outcome& from) {
  check_outcome(spec, from);
  std::vector<Flip> flips;
  for (const auto& p : spec.statements) {
    if (from.value_of(p.target) != p.worse) continue;
    bool applicable = true;
    for (const auto& [var, val] : p.condition)
      if (from.value_of(var) != val) {
        applicable = false;
        break;
      }
    if (!applicable) continue;

    Outcome base = from;
    base.values[p.target] = p.better;
    if (p.less_important.empty()) {
      flips.push_back({from, base, p.id});
      continue;
    }
    // Enumerate all assignments of the less-important variables.
    std::vector<const Variable*> omega;
    for (const auto& name : p.less_important) omega.push_back(&spec.variable(name));
    std::vector<std::size_t> idx(omega.size(), 0);
    for (;;) {
      Outcome to = base;
      for (std::size_t i = 0; i < omega.size(); ++i)
        to.values[omega[i]->name] = omega[i]->domain[idx[i]];
      flips.push_back({from, to, p.id});
      std::size_t i = 0;
      while (i < omega.size() && ++idx[i] == omega[i]->domain.size()) idx[i++] = 0;
      if (i == omega.size()) break;
    }
  }
  std::sort(flips.begin(), flips.end(), [](const Flip& a, const Flip& b) {
    if (a.to != b.to) return a.to < b.to;
    return a.statement_id < b.statement_id;
  });
  return flips;
}

}  // namespace cpref
