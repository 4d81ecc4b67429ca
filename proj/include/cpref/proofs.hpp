#pragma once

#include <string>
#include <vector>

#include "cpref/explicit_engine.hpp"
#include "cpref/model.hpp"
#include "cpref/semantics.hpp"
#include "cpref/symbolic.hpp"

namespace cpref {

/// Proof shape does not fit the query kind.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline bool steps_chain(const std::vector<Flip>& steps) {
  for (std::size_t i = 0; i + 1 < steps.size(); ++i)
    if (steps[i].to != steps[i + 1].from) return false;
  return true;
}

inline bool step_licensed(const PreferenceSpec& spec, const Flip& step) {
  return is_improving_flip(spec, step.from, step.to).count(step.statement_id) > 0;
}

/// Dominance of `to` over `from` under `spec`, for refuting entailment;
/// prefers the explicit engine and falls back to the symbolic one when the
/// outcome space is too large to materialize.
inline bool entailed_by(const PreferenceSpec& spec, const Flip& step) {
  try {
    return dominates_explicit(spec, step.to, step.from).value;
  } catch (const TooLarge&) {
    return dominates_symbolic(spec, step.to, step.from).value;
  }
}

}  // namespace detail

/// Replays a dominance path or inconsistency cycle step by step through the
/// flip semantics. Throws ShapeMismatch when the proof kind cannot justify
/// the query; returns false when any step fails to replay.
inline bool verify_proof(const PreferenceSpec& spec, const Query& query, const Proof& proof) {
  if (query.kind == QueryKind::Dominance) {
    if (proof.kind != ProofKind::DominancePath)
      throw ShapeMismatch("dominance wants a path proof");
    if (proof.steps.empty() || !detail::steps_chain(proof.steps)) return false;
    if (proof.steps.front().from != query.worse || proof.steps.back().to != query.better)
      return false;
  } else if (query.kind == QueryKind::Consistency) {
    if (proof.kind != ProofKind::InconsistencyCycle)
      throw ShapeMismatch("inconsistency wants a cycle proof");
    if (proof.steps.empty() || !detail::steps_chain(proof.steps)) return false;
    if (proof.steps.back().to != proof.steps.front().from) return false;
  } else {
    throw ShapeMismatch("two specifications are needed to verify this query");
  }
  for (const auto& step : proof.steps)
    if (!detail::step_licensed(spec, step)) return false;
  return true;
}

/// Verifies a non-subsumption counter-flip: the step must be licensed by the
/// failing side and must not be entailed (as a dominance) by the other.
inline bool verify_proof(const PreferenceSpec& p1, const PreferenceSpec& p2, const Query& query,
                         const Proof& proof) {
  if (query.kind != QueryKind::Subsumption && query.kind != QueryKind::Equivalence)
    throw ShapeMismatch("single-specification query passed with two specifications");
  if (proof.kind != ProofKind::NonSubsumptionFlip)
    throw ShapeMismatch("subsumption failure wants a counter-flip proof");
  if (proof.steps.size() != 1) return false;
  if (query.kind == QueryKind::Equivalence && !proof.direction) return false;

  FailedDirection dir = proof.direction.value_or(FailedDirection::P1NotInP2);
  const PreferenceSpec& licensor = dir == FailedDirection::P1NotInP2 ? p1 : p2;
  const PreferenceSpec& entailer = dir == FailedDirection::P1NotInP2 ? p2 : p1;
  const Flip& step = proof.steps.front();
  if (!detail::step_licensed(licensor, step)) return false;
  return !detail::entailed_by(entailer, step);
}

/// Canonicalizes a verified proof: cycles are rotated to start at their
/// least outcome, and every step cites the least statement id that licenses
/// it. Idempotent, and never changes whether the proof verifies.
inline Proof normalize_proof(const PreferenceSpec& licensing_spec, Proof proof) {
  if (proof.kind == ProofKind::InconsistencyCycle && proof.steps.size() > 1) {
    std::size_t least = 0;
    for (std::size_t i = 1; i < proof.steps.size(); ++i)
      if (compare_outcomes(licensing_spec, proof.steps[i].from, proof.steps[least].from) < 0)
        least = i;
    std::rotate(proof.steps.begin(), proof.steps.begin() + static_cast<std::ptrdiff_t>(least),
                proof.steps.end());
  }
  for (auto& step : proof.steps) {
    auto ids = is_improving_flip(licensing_spec, step.from, step.to);
    if (!ids.empty()) step.statement_id = *ids.begin();
  }
  return proof;
}

/// Pair form: picks the licensing side from the proof's direction.
inline Proof normalize_proof(const PreferenceSpec& p1, const PreferenceSpec& p2, Proof proof) {
  const PreferenceSpec& licensor =
      proof.direction.value_or(FailedDirection::P1NotInP2) == FailedDirection::P1NotInP2 ? p1
                                                                                         : p2;
  return normalize_proof(licensor, std::move(proof));
}

}  // namespace cpref
