#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cpref/bdd.hpp"
#include "cpref/model.hpp"

namespace cpref {

/// A witness walk contradicted the engine's own fixpoint — an engine bug.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

/// Bit-level encoding of a specification's outcome space and flip relation.
///
/// Every preference variable gets a block of ceil(log2 |D|) boolean variables,
/// most significant bit first. Each block exists on three rails, interleaved
/// per bit: slot s maps to manager variable 3s (current state), 3s+1 (next
/// state) and 3s+2 (an auxiliary rail used only while squaring relations).
/// Domains that are not a power of two leave unused bit patterns; the valid
/// predicates exclude exactly those.
class SymbolicModel {
 public:
  using Ref = BddManager::Ref;
  using StateSet = Ref;  // BDD over current-rail bits, within valid_current()

  explicit SymbolicModel(const PreferenceSpec& spec,
                         std::size_t node_budget = kDefaultNodeBudget)
      : spec_(spec), mgr_(node_budget) {
    std::size_t offset = 0;
    for (const auto& v : spec_.variables) {
      int bits = 1;
      while ((std::size_t{1} << bits) < v.domain.size()) ++bits;
      blocks_.push_back({offset, bits});
      offset += static_cast<std::size_t>(bits);
    }
    total_bits_ = offset;

    std::vector<int> cur, nxt;
    std::vector<std::pair<int, int>> to_next, next_to_cur, up, aux_to_next;
    for (std::size_t s = 0; s < total_bits_; ++s) {
      int c = static_cast<int>(3 * s), n = c + 1, a = c + 2;
      cur.push_back(c);
      nxt.push_back(n);
      to_next.emplace_back(c, n);
      next_to_cur.emplace_back(n, c);
      up.emplace_back(c, n);
      up.emplace_back(n, a);
      aux_to_next.emplace_back(a, n);
    }
    std::vector<int> pair_vars = cur;
    pair_vars.insert(pair_vars.end(), nxt.begin(), nxt.end());
    cur_set_ = mgr_.register_var_set(cur);
    next_set_ = mgr_.register_var_set(nxt);
    pair_set_ = mgr_.register_var_set(pair_vars);
    cur_to_next_ = mgr_.register_var_map(to_next);
    next_to_cur_ = mgr_.register_var_map(next_to_cur);
    up_ = mgr_.register_var_map(up);
    aux_to_next_ = mgr_.register_var_map(aux_to_next);

    valid_cur_ = valid_predicate(kCurrent);
    valid_next_ = valid_predicate(kNext);

    trans_ = BddManager::kFalse;
    for (const auto& p : spec_.statements) {
      Ref rel = statement_relation(p);
      stmt_rels_.emplace_back(p.id, rel);
      trans_ = mgr_.bdd_or(trans_, rel);
    }
  }

  const PreferenceSpec& spec() const { return spec_; }
  BddManager& manager() { return mgr_; }
  std::size_t total_bits() const { return total_bits_; }

  Ref valid_current() const { return valid_cur_; }
  Ref valid_next() const { return valid_next_; }

  /// The flip relation T over (current, next); the union of the per-statement
  /// relations, each already confined to valid encodings.
  Ref transition() const { return trans_; }

  /// (statement id, T_p) in declaration order.
  const std::vector<std::pair<std::string, Ref>>& statement_relations() const {
    return stmt_rels_;
  }

  /// The flip relation another statement set induces over this model's
  /// variables. The other spec must declare the same universe.
  Ref relation_for(const PreferenceSpec& other) {
    check_same_universe(spec_, other);
    Ref t = BddManager::kFalse;
    for (const auto& p : other.statements) t = mgr_.bdd_or(t, statement_relation(p));
    return t;
  }

  StateSet outcome_bdd(const Outcome& o) {
    Ref f = BddManager::kTrue;
    for (std::size_t i = 0; i < spec_.variables.size(); ++i) {
      const Variable& v = spec_.variables[i];
      f = mgr_.bdd_and(f, value_bdd(i, v.value_index(o.value_of(v.name)), kCurrent));
    }
    return f;
  }

  /// Least outcome in a nonempty state set (by domain-index tuple in
  /// declaration order; the MSB-first encoding makes the bitwise minimum
  /// coincide with that order).
  Outcome decode_min(StateSet states) {
    auto bits = mgr_.min_assignment(mgr_.bdd_and(states, valid_cur_), cur_set_);
    if (!bits) throw InternalInconsistency("decode of an empty state set");
    Outcome o;
    for (std::size_t i = 0; i < spec_.variables.size(); ++i) {
      const auto& [offset, width] = blocks_[i];
      std::size_t value = 0;
      for (int j = 0; j < width; ++j)
        value = (value << 1) | ((*bits)[offset + static_cast<std::size_t>(j)] ? 1u : 0u);
      o.values[spec_.variables[i].name] = spec_.variables[i].domain[value];
    }
    return o;
  }

  StateSet post_image(StateSet states) { return post_image(states, trans_); }
  StateSet post_image(StateSet states, Ref relation) {
    Ref img = mgr_.and_exists(states, relation, cur_set_);
    return mgr_.bdd_and(mgr_.rename(img, next_to_cur_), valid_cur_);
  }

  StateSet pre_image(StateSet states) { return pre_image(states, trans_); }
  StateSet pre_image(StateSet states, Ref relation) {
    Ref next = mgr_.rename(mgr_.bdd_and(states, valid_cur_), cur_to_next_);
    return mgr_.bdd_and(mgr_.and_exists(relation, next, next_set_), valid_cur_);
  }

  /// States reachable from `from` through at least one flip.
  StateSet forward_reachable(StateSet from) {
    Ref reach = BddManager::kFalse;
    Ref frontier = post_image(from);
    while (frontier != BddManager::kFalse) {
      reach = mgr_.bdd_or(reach, frontier);
      frontier = mgr_.bdd_diff(post_image(frontier), reach);
    }
    return reach;
  }

  /// States that reach `to` through at least one flip.
  StateSet backward_reachable(StateSet to) {
    Ref reach = BddManager::kFalse;
    Ref frontier = pre_image(to);
    while (frontier != BddManager::kFalse) {
      reach = mgr_.bdd_or(reach, frontier);
      frontier = mgr_.bdd_diff(pre_image(frontier), reach);
    }
    return reach;
  }

  /// Breadth-first layers from `from`: layer k holds the states first reached
  /// after exactly k+1 flips. Stops early once `target` is hit (the last
  /// stored layer then intersects it); exhausts the reachable set otherwise.
  std::vector<StateSet> forward_layers(StateSet from, StateSet target) {
    std::vector<StateSet> layers;
    Ref reach = BddManager::kFalse;
    Ref frontier = post_image(from);
    while (frontier != BddManager::kFalse) {
      layers.push_back(frontier);
      if (mgr_.bdd_and(frontier, target) != BddManager::kFalse) return layers;
      reach = mgr_.bdd_or(reach, frontier);
      frontier = mgr_.bdd_diff(post_image(frontier), reach);
    }
    return layers;
  }

  /// Transitive closure of a flip relation by iterative squaring.
  Ref transitive_closure(Ref relation) {
    Ref tc = relation;
    for (;;) {
      Ref shifted = mgr_.rename(tc, up_);                      // R(y, z)
      Ref squared = mgr_.and_exists(tc, shifted, next_set_);   // exists y: R(x,y) & R(y,z)
      squared = mgr_.rename(squared, aux_to_next_);
      Ref merged = mgr_.bdd_or(tc, squared);
      if (merged == tc) return tc;
      tc = merged;
    }
  }

  /// Decodes the least (from, to) pair of a nonempty relation.
  std::pair<Outcome, Outcome> decode_min_pair(Ref relation) {
    auto bits = mgr_.min_assignment(relation, pair_set_);
    if (!bits) throw InternalInconsistency("decode of an empty relation");
    // pair_set_ is sorted by manager variable, so current/next bits of slot s
    // sit at positions 2s and 2s+1
    Outcome from, to;
    for (std::size_t i = 0; i < spec_.variables.size(); ++i) {
      const auto& [offset, width] = blocks_[i];
      std::size_t fv = 0, tv = 0;
      for (int j = 0; j < width; ++j) {
        std::size_t slot = offset + static_cast<std::size_t>(j);
        fv = (fv << 1) | ((*bits)[2 * slot] ? 1u : 0u);
        tv = (tv << 1) | ((*bits)[2 * slot + 1] ? 1u : 0u);
      }
      from.values[spec_.variables[i].name] = spec_.variables[i].domain[fv];
      to.values[spec_.variables[i].name] = spec_.variables[i].domain[tv];
    }
    return {from, to};
  }

  /// First statement (declaration order) whose relation contains the pair.
  std::string licensing_statement(const Outcome& from, const Outcome& to) {
    Ref pair = mgr_.bdd_and(outcome_bdd(from), mgr_.rename(outcome_bdd(to), cur_to_next_));
    for (const auto& [id, rel] : stmt_rels_)
      if (mgr_.bdd_and(pair, rel) != BddManager::kFalse) return id;
    throw InternalInconsistency("no statement licenses the extracted flip");
  }

  std::uint64_t count_states(StateSet states) {
    return mgr_.count_assignments(mgr_.bdd_and(states, valid_cur_), cur_set_);
  }

  std::uint64_t count_pairs(Ref relation) {
    return mgr_.count_assignments(relation, pair_set_);
  }

 private:
  enum Rail { kCurrent = 0, kNext = 1 };

  struct Block {
    std::size_t offset;
    int width;
  };

  int rail_var(std::size_t slot, Rail rail) const {
    return static_cast<int>(3 * slot) + static_cast<int>(rail);
  }

  Ref value_bdd(std::size_t block, std::size_t value, Rail rail) {
    const auto& [offset, width] = blocks_[block];
    Ref f = BddManager::kTrue;
    for (int j = 0; j < width; ++j) {
      bool bit = (value >> (width - 1 - j)) & 1u;
      f = mgr_.bdd_and(f, mgr_.literal(rail_var(offset + static_cast<std::size_t>(j), rail), bit));
    }
    return f;
  }

  Ref block_unchanged(std::size_t block) {
    const auto& [offset, width] = blocks_[block];
    Ref f = BddManager::kTrue;
    for (int j = 0; j < width; ++j) {
      std::size_t slot = offset + static_cast<std::size_t>(j);
      f = mgr_.bdd_and(f, mgr_.bdd_xnor(mgr_.var(rail_var(slot, kCurrent)),
                                        mgr_.var(rail_var(slot, kNext))));
    }
    return f;
  }

  Ref valid_predicate(Rail rail) {
    Ref f = BddManager::kTrue;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      std::size_t size = spec_.variables[i].domain.size();
      if (size == (std::size_t{1} << blocks_[i].width)) continue;  // every pattern used
      Ref any = BddManager::kFalse;
      for (std::size_t v = 0; v < size; ++v) any = mgr_.bdd_or(any, value_bdd(i, v, rail));
      f = mgr_.bdd_and(f, any);
    }
    return f;
  }

  /// Bit-level transcription of one statement's flip rule: target moves from
  /// worse to better, condition holds on both sides, everything outside
  /// target/condition/less-important is frozen, less-important blocks range
  /// freely over their valid encodings.
  Ref statement_relation(const PreferenceStatement& p) {
    std::size_t target = *spec_.variable_index(p.target);
    const Variable& tv = spec_.variables[target];
    Ref t = mgr_.bdd_and(value_bdd(target, tv.value_index(p.worse), kCurrent),
                         value_bdd(target, tv.value_index(p.better), kNext));
    for (const auto& [var, val] : p.condition) {
      std::size_t i = *spec_.variable_index(var);
      std::size_t vi = spec_.variables[i].value_index(val);
      t = mgr_.bdd_and(t, mgr_.bdd_and(value_bdd(i, vi, kCurrent), value_bdd(i, vi, kNext)));
    }
    for (std::size_t i = 0; i < spec_.variables.size(); ++i) {
      const std::string& name = spec_.variables[i].name;
      if (name == p.target || p.condition.count(name) || p.less_important.count(name)) continue;
      t = mgr_.bdd_and(t, block_unchanged(i));
    }
    return mgr_.bdd_and(t, mgr_.bdd_and(valid_cur_, valid_next_));
  }

  PreferenceSpec spec_;
  BddManager mgr_;
  std::vector<Block> blocks_;
  std::size_t total_bits_ = 0;
  BddManager::VarSetId cur_set_ = 0, next_set_ = 0, pair_set_ = 0;
  BddManager::VarMapId cur_to_next_ = 0, next_to_cur_ = 0, up_ = 0, aux_to_next_ = 0;
  Ref valid_cur_ = BddManager::kFalse;
  Ref valid_next_ = BddManager::kFalse;
  Ref trans_ = BddManager::kFalse;
  std::vector<std::pair<std::string, Ref>> stmt_rels_;
};

/// Walks the stored breadth-first layers backward from `better`, picking one
/// concrete predecessor per layer. The result replays under the flip
/// semantics and has the layer count as its length.
inline std::vector<Flip> extract_witness(SymbolicModel& model, const Outcome& worse,
                                         const Outcome& better,
                                         const std::vector<SymbolicModel::Ref>& layers) {
  if (layers.empty()) throw InternalInconsistency("witness requested without layers");
  std::vector<Flip> steps;
  Outcome at = better;
  for (std::size_t k = layers.size(); k-- > 1;) {
    SymbolicModel::Ref preds =
        model.manager().bdd_and(layers[k - 1], model.pre_image(model.outcome_bdd(at)));
    if (preds == BddManager::kFalse)
      throw InternalInconsistency("frontier walk found no predecessor");
    Outcome prev = model.decode_min(preds);
    steps.push_back({prev, at, model.licensing_statement(prev, at)});
    at = prev;
  }
  steps.push_back({worse, at, model.licensing_statement(worse, at)});
  std::reverse(steps.begin(), steps.end());
  return steps;
}

/// Dominance through forward reachability with early exit; the witness is a
/// shortest improving-flip sequence recovered from the frontier layers.
inline Answer dominates_symbolic(SymbolicModel& model, const Outcome& better,
                                 const Outcome& worse) {
  if (better == worse) return {false, std::nullopt};
  SymbolicModel::Ref alpha = model.outcome_bdd(better);
  SymbolicModel::Ref beta = model.outcome_bdd(worse);
  auto layers = model.forward_layers(beta, alpha);
  if (layers.empty() ||
      model.manager().bdd_and(layers.back(), alpha) == BddManager::kFalse)
    return {false, std::nullopt};
  Proof proof;
  proof.kind = ProofKind::DominancePath;
  proof.steps = extract_witness(model, worse, better, layers);
  return {true, proof};
}

inline Answer dominates_symbolic(const PreferenceSpec& spec, const Outcome& better,
                                 const Outcome& worse,
                                 std::size_t node_budget = kDefaultNodeBudget) {
  SymbolicModel model(spec, node_budget);
  return dominates_symbolic(model, better, worse);
}

/// States on some infinite flip path: the greatest fixpoint of the
/// pre-image. Nonempty exactly when the induced preference graph has a cycle,
/// since the flip relation is self-loop-free over a finite space.
inline SymbolicModel::Ref infinite_path_states(SymbolicModel& model) {
  SymbolicModel::Ref z = model.valid_current();
  for (;;) {
    SymbolicModel::Ref next = model.pre_image(z);
    if (next == z) return z;
    z = next;
  }
}

/// A concrete cycle from the infinite-path fixpoint: walk least successors
/// inside the fixpoint until an outcome repeats.
inline std::vector<Flip> extract_cycle(SymbolicModel& model) {
  SymbolicModel::Ref core = infinite_path_states(model);
  if (core == BddManager::kFalse)
    throw InternalInconsistency("cycle requested from a consistent model");
  std::vector<Outcome> walk{model.decode_min(core)};
  std::map<Outcome, std::size_t> seen{{walk[0], 0}};
  for (;;) {
    SymbolicModel::Ref succ =
        model.manager().bdd_and(model.post_image(model.outcome_bdd(walk.back())), core);
    Outcome next = model.decode_min(succ);
    auto [it, inserted] = seen.emplace(next, walk.size());
    if (!inserted) {
      std::vector<Flip> cycle;
      for (std::size_t i = it->second; i + 1 < walk.size(); ++i)
        cycle.push_back({walk[i], walk[i + 1], model.licensing_statement(walk[i], walk[i + 1])});
      cycle.push_back({walk.back(), next, model.licensing_statement(walk.back(), next)});
      return cycle;
    }
    walk.push_back(next);
  }
}

inline Answer consistent_symbolic(SymbolicModel& model) {
  if (infinite_path_states(model) == BddManager::kFalse) return {true, std::nullopt};
  Proof proof;
  proof.kind = ProofKind::InconsistencyCycle;
  proof.steps = extract_cycle(model);
  return {false, proof};
}

inline Answer consistent_symbolic(const PreferenceSpec& spec,
                                  std::size_t node_budget = kDefaultNodeBudget) {
  SymbolicModel model(spec, node_budget);
  return consistent_symbolic(model);
}

/// Subsumption: P1's flip relation must be contained in the transitive
/// closure of P2's. A pair outside the closure decodes to the counter-flip.
inline Answer subsumes_symbolic(SymbolicModel& model_p1, const PreferenceSpec& p2) {
  SymbolicModel::Ref t2 = model_p1.relation_for(p2);
  SymbolicModel::Ref closure = model_p1.transitive_closure(t2);
  SymbolicModel::Ref violation = model_p1.manager().bdd_diff(model_p1.transition(), closure);
  if (violation == BddManager::kFalse) return {true, std::nullopt};
  auto [from, to] = model_p1.decode_min_pair(violation);
  Proof proof;
  proof.kind = ProofKind::NonSubsumptionFlip;
  proof.steps.push_back({from, to, model_p1.licensing_statement(from, to)});
  return {false, proof};
}

inline Answer subsumes_symbolic(const PreferenceSpec& p1, const PreferenceSpec& p2,
                                std::size_t node_budget = kDefaultNodeBudget) {
  SymbolicModel model(p1, node_budget);
  return subsumes_symbolic(model, p2);
}

inline Answer equivalent_symbolic(const PreferenceSpec& p1, const PreferenceSpec& p2,
                                  std::size_t node_budget = kDefaultNodeBudget) {
  Answer forward = subsumes_symbolic(p1, p2, node_budget);
  if (!forward.value) {
    forward.proof->direction = FailedDirection::P1NotInP2;
    return forward;
  }
  Answer backward = subsumes_symbolic(p2, p1, node_budget);
  if (!backward.value) {
    backward.proof->direction = FailedDirection::P2NotInP1;
    return backward;
  }
  return {true, std::nullopt};
}

}  // namespace cpref
