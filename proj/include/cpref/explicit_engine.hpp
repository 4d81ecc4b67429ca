#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "cpref/model.hpp"
#include "cpref/semantics.hpp"

namespace cpref {

/// The outcome space exceeds the configured node limit.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Mixed-radix codec between outcomes and dense indices. The first declared
/// variable is the most significant digit, so index order coincides with
/// lexicographic order over domain-value index tuples.
class OutcomeSpace {
 public:
  explicit OutcomeSpace(const PreferenceSpec& spec) : spec_(&spec) {
    radix_.reserve(spec.variables.size());
    for (const auto& v : spec.variables) radix_.push_back(v.domain.size());
    stride_.assign(radix_.size(), 1);
    for (std::size_t i = radix_.size(); i-- > 1;)
      stride_[i - 1] = stride_[i] * radix_[i];
    size_ = radix_.empty() ? 1 : stride_[0] * radix_[0];
  }

  std::uint64_t size() const { return size_; }
  std::size_t variable_count() const { return radix_.size(); }
  const PreferenceSpec& spec() const { return *spec_; }

  std::size_t value_at(std::uint64_t index, std::size_t var) const {
    return static_cast<std::size_t>(index / stride_[var] % radix_[var]);
  }

  std::uint64_t with_value(std::uint64_t index, std::size_t var, std::size_t value) const {
    return index + (value - value_at(index, var)) * stride_[var];
  }

  std::uint64_t index_of(const Outcome& o) const {
    check_outcome(*spec_, o);
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < radix_.size(); ++i) {
      const Variable& v = spec_->variables[i];
      index += v.value_index(o.value_of(v.name)) * stride_[i];
    }
    return index;
  }

  Outcome outcome_at(std::uint64_t index) const {
    Outcome o;
    for (std::size_t i = 0; i < radix_.size(); ++i) {
      const Variable& v = spec_->variables[i];
      o.values[v.name] = v.domain[value_at(index, i)];
    }
    return o;
  }

 private:
  const PreferenceSpec* spec_;
  std::vector<std::size_t> radix_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t size_ = 1;
};

namespace detail {

/// Statement with all names resolved to indices, for tight enumeration loops.
struct CompiledStatement {
  std::size_t target;
  std::size_t better;
  std::size_t worse;
  std::vector<std::pair<std::size_t, std::size_t>> condition;  // (var, value)
  std::vector<std::size_t> omega;
};

inline std::vector<CompiledStatement> compile_statements(const PreferenceSpec& spec) {
  std::vector<CompiledStatement> out;
  out.reserve(spec.statements.size());
  for (const auto& s : spec.statements) {
    CompiledStatement c;
    c.target = *spec.variable_index(s.target);
    const Variable& tv = spec.variables[c.target];
    c.better = tv.value_index(s.better);
    c.worse = tv.value_index(s.worse);
    for (const auto& [var, val] : s.condition) {
      std::size_t vi = *spec.variable_index(var);
      c.condition.emplace_back(vi, spec.variables[vi].value_index(val));
    }
    for (const auto& var : s.less_important) c.omega.push_back(*spec.variable_index(var));
    std::sort(c.omega.begin(), c.omega.end());
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

struct IpgEdge {
  std::uint64_t to;
  std::uint32_t statement;  // index into spec.statements
};

/// The full induced preference graph: every outcome as a node, every
/// improving flip as an edge annotated with its licensing statement.
class InducedPreferenceGraph {
 public:
  InducedPreferenceGraph(PreferenceSpec spec, std::uint64_t node_limit)
      : spec_(std::move(spec)), space_(spec_) {
    if (space_.size() > node_limit)
      throw TooLarge("outcome space has " + std::to_string(space_.size()) +
                     " nodes, limit is " + std::to_string(node_limit));
    auto compiled = detail::compile_statements(spec_);
    out_.resize(static_cast<std::size_t>(space_.size()));
    for (std::uint64_t from = 0; from < space_.size(); ++from) {
      for (std::uint32_t si = 0; si < compiled.size(); ++si) {
        const auto& c = compiled[si];
        if (space_.value_at(from, c.target) != c.worse) continue;
        bool applicable = true;
        for (const auto& [var, val] : c.condition)
          if (space_.value_at(from, var) != val) {
            applicable = false;
            break;
          }
        if (!applicable) continue;
        std::uint64_t base = space_.with_value(from, c.target, c.better);
        enumerate_omega(base, c.omega, 0, [&](std::uint64_t to) {
          out_[from].push_back({to, si});
          ++edge_count_;
        });
      }
      auto& edges = out_[from];
      std::sort(edges.begin(), edges.end(), [](const IpgEdge& a, const IpgEdge& b) {
        return a.to != b.to ? a.to < b.to : a.statement < b.statement;
      });
    }
  }

  const PreferenceSpec& spec() const { return spec_; }
  const OutcomeSpace& space() const { return space_; }
  std::uint64_t node_count() const { return space_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<IpgEdge>& edges_from(std::uint64_t node) const {
    return out_[static_cast<std::size_t>(node)];
  }

 private:
  template <typename Fn>
  void enumerate_omega(std::uint64_t base, const std::vector<std::size_t>& omega, std::size_t i,
                       const Fn& fn) const {
    if (i == omega.size()) {
      fn(base);
      return;
    }
    std::size_t var = omega[i];
    for (std::size_t v = 0; v < spec_.variables[var].domain.size(); ++v)
      enumerate_omega(space_.with_value(base, var, v), omega, i + 1, fn);
  }

  PreferenceSpec spec_;
  OutcomeSpace space_;
  std::vector<std::vector<IpgEdge>> out_;
  std::size_t edge_count_ = 0;
};

inline InducedPreferenceGraph build_ipg(const PreferenceSpec& spec,
                                        std::uint64_t node_limit = kDefaultNodeLimit) {
  return InducedPreferenceGraph(spec, node_limit);
}

/// Edge list with statement ids, one flip per line, for debugging.
inline void dump_ipg(const InducedPreferenceGraph& g, std::ostream& os) {
  for (std::uint64_t from = 0; from < g.node_count(); ++from)
    for (const IpgEdge& e : g.edges_from(from))
      os << format_outcome(g.spec(), g.space().outcome_at(from)) << " -> "
         << format_outcome(g.spec(), g.space().outcome_at(e.to)) << " ["
         << g.spec().statements[e.statement].id << "]\n";
}

namespace detail {

inline Proof path_proof(const InducedPreferenceGraph& g,
                        const std::vector<std::pair<std::uint64_t, std::uint32_t>>& hops,
                        std::uint64_t start, ProofKind kind) {
  Proof proof;
  proof.kind = kind;
  std::uint64_t at = start;
  for (const auto& [to, stmt] : hops) {
    proof.steps.push_back({g.space().outcome_at(at), g.space().outcome_at(to),
                           g.spec().statements[stmt].id});
    at = to;
  }
  return proof;
}

/// Shortest path from `from` to `to` through at least one edge; BFS with
/// deterministic parent choice (adjacency is sorted).
inline std::optional<std::vector<std::pair<std::uint64_t, std::uint32_t>>> shortest_path(
    const InducedPreferenceGraph& g, std::uint64_t from, std::uint64_t to) {
  const std::uint64_t n = g.node_count();
  std::vector<std::int64_t> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::uint32_t> via(static_cast<std::size_t>(n), 0);
  std::deque<std::uint64_t> queue{from};
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  seen[static_cast<std::size_t>(from)] = true;
  bool found = false;
  while (!queue.empty() && !found) {
    std::uint64_t at = queue.front();
    queue.pop_front();
    for (const IpgEdge& e : g.edges_from(at)) {
      if (seen[static_cast<std::size_t>(e.to)]) continue;
      seen[static_cast<std::size_t>(e.to)] = true;
      parent[static_cast<std::size_t>(e.to)] = static_cast<std::int64_t>(at);
      via[static_cast<std::size_t>(e.to)] = e.statement;
      if (e.to == to) {
        found = true;
        break;
      }
      queue.push_back(e.to);
    }
  }
  if (!found) return std::nullopt;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> hops;
  for (std::uint64_t at = to; at != from;
       at = static_cast<std::uint64_t>(parent[static_cast<std::size_t>(at)]))
    hops.emplace_back(at, via[static_cast<std::size_t>(at)]);
  std::reverse(hops.begin(), hops.end());
  return hops;
}

}  // namespace detail

/// Dominance on a prebuilt graph: is `better` reachable from `worse` through
/// at least one improving flip? The witness is a shortest flip sequence.
inline Answer dominates_explicit(const InducedPreferenceGraph& g, const Outcome& better,
                                 const Outcome& worse) {
  std::uint64_t alpha = g.space().index_of(better);
  std::uint64_t beta = g.space().index_of(worse);
  if (alpha == beta) return {false, std::nullopt};
  auto hops = detail::shortest_path(g, beta, alpha);
  if (!hops) return {false, std::nullopt};
  return {true, detail::path_proof(g, *hops, beta, ProofKind::DominancePath)};
}

inline Answer dominates_explicit(const PreferenceSpec& spec, const Outcome& better,
                                 const Outcome& worse,
                                 std::uint64_t node_limit = kDefaultNodeLimit) {
  return dominates_explicit(build_ipg(spec, node_limit), better, worse);
}

namespace detail {

/// Iterative Tarjan; returns the component id per node, ids in reverse
/// topological order of discovery.
inline std::vector<std::int64_t> scc_ids(const InducedPreferenceGraph& g, std::size_t& count) {
  const std::size_t n = static_cast<std::size_t>(g.node_count());
  std::vector<std::int64_t> id(n, -1);
  std::vector<std::int64_t> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint64_t> stack;
  struct Frame {
    std::uint64_t node;
    std::size_t next_edge;
  };
  std::vector<Frame> call;
  std::int64_t counter = 0;
  count = 0;

  for (std::uint64_t root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& f = call.back();
      std::size_t at = static_cast<std::size_t>(f.node);
      if (f.next_edge == 0) {
        index[at] = lowlink[at] = counter++;
        stack.push_back(f.node);
        on_stack[at] = true;
      }
      bool descended = false;
      const auto& edges = g.edges_from(f.node);
      while (f.next_edge < edges.size()) {
        std::size_t to = static_cast<std::size_t>(edges[f.next_edge].to);
        ++f.next_edge;
        if (index[to] == -1) {
          call.push_back({edges[f.next_edge - 1].to, 0});
          descended = true;
          break;
        }
        if (on_stack[to]) lowlink[at] = std::min(lowlink[at], index[to]);
      }
      if (descended) continue;
      if (lowlink[at] == index[at]) {
        for (;;) {
          std::uint64_t w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = false;
          id[static_cast<std::size_t>(w)] = static_cast<std::int64_t>(count);
          if (w == f.node) break;
        }
        ++count;
      }
      call.pop_back();
      if (!call.empty()) {
        std::size_t parent = static_cast<std::size_t>(call.back().node);
        lowlink[parent] = std::min(lowlink[parent], lowlink[at]);
      }
    }
  }
  return id;
}

}  // namespace detail

/// Consistency on a prebuilt graph: true iff the graph is acyclic. When it is
/// not, the witness is a shortest cycle through the least node of the least
/// nontrivial strongly connected component.
inline Answer consistent_explicit(const InducedPreferenceGraph& g) {
  std::size_t count = 0;
  auto id = detail::scc_ids(g, count);
  std::vector<std::uint64_t> size(count, 0);
  for (auto c : id) ++size[static_cast<std::size_t>(c)];

  std::int64_t cyclic = -1;  // component of the least node in a nontrivial SCC
  std::uint64_t start = 0;
  for (std::uint64_t v = 0; v < g.node_count(); ++v)
    if (size[static_cast<std::size_t>(id[static_cast<std::size_t>(v)])] > 1) {
      cyclic = id[static_cast<std::size_t>(v)];
      start = v;
      break;
    }
  if (cyclic < 0) return {true, std::nullopt};

  // BFS within the component from `start`, then close the cycle with the
  // cheapest edge back into `start`.
  const std::size_t n = static_cast<std::size_t>(g.node_count());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint32_t> via(n, 0);
  std::vector<std::int64_t> dist(n, -1);
  dist[static_cast<std::size_t>(start)] = 0;
  std::deque<std::uint64_t> queue{start};
  while (!queue.empty()) {
    std::uint64_t at = queue.front();
    queue.pop_front();
    for (const IpgEdge& e : g.edges_from(at)) {
      std::size_t to = static_cast<std::size_t>(e.to);
      if (id[to] != cyclic || dist[to] >= 0) continue;
      dist[to] = dist[static_cast<std::size_t>(at)] + 1;
      parent[to] = static_cast<std::int64_t>(at);
      via[to] = e.statement;
      queue.push_back(e.to);
    }
  }
  std::int64_t best_dist = -1;
  std::uint64_t best_from = 0;
  std::uint32_t best_stmt = 0;
  for (std::uint64_t at = 0; at < g.node_count(); ++at) {
    std::size_t ai = static_cast<std::size_t>(at);
    if (id[ai] != cyclic || (dist[ai] < 0 && at != start)) continue;
    for (const IpgEdge& e : g.edges_from(at))
      if (e.to == start) {
        std::int64_t d = at == start ? 0 : dist[ai];
        if (best_dist < 0 || d < best_dist) {
          best_dist = d;
          best_from = at;
          best_stmt = e.statement;
        }
      }
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> hops;
  hops.emplace_back(start, best_stmt);  // closing edge, filled below
  for (std::uint64_t at = best_from; at != start;
       at = static_cast<std::uint64_t>(parent[static_cast<std::size_t>(at)]))
    hops.emplace_back(at, via[static_cast<std::size_t>(at)]);
  std::reverse(hops.begin(), hops.end());
  // hops now walks start -> ... -> best_from -> start
  Proof proof = detail::path_proof(g, hops, start, ProofKind::InconsistencyCycle);
  return {false, proof};
}

inline Answer consistent_explicit(const PreferenceSpec& spec,
                                  std::uint64_t node_limit = kDefaultNodeLimit) {
  return consistent_explicit(build_ipg(spec, node_limit));
}

namespace detail {

inline std::vector<bool> reachable_set(const InducedPreferenceGraph& g, std::uint64_t from) {
  std::vector<bool> seen(static_cast<std::size_t>(g.node_count()), false);
  std::deque<std::uint64_t> queue;
  for (const IpgEdge& e : g.edges_from(from))
    if (!seen[static_cast<std::size_t>(e.to)]) {
      seen[static_cast<std::size_t>(e.to)] = true;  // reachability through >= 1 flip
      queue.push_back(e.to);
    }
  while (!queue.empty()) {
    std::uint64_t at = queue.front();
    queue.pop_front();
    for (const IpgEdge& e : g.edges_from(at))
      if (!seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = true;
        queue.push_back(e.to);
      }
  }
  return seen;
}

}  // namespace detail

/// Subsumption: every improving flip of P1 must be entailed (as a dominance)
/// by P2. Edge-wise checking suffices since reachability is transitive. The
/// counter-flip, when present, is the least violating P1 edge.
inline Answer subsumes_explicit(const PreferenceSpec& p1, const PreferenceSpec& p2,
                                std::uint64_t node_limit = kDefaultNodeLimit) {
  InducedPreferenceGraph g1 = build_ipg(p1, node_limit);
  InducedPreferenceGraph g2 = build_ipg(align_universe(p1, p2), node_limit);
  for (std::uint64_t from = 0; from < g1.node_count(); ++from) {
    const auto& edges = g1.edges_from(from);
    if (edges.empty()) continue;
    std::vector<bool> reach = detail::reachable_set(g2, from);
    for (const IpgEdge& e : edges) {
      if (reach[static_cast<std::size_t>(e.to)]) continue;
      Proof proof;
      proof.kind = ProofKind::NonSubsumptionFlip;
      proof.steps.push_back({g1.space().outcome_at(from), g1.space().outcome_at(e.to),
                             p1.statements[e.statement].id});
      return {false, proof};
    }
  }
  return {true, std::nullopt};
}

/// Equivalence: subsumption in both directions; a failure carries the failing
/// direction and its counter-flip.
inline Answer equivalent_explicit(const PreferenceSpec& p1, const PreferenceSpec& p2,
                                  std::uint64_t node_limit = kDefaultNodeLimit) {
  Answer forward = subsumes_explicit(p1, p2, node_limit);
  if (!forward.value) {
    forward.proof->direction = FailedDirection::P1NotInP2;
    return forward;
  }
  Answer backward = subsumes_explicit(p2, p1, node_limit);
  if (!backward.value) {
    backward.proof->direction = FailedDirection::P2NotInP1;
    return backward;
  }
  return {true, std::nullopt};
}

}  // namespace cpref
