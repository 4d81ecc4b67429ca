#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpref/model.hpp"

namespace cpref {

/// The manager grew past its configured node budget.
class NodeBudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Arguments from two different managers were mixed.
class ManagerMismatch : public Error {
 public:
  using Error::Error;
};

/// Reduced ordered BDDs with a shared unique table, so equal functions are
/// equal node references. Nodes are never freed; operation caches therefore
/// stay valid for the manager's lifetime. A manager and every Ref drawn from
/// it are confined to one thread.
class BddManager {
 public:
  using Ref = std::int32_t;
  using VarSetId = std::int32_t;
  using VarMapId = std::int32_t;

  static constexpr Ref kFalse = 0;
  static constexpr Ref kTrue = 1;

  explicit BddManager(std::size_t node_budget = kDefaultNodeBudget)
      : budget_(std::min<std::size_t>(node_budget, kMaxNodes)) {
    nodes_.push_back({kTerminalVar, kFalse, kFalse});
    nodes_.push_back({kTerminalVar, kTrue, kTrue});
  }

  BddManager(const BddManager&) = delete;
  BddManager& operator=(const BddManager&) = delete;
  BddManager(BddManager&&) = default;
  BddManager& operator=(BddManager&&) = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t node_budget() const { return budget_; }

  int var_of(Ref f) const { return nodes_[static_cast<std::size_t>(f)].var; }
  Ref low(Ref f) const { return nodes_[static_cast<std::size_t>(f)].lo; }
  Ref high(Ref f) const { return nodes_[static_cast<std::size_t>(f)].hi; }
  bool is_terminal(Ref f) const { return f <= 1; }

  Ref var(int index) { return mk(index, kFalse, kTrue); }
  Ref nvar(int index) { return mk(index, kTrue, kFalse); }
  Ref literal(int index, bool positive) { return positive ? var(index) : nvar(index); }

  Ref ite(Ref f, Ref g, Ref h) {
    if (f == kTrue) return g;
    if (f == kFalse) return h;
    if (g == h) return g;
    if (g == kTrue && h == kFalse) return f;
    Key key{OpIte, f, g, h};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int v = top_var3(f, g, h);
    Ref lo = ite(cofactor(f, v, false), cofactor(g, v, false), cofactor(h, v, false));
    Ref hi = ite(cofactor(f, v, true), cofactor(g, v, true), cofactor(h, v, true));
    Ref r = mk(v, lo, hi);
    cache_.emplace(key, r);
    return r;
  }

  Ref bdd_not(Ref f) { return ite(f, kFalse, kTrue); }
  Ref bdd_and(Ref f, Ref g) { return ite(f, g, kFalse); }
  Ref bdd_or(Ref f, Ref g) { return ite(f, kTrue, g); }
  Ref bdd_diff(Ref f, Ref g) { return ite(g, kFalse, f); }  // f and not g
  Ref bdd_xnor(Ref f, Ref g) { return ite(f, g, bdd_not(g)); }

  /// Registers a quantification/counting variable set; returns a handle used
  /// as part of operation cache keys. Sets should be registered once.
  VarSetId register_var_set(std::vector<int> vars) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    VarSet set;
    set.vars = std::move(vars);
    for (std::size_t i = 0; i < set.vars.size(); ++i) {
      int v = set.vars[i];
      if (static_cast<std::size_t>(v) >= set.rank.size()) set.rank.resize(v + 1, -1);
      set.rank[v] = static_cast<int>(i);
    }
    sets_.push_back(std::move(set));
    return static_cast<VarSetId>(sets_.size() - 1);
  }

  const std::vector<int>& var_set(VarSetId id) const {
    check_handle(static_cast<std::size_t>(id) < sets_.size());
    return sets_[id].vars;
  }

  /// Registers a variable substitution. The map must preserve the manager's
  /// variable order over the support of every BDD it is applied to.
  VarMapId register_var_map(const std::vector<std::pair<int, int>>& pairs) {
    VarMap map;
    int prev_src = -1, prev_dst = -1;
    std::vector<std::pair<int, int>> sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    for (auto [src, dst] : sorted) {
      if (src <= prev_src || dst <= prev_dst)
        throw Error("variable map is not order-preserving");
      prev_src = src;
      prev_dst = dst;
      if (static_cast<std::size_t>(src) >= map.image.size()) map.image.resize(src + 1, -1);
      map.image[src] = dst;
    }
    maps_.push_back(std::move(map));
    return static_cast<VarMapId>(maps_.size() - 1);
  }

  /// Existential quantification over the set's variables.
  Ref exists(Ref f, VarSetId set) {
    check_handle(static_cast<std::size_t>(set) < sets_.size());
    if (is_terminal(f)) return f;
    Key key{op_for_set(OpExists, set), f, 0, 0};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int v = var_of(f);
    Ref lo = exists(low(f), set);
    Ref hi = exists(high(f), set);
    Ref r = in_set(set, v) ? bdd_or(lo, hi) : mk(v, lo, hi);
    cache_.emplace(key, r);
    return r;
  }

  /// Relational product: exists(set, f and g) without building the conjunction.
  Ref and_exists(Ref f, Ref g, VarSetId set) {
    if (f == kFalse || g == kFalse) return kFalse;
    if (f == kTrue && g == kTrue) return kTrue;
    if (f == kTrue) return exists(g, set);
    if (g == kTrue) return exists(f, set);
    if (f == g) return exists(f, set);
    if (f > g) std::swap(f, g);
    Key key{op_for_set(OpAndExists, set), f, g, 0};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    int v = top_var(f, g);
    Ref lo = and_exists(cofactor(f, v, false), cofactor(g, v, false), set);
    Ref hi = and_exists(cofactor(f, v, true), cofactor(g, v, true), set);
    Ref r = in_set(set, v) ? bdd_or(lo, hi) : mk(v, lo, hi);
    cache_.emplace(key, r);
    return r;
  }

  /// Substitutes variables per the registered map.
  Ref rename(Ref f, VarMapId map) {
    check_handle(static_cast<std::size_t>(map) < maps_.size());
    if (is_terminal(f)) return f;
    Key key{op_for_map(OpRename, map), f, 0, 0};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto& image = maps_[map].image;
    int v = var_of(f);
    int nv = static_cast<std::size_t>(v) < image.size() && image[v] >= 0 ? image[v] : v;
    Ref r = mk(nv, rename(low(f), map), rename(high(f), map));
    cache_.emplace(key, r);
    return r;
  }

  /// Number of satisfying assignments over the set's variables. The support
  /// of f must lie inside the set; the set may have at most 62 variables.
  std::uint64_t count_assignments(Ref f, VarSetId set) {
    const auto& vars = sets_[set].vars;
    if (vars.size() > 62) throw Error("counting set too large");
    if (f == kFalse) return 0;
    std::uint64_t scale = std::uint64_t{1} << rank_of(set, f);
    return scale * scaled_count(f, set);
  }

  /// Lexicographically least satisfying assignment over the set's variables
  /// (low branch preferred, skipped variables zero). Empty when f is false.
  std::optional<std::vector<bool>> min_assignment(Ref f, VarSetId set) {
    if (f == kFalse) return std::nullopt;
    const auto& s = sets_[set];
    std::vector<bool> bits(s.vars.size(), false);
    Ref at = f;
    while (!is_terminal(at)) {
      int r = s.rank[var_of(at)];
      if (low(at) != kFalse) {
        at = low(at);
      } else {
        bits[static_cast<std::size_t>(r)] = true;
        at = high(at);
      }
    }
    return bits;
  }

 private:
  static constexpr int kTerminalVar = std::numeric_limits<int>::max();
  static constexpr std::size_t kMaxNodes = std::size_t{1} << 24;  // unique-key packing bound

  enum Op : std::int32_t { OpIte = 0, OpExists, OpAndExists, OpRename, OpCount, OpSentinel };

  struct Node {
    int var;
    Ref lo, hi;
  };

  struct Key {
    std::int32_t op;
    Ref a, b, c;
    bool operator==(const Key&) const = default;
  };

  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t x = static_cast<std::uint32_t>(k.op);
      x = x * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k.a);
      x = x * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k.b);
      x = x * 0x9e3779b97f4a7c15ull + static_cast<std::uint32_t>(k.c);
      return static_cast<std::size_t>(x ^ (x >> 31));
    }
  };

  struct VarSet {
    std::vector<int> vars;   // sorted
    std::vector<int> rank;   // var -> position, -1 outside
  };

  struct VarMap {
    std::vector<int> image;  // var -> substituted var, -1 identity
  };

  static void check_handle(bool ok) {
    if (!ok) throw ManagerMismatch("handle does not belong to this manager");
  }

  std::int32_t op_for_set(Op op, VarSetId set) const {
    return OpSentinel + static_cast<std::int32_t>(OpSentinel) * set + op;
  }
  std::int32_t op_for_map(Op op, VarMapId map) const {
    // maps and sets share the tag space; offset keeps them apart
    return -(OpSentinel + static_cast<std::int32_t>(OpSentinel) * map + op);
  }

  bool in_set(VarSetId set, int v) const {
    const auto& rank = sets_[set].rank;
    return static_cast<std::size_t>(v) < rank.size() && rank[v] >= 0;
  }

  int top_var(Ref f, Ref g) const { return std::min(var_of(f), var_of(g)); }
  int top_var3(Ref f, Ref g, Ref h) const { return std::min(var_of(f), top_var(g, h)); }

  Ref cofactor(Ref f, int v, bool positive) const {
    if (var_of(f) != v) return f;
    return positive ? high(f) : low(f);
  }

  Ref mk(int var, Ref lo, Ref hi) {
    if (lo == hi) return lo;
    std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(var)) << 48) |
                        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 24) |
                        static_cast<std::uint64_t>(static_cast<std::uint32_t>(hi));
    auto [it, inserted] = unique_.try_emplace(key, static_cast<Ref>(nodes_.size()));
    if (!inserted) return it->second;
    if (nodes_.size() >= budget_) {
      unique_.erase(it);
      throw NodeBudgetExceeded("BDD node budget of " + std::to_string(budget_) +
                               " nodes exceeded");
    }
    nodes_.push_back({var, lo, hi});
    return static_cast<Ref>(nodes_.size() - 1);
  }

  // rank of a node's variable within the counting set; terminals rank past the end
  int rank_of(VarSetId set, Ref f) const {
    if (is_terminal(f)) return static_cast<int>(sets_[set].vars.size());
    return sets_[set].rank[var_of(f)];
  }

  // satisfying-assignment count over the variables at or below f's own level
  std::uint64_t scaled_count(Ref f, VarSetId set) {
    if (f == kFalse) return 0;
    if (f == kTrue) return 1;
    Key key{op_for_set(OpCount, set), f, 0, 0};
    if (auto it = count_cache_.find(key); it != count_cache_.end()) return it->second;
    int here = rank_of(set, f);
    std::uint64_t lo = scaled_count(low(f), set) << (rank_of(set, low(f)) - here - 1);
    std::uint64_t hi = scaled_count(high(f), set) << (rank_of(set, high(f)) - here - 1);
    std::uint64_t r = lo + hi;
    count_cache_.emplace(key, r);
    return r;
  }

  std::size_t budget_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, Ref> unique_;
  std::unordered_map<Key, Ref, KeyHash> cache_;
  std::unordered_map<Key, std::uint64_t, KeyHash> count_cache_;
  std::vector<VarSet> sets_;
  std::vector<VarMap> maps_;
};

}  // namespace cpref
