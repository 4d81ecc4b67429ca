#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cpref/bdd.hpp"

using namespace cpref;
using Ref = BddManager::Ref;

TEST_CASE("terminal and literal identities") {
  BddManager m;
  Ref x = m.var(0);
  CHECK(m.ite(x, BddManager::kTrue, BddManager::kFalse) == x);
  CHECK(m.bdd_not(m.bdd_not(x)) == x);
  CHECK(m.bdd_and(x, BddManager::kTrue) == x);
  CHECK(m.bdd_or(x, BddManager::kFalse) == x);
  CHECK(m.bdd_and(x, m.nvar(0)) == BddManager::kFalse);
  CHECK(m.bdd_or(x, m.nvar(0)) == BddManager::kTrue);
}

TEST_CASE("canonicity: equal functions are equal references") {
  BddManager m;
  Ref x = m.var(0), y = m.var(2);
  Ref one_way = m.bdd_or(m.bdd_and(x, y), m.bdd_and(m.bdd_not(x), y));
  CHECK(one_way == y);
  Ref de_morgan = m.bdd_not(m.bdd_and(m.bdd_not(x), m.bdd_not(y)));
  CHECK(de_morgan == m.bdd_or(x, y));
}

TEST_CASE("existential quantification") {
  BddManager m;
  auto xs = m.register_var_set({0});
  Ref x = m.var(0), y = m.var(2);
  CHECK(m.exists(m.bdd_and(x, y), xs) == y);
  CHECK(m.exists(m.bdd_or(x, y), xs) == BddManager::kTrue);
  CHECK(m.exists(y, xs) == y);
  CHECK(m.and_exists(x, y, xs) == y);
}

TEST_CASE("and_exists equals exists of the conjunction") {
  std::mt19937 rng(5);
  BddManager m;
  std::vector<int> vars{0, 1, 2, 3, 4, 5};
  auto evens = m.register_var_set({0, 2, 4});
  auto random_function = [&](int depth) {
    Ref f = std::uniform_int_distribution<int>(0, 1)(rng) ? BddManager::kTrue
                                                          : BddManager::kFalse;
    for (int i = 0; i < depth; ++i) {
      int v = vars[std::uniform_int_distribution<std::size_t>(0, vars.size() - 1)(rng)];
      Ref lit = std::uniform_int_distribution<int>(0, 1)(rng) ? m.var(v) : m.nvar(v);
      f = std::uniform_int_distribution<int>(0, 1)(rng) ? m.bdd_and(f, lit) : m.bdd_or(f, lit);
    }
    return f;
  };
  for (int trial = 0; trial < 200; ++trial) {
    Ref f = random_function(6), g = random_function(6);
    CHECK(m.and_exists(f, g, evens) == m.exists(m.bdd_and(f, g), evens));
  }
}

TEST_CASE("rename shifts variables preserving structure") {
  BddManager m;
  auto up = m.register_var_map({{0, 1}, {3, 4}});
  Ref f = m.bdd_or(m.bdd_and(m.var(0), m.nvar(3)), m.bdd_and(m.nvar(0), m.var(3)));
  Ref g = m.bdd_or(m.bdd_and(m.var(1), m.nvar(4)), m.bdd_and(m.nvar(1), m.var(4)));
  CHECK(m.rename(f, up) == g);

  CHECK_THROWS_AS(m.register_var_map({{0, 5}, {1, 4}}), Error);  // order breaks
}

TEST_CASE("model counting over a variable set") {
  BddManager m;
  auto set = m.register_var_set({0, 1, 2});
  Ref x = m.var(0), y = m.var(1);
  CHECK(m.count_assignments(BddManager::kTrue, set) == 8);
  CHECK(m.count_assignments(BddManager::kFalse, set) == 0);
  CHECK(m.count_assignments(x, set) == 4);
  CHECK(m.count_assignments(m.bdd_or(x, y), set) == 6);
  CHECK(m.count_assignments(m.bdd_and(x, m.var(2)), set) == 2);
}

TEST_CASE("least satisfying assignment prefers zeros at the top") {
  BddManager m;
  auto set = m.register_var_set({0, 1, 2});
  CHECK_FALSE(m.min_assignment(BddManager::kFalse, set).has_value());

  auto bits = m.min_assignment(BddManager::kTrue, set);
  REQUIRE(bits);
  CHECK(*bits == std::vector<bool>{false, false, false});

  // x0 | (!x0 & x1 & x2): choosing 0 at the top forces x1 and x2
  Ref f = m.bdd_or(m.var(0), m.bdd_and(m.var(1), m.var(2)));
  bits = m.min_assignment(f, set);
  REQUIRE(bits);
  CHECK(*bits == std::vector<bool>{false, true, true});
}

TEST_CASE("satisfying sets match a truth-table evaluation") {
  std::mt19937 rng(7);
  const int nvars = 4;
  BddManager m;
  auto all = m.register_var_set({0, 1, 2, 3});

  // mirror each manager operation on explicit truth tables
  using Table = std::array<bool, 16>;
  auto lit_table = [](int v, bool pos) {
    Table t{};
    for (int row = 0; row < 16; ++row) t[row] = (((row >> v) & 1) == 1) == pos;
    return t;
  };
  for (int trial = 0; trial < 100; ++trial) {
    Ref f = BddManager::kFalse;
    Table tf{};
    for (int step = 0; step < 7; ++step) {
      int v = std::uniform_int_distribution<int>(0, nvars - 1)(rng);
      bool pos = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
      bool use_and = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
      Ref lit = m.literal(v, pos);
      Table tl = lit_table(v, pos);
      if (use_and) {
        f = m.bdd_and(f, lit);
        for (int r = 0; r < 16; ++r) tf[r] = tf[r] && tl[r];
      } else {
        f = m.bdd_or(f, lit);
        for (int r = 0; r < 16; ++r) tf[r] = tf[r] || tl[r];
      }
    }
    std::uint64_t expected = 0;
    for (bool b : tf) expected += b ? 1 : 0;
    CHECK(m.count_assignments(f, all) == expected);
  }
}

TEST_CASE("node budget aborts construction") {
  BddManager m(8);
  CHECK_THROWS_AS(
      [&] {
        Ref f = BddManager::kTrue;
        for (int v = 0; v < 16; ++v) f = m.bdd_and(f, m.var(v));
        return f;
      }(),
      NodeBudgetExceeded);
}

TEST_CASE("foreign handles are rejected") {
  BddManager m;
  CHECK_THROWS_AS(m.exists(BddManager::kTrue, 3), ManagerMismatch);
  CHECK_THROWS_AS(m.rename(BddManager::kTrue, 0), ManagerMismatch);
  CHECK_THROWS_AS(m.var_set(1), ManagerMismatch);
}
