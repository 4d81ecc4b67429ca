#pragma once

#include <string>

#include "cpref/model.hpp"

// The figure-derived specifications used across the suites:
//  - p1: the consistent three-variable CP-net (a unconditional, b on c, c on b)
//  - p3: p1 with the a-statement made more important than b
//  - d2: the two-variable inconsistent CP-net (four conditionals forming a cycle)
//  - mv: a spec with one ternary domain plus binary ones
namespace fixtures {

inline cpref::Variable bin(std::string name) {
  return {std::move(name), {"0", "1"}};
}

inline cpref::PreferenceSpec p1() {
  cpref::PreferenceSpec s;
  s.name = "P1";
  s.variables = {bin("a"), bin("b"), bin("c")};
  s.statements = {
      {"s1", "a", {}, "0", "1", {}},
      {"s2", "b", {{"c", "0"}}, "1", "0", {}},
      {"s3", "c", {{"b", "0"}}, "0", "1", {}},
  };
  return s;
}

inline cpref::PreferenceSpec p1_minus_s3() {
  cpref::PreferenceSpec s = p1();
  s.name = "P1m";
  s.statements.pop_back();
  return s;
}

inline cpref::PreferenceSpec p3() {
  cpref::PreferenceSpec s = p1();
  s.name = "P3";
  s.statements[0].less_important = {"b"};
  return s;
}

inline cpref::PreferenceSpec d2() {
  cpref::PreferenceSpec s;
  s.name = "D2";
  s.variables = {bin("a"), bin("b")};
  s.statements = {
      {"s1", "a", {{"b", "0"}}, "1", "0", {}},
      {"s2", "a", {{"b", "1"}}, "0", "1", {}},
      {"s3", "b", {{"a", "1"}}, "1", "0", {}},
      {"s4", "b", {{"a", "0"}}, "0", "1", {}},
  };
  return s;
}

inline cpref::PreferenceSpec mv() {
  cpref::PreferenceSpec s;
  s.name = "MV";
  s.variables = {{"x", {"0", "1", "2"}}, bin("a"), bin("b")};
  s.statements = {
      {"m1", "x", {}, "0", "1", {}},
      {"m2", "x", {}, "1", "2", {}},
      {"m3", "a", {{"x", "0"}}, "1", "0", {}},
      {"m4", "b", {{"a", "1"}}, "0", "1", {"x"}},
  };
  return s;
}

inline cpref::Outcome at(const cpref::PreferenceSpec& spec, std::string_view text) {
  return cpref::parse_outcome(spec, text);
}

}  // namespace fixtures
