#include <catch2/catch_amalgamated.hpp>

#include "cpref/model.hpp"
#include "fixtures.hpp"
#include "random_specs.hpp"

using namespace cpref;

TEST_CASE("language classification") {
  CHECK(classify_language(fixtures::p1()) == LanguageClass::CpNet);
  CHECK(classify_language(fixtures::p3()) == LanguageClass::TcpNet);

  PreferenceSpec theory = fixtures::p1();
  theory.statements[0].less_important = {"b", "c"};
  CHECK(classify_language(theory) == LanguageClass::CpTheory);

  PreferenceSpec empty;
  empty.variables = {fixtures::bin("a")};
  CHECK(classify_language(empty) == LanguageClass::CpNet);
}

TEST_CASE("classification is monotone under statement addition") {
  std::mt19937 rng(7);
  testgen::GenParams params;
  params.max_omega = 3;
  for (int trial = 0; trial < 50; ++trial) {
    PreferenceSpec spec = testgen::random_spec(rng, params);
    auto before = static_cast<int>(classify_language(spec));
    spec.statements.push_back(testgen::random_statement(rng, spec, "extra", params));
    CHECK(static_cast<int>(classify_language(spec)) >= before);
  }
}

TEST_CASE("validation accepts the figure specs") {
  CHECK(validate_spec(fixtures::p1()).empty());
  CHECK(validate_spec(fixtures::p3()).empty());
  CHECK(validate_spec(fixtures::d2()).empty());
  CHECK(validate_spec(fixtures::mv()).empty());
}

TEST_CASE("validation names the statement and the rule") {
  PreferenceSpec spec = fixtures::p1();

  SECTION("undeclared variable") {
    spec.statements.push_back({"p_k", "d", {}, "0", "1", {}});
    auto violations = validate_spec(spec);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "UndeclaredVariable");
    CHECK(violations[0].statement_id == "p_k");
    CHECK(violations[0].detail.find("'d'") != std::string::npos);
  }

  SECTION("degenerate preference") {
    spec.statements.push_back({"p_k", "a", {}, "0", "0", {}});
    auto violations = validate_spec(spec);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "DegeneratePreference");
    CHECK(violations[0].statement_id == "p_k");
  }

  SECTION("value outside the domain") {
    spec.statements.push_back({"p_k", "a", {}, "2", "1", {}});
    auto violations = validate_spec(spec);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "UndefinedValue");
  }

  SECTION("duplicate statement id") {
    spec.statements.push_back(spec.statements[0]);
    auto violations = validate_spec(spec);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "DuplicateStatementId");
  }

  SECTION("target in its own condition") {
    spec.statements.push_back({"p_k", "a", {{"a", "0"}}, "0", "1", {}});
    REQUIRE(validate_spec(spec).size() == 1);
    CHECK(validate_spec(spec)[0].rule == "TargetInCondition");
  }

  SECTION("condition overlaps the less-important set") {
    spec.statements.push_back({"p_k", "a", {{"b", "0"}}, "0", "1", {"b"}});
    REQUIRE(validate_spec(spec).size() == 1);
    CHECK(validate_spec(spec)[0].rule == "ConditionOverlapsLessImportant");
  }

  SECTION("declaration-level problems") {
    spec.variables.push_back({"a", {"0", "1"}});
    spec.variables.push_back({"tiny", {"0"}});
    spec.variables.push_back({"1bad", {"0", "1"}});
    spec.variables.push_back({"dup", {"x", "x"}});
    auto violations = validate_spec(spec);
    std::set<std::string> rules;
    for (const auto& v : violations) rules.insert(v.rule);
    CHECK(rules.count("DuplicateVariable"));
    CHECK(rules.count("DomainTooSmall"));
    CHECK(rules.count("BadVariableName"));
    CHECK(rules.count("DuplicateDomainValue"));
  }
}

TEST_CASE("conflicting and duplicate statements are valid input") {
  // An inconsistent net is a first-class input; conflicts surface in
  // consistency testing, not validation.
  PreferenceSpec spec = fixtures::p1();
  spec.statements.push_back({"s4", "a", {}, "1", "0", {}});   // conflicts with s1
  spec.statements.push_back({"s5", "a", {}, "0", "1", {}});   // duplicates s1
  CHECK(validate_spec(spec).empty());
}

TEST_CASE("token shapes") {
  CHECK(is_valid_name("abc_1"));
  CHECK_FALSE(is_valid_name("1abc"));
  CHECK_FALSE(is_valid_name(""));
  CHECK_FALSE(is_valid_name("a-b"));
  CHECK(is_valid_value("0"));
  CHECK(is_valid_value("42"));
  CHECK(is_valid_value("high"));
  CHECK(is_valid_value("v1"));
  CHECK_FALSE(is_valid_value("1a"));
  CHECK_FALSE(is_valid_value(""));
}

TEST_CASE("outcome parsing and formatting") {
  PreferenceSpec spec = fixtures::p1();
  Outcome o = parse_outcome(spec, " a=0 , b=1, c=0 ");
  CHECK(o.value_of("a") == "0");
  CHECK(o.value_of("b") == "1");
  CHECK(format_outcome(spec, o) == "a=0,b=1,c=0");

  CHECK_THROWS_AS(parse_outcome(spec, "a=0,b=1"), IncompleteOutcome);
  CHECK_THROWS_AS(parse_outcome(spec, "a=0,b=1,c=5"), UndefinedValue);
  CHECK_THROWS_AS(parse_outcome(spec, "a=0,b=1,d=0"), UndefinedVariable);
  CHECK_THROWS_AS(parse_outcome(spec, "a0,b=1,c=0"), MalformedAssignment);
  CHECK_THROWS_AS(parse_outcome(spec, "a=0,a=1,b=0,c=0"), Error);
}

TEST_CASE("outcome comparison follows declaration order and domain order") {
  PreferenceSpec spec = fixtures::mv();  // x before a before b
  Outcome low = fixtures::at(spec, "x=0,a=1,b=1");
  Outcome high = fixtures::at(spec, "x=1,a=0,b=0");
  CHECK(compare_outcomes(spec, low, high) < 0);
  CHECK(compare_outcomes(spec, high, low) > 0);
  CHECK(compare_outcomes(spec, low, low) == 0);
}

TEST_CASE("outcome counts") {
  CHECK(fixtures::p1().outcome_count() == 8);
  CHECK(fixtures::d2().outcome_count() == 4);
  CHECK(fixtures::mv().outcome_count() == 12);
}

TEST_CASE("universe checks") {
  CHECK_NOTHROW(check_same_universe(fixtures::p1(), fixtures::p1_minus_s3()));
  CHECK_THROWS_AS(check_same_universe(fixtures::p1(), fixtures::d2()), VariableMismatch);

  PreferenceSpec shuffled = fixtures::p1();
  std::swap(shuffled.variables[0], shuffled.variables[2]);
  CHECK_NOTHROW(check_same_universe(fixtures::p1(), shuffled));
  PreferenceSpec aligned = align_universe(fixtures::p1(), shuffled);
  CHECK(aligned.variables == fixtures::p1().variables);
}
