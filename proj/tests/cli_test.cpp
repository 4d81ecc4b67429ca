#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <sys/stat.h>

#include "cpref/cli.hpp"
#include "fixtures.hpp"

using namespace cpref;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& name) {
  return std::string(CPREF_DATA_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_file(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

std::string drop_elapsed(std::string text) {
  return std::regex_replace(text, std::regex("ELAPSED-US=\"[0-9]+\""), "ELAPSED-US=\"_\"");
}

}  // namespace

TEST_CASE("query dispatch with proof verification") {
  PreferenceSpec p1 = fixtures::p1();
  Query q;
  q.kind = QueryKind::Consistency;

  QueryResult both = answer_query(q, {p1}, EngineSelect::Both);
  CHECK(both.answer);
  CHECK(both.engine == EngineKind::Symbolic);

  QueryResult ex = answer_query(q, {p1}, EngineSelect::Explicit);
  CHECK(ex.engine == EngineKind::Explicit);
  CHECK(ex.answer);

  SECTION("equivalence runs both directions") {
    Query eq;
    eq.kind = QueryKind::Equivalence;
    QueryResult r = answer_query(eq, {p1, fixtures::p1_minus_s3()}, EngineSelect::Symbolic);
    CHECK_FALSE(r.answer);
    REQUIRE(r.proof);
    CHECK(r.proof->direction == FailedDirection::P1NotInP2);
  }
  SECTION("normalized proofs come back from the dispatcher") {
    Query dq;
    dq.kind = QueryKind::Dominance;
    dq.better = fixtures::at(p1, "a=0,b=1,c=0");
    dq.worse = fixtures::at(p1, "a=1,b=0,c=1");
    QueryResult r = answer_query(dq, {p1}, EngineSelect::Both);
    REQUIRE(r.proof);
    CHECK(r.proof->steps.size() == 3);
    CHECK(verify_proof(p1, dq, *r.proof));
  }
  SECTION("symbolic falls back to explicit on a tiny budget") {
    QueryResult r = answer_query(q, {p1}, EngineSelect::Symbolic, 4);
    CHECK(r.engine == EngineKind::Explicit);
    CHECK(r.answer);
  }
}

TEST_CASE("batch runs answer query files") {
  SECTION("dominance over the sample files") {
    RunConfig config;
    config.query_path = data_path("q_p1_dominance.xml");
    config.engine = EngineSelect::Both;
    fs::path out = fs::temp_directory_path() / "cpref_dom_result.xml";
    config.out_path = out.string();
    std::ostringstream diag;
    REQUIRE(run_batch(config, diag) == 0);
    std::string xml = slurp(out.string());
    CHECK(xml.find("ANSWER=\"true\"") != std::string::npos);
    CHECK(xml.find("KIND=\"DOMINANCE\"") != std::string::npos);
    CHECK(xml.find("DOMINANCE-PATH") != std::string::npos);

    // byte-identical rerun, timing attribute aside
    fs::path out2 = fs::temp_directory_path() / "cpref_dom_result2.xml";
    config.out_path = out2.string();
    REQUIRE(run_batch(config, diag) == 0);
    CHECK(drop_elapsed(slurp(out.string())) == drop_elapsed(slurp(out2.string())));
    fs::remove(out);
    fs::remove(out2);
  }
  SECTION("subsumption answers false with a counter-flip") {
    RunConfig config;
    config.query_path = data_path("q_p1_subsumes_p1m.xml");
    fs::path out = fs::temp_directory_path() / "cpref_sub_result.xml";
    config.out_path = out.string();
    std::ostringstream diag;
    REQUIRE(run_batch(config, diag) == 0);
    std::string xml = slurp(out.string());
    CHECK(xml.find("ANSWER=\"false\"") != std::string::npos);
    CHECK(xml.find("COUNTER-FLIP STATEMENT-ID=\"s3\"") != std::string::npos);
    fs::remove(out);
  }
  SECTION("explicit --spec flags override the query file's references") {
    RunConfig config;
    config.query_path = data_path("q_p1_consistency.xml");
    config.spec_paths = {data_path("d2.xml")};
    fs::path out = fs::temp_directory_path() / "cpref_c_result.xml";
    config.out_path = out.string();
    std::ostringstream diag;
    REQUIRE(run_batch(config, diag) == 0);
    CHECK(slurp(out.string()).find("ANSWER=\"false\"") != std::string::npos);
    fs::remove(out);
  }
  SECTION("undefined variables exit 2 with the reporting wording") {
    fs::path bad = temp_file("cpref_bad_spec.xml",
                             "<PREFERENCE-SPECIFICATION>"
                             "<VARIABLE><NAME>a</NAME><DOMAIN-VALUE>0</DOMAIN-VALUE>"
                             "<DOMAIN-VALUE>1</DOMAIN-VALUE></VARIABLE>"
                             "<PREFERENCE-STATEMENT><STATEMENT-ID>p</STATEMENT-ID>"
                             "<VARIABLE>zz</VARIABLE><PREFERENCE>0:1</PREFERENCE>"
                             "</PREFERENCE-STATEMENT></PREFERENCE-SPECIFICATION>");
    fs::path query = temp_file("cpref_bad_query.xml",
                               "<PREFERENCE-QUERY KIND=\"CONSISTENCY\">"
                               "<SPEC-FILE>cpref_bad_spec.xml</SPEC-FILE></PREFERENCE-QUERY>");
    RunConfig config;
    config.query_path = query.string();
    std::ostringstream diag;
    CHECK(run_batch(config, diag) == 2);
    CHECK(diag.str().find("not defined in the preference specification") != std::string::npos);
    fs::remove(bad);
    fs::remove(query);
  }
  SECTION("missing files exit 2") {
    RunConfig config;
    config.query_path = "/nonexistent/query.xml";
    std::ostringstream diag;
    CHECK(run_batch(config, diag) == 2);
  }
  SECTION("resource exhaustion exits 3") {
    // 17 binary variables: too big for the explicit fallback threshold
    std::string vars;
    for (int i = 0; i < 17; ++i)
      vars += "<VARIABLE><NAME>v" + std::to_string(i) +
              "</NAME><DOMAIN-VALUE>0</DOMAIN-VALUE><DOMAIN-VALUE>1</DOMAIN-VALUE></VARIABLE>";
    fs::path spec = temp_file("cpref_wide_spec.xml",
                              "<PREFERENCE-SPECIFICATION>" + vars +
                                  "<PREFERENCE-STATEMENT><STATEMENT-ID>p</STATEMENT-ID>"
                                  "<VARIABLE>v0</VARIABLE><PREFERENCE>0:1</PREFERENCE>"
                                  "</PREFERENCE-STATEMENT></PREFERENCE-SPECIFICATION>");
    fs::path query = temp_file("cpref_wide_query.xml",
                               "<PREFERENCE-QUERY KIND=\"CONSISTENCY\">"
                               "<SPEC-FILE>cpref_wide_spec.xml</SPEC-FILE></PREFERENCE-QUERY>");
    RunConfig config;
    config.query_path = query.string();
    config.node_budget = 16;
    std::ostringstream diag;
    CHECK(run_batch(config, diag) == 3);
    fs::remove(spec);
    fs::remove(query);
  }
}

TEST_CASE("an external checker cross-checks batch answers") {
  auto fake_checker = [](const std::string& verdict) {
    fs::path script = fs::temp_directory_path() / ("cpref_checker_" + verdict + ".sh");
    std::ofstream out(script);
    out << "#!/bin/sh\necho '-- specification whatever is " << verdict << "'\n";
    out.close();
    ::chmod(script.c_str(), 0755);
    return script;
  };

  RunConfig config;
  config.query_path = data_path("q_p1_consistency.xml");
  config.out_path = (fs::temp_directory_path() / "cpref_checker_result.xml").string();

  SECTION("agreement passes") {
    fs::path script = fake_checker("true");
    config.checker_path = script.string();
    std::ostringstream diag;
    CHECK(run_batch(config, diag) == 0);
    fs::remove(script);
  }
  SECTION("divergence exits 4") {
    fs::path script = fake_checker("false");
    config.checker_path = script.string();
    std::ostringstream diag;
    CHECK(run_batch(config, diag) == 4);
    CHECK(diag.str().find("external checker says false") != std::string::npos);
    fs::remove(script);
  }
  fs::remove(*config.out_path);
}

TEST_CASE("pair queries accept specs with differently ordered declarations") {
  PreferenceSpec p1 = fixtures::p1();
  PreferenceSpec shuffled = p1;
  std::swap(shuffled.variables[0], shuffled.variables[2]);
  std::reverse(shuffled.statements.begin(), shuffled.statements.end());

  Query eq;
  eq.kind = QueryKind::Equivalence;
  CHECK(answer_query(eq, {p1, shuffled}, EngineSelect::Both).answer);

  Query sub;
  sub.kind = QueryKind::Subsumption;
  CHECK(answer_query(sub, {shuffled, p1}, EngineSelect::Both).answer);
}

TEST_CASE("interactive session") {
  RunConfig config;
  config.spec_paths = {data_path("p1.xml")};

  SECTION("dominance with a re-prompt on a malformed outcome") {
    std::istringstream in(
        "d\n"
        "a=0,b=1\n"          // incomplete, re-prompts
        "a=0,b=1,c=0\n"
        "a=1,b=0,c=1\n"
        "c\n"
        "q\n");
    std::ostringstream out;
    CHECK(run_interactive(config, in, out) == 0);
    std::string text = out.str();
    CHECK(text.find("loaded 'P1': 3 variables, 3 statements (CP-net)") != std::string::npos);
    CHECK(text.find("try again") != std::string::npos);
    CHECK(text.find("DOMINANCE: true") != std::string::npos);
    CHECK(text.find("--[s3]-->") != std::string::npos);
    CHECK(text.find("CONSISTENCY: true") != std::string::npos);
  }
  SECTION("two specifications unlock equivalence") {
    config.spec_paths.push_back(data_path("p1_minus_s3.xml"));
    std::istringstream in("e\nq\n");
    std::ostringstream out;
    CHECK(run_interactive(config, in, out) == 0);
    CHECK(out.str().find("EQUIVALENCE: false") != std::string::npos);
    CHECK(out.str().find("P1-NOT-IN-P2") != std::string::npos);
  }
  SECTION("unloadable spec exits 2") {
    config.spec_paths = {"/nonexistent.xml"};
    std::istringstream in("q\n");
    std::ostringstream out;
    CHECK(run_interactive(config, in, out) == 2);
  }
}

TEST_CASE("model emission command") {
  RunConfig config;
  config.spec_paths = {data_path("p1.xml")};
  fs::path out = fs::temp_directory_path() / "cpref_model.smv";
  config.out_path = out.string();
  std::ostringstream diag;

  SECTION("bare model") {
    REQUIRE(emit_model_command(config, diag) == 0);
    CHECK(slurp(out.string()) == emit_smv(fixtures::p1()).model_text);
  }
  SECTION("with a query the SPEC lines are appended") {
    config.query_path = data_path("q_p1_dominance.xml");
    REQUIRE(emit_model_command(config, diag) == 0);
    std::string text = slurp(out.string());
    CHECK(text.find("SPEC (a=1 & b=0 & c=1) -> EF (a=0 & b=1 & c=0)") != std::string::npos);
  }
  SECTION("two specs emit the combined model") {
    config.spec_paths.push_back(data_path("p1_minus_s3.xml"));
    REQUIRE(emit_model_command(config, diag) == 0);
    std::string text = slurp(out.string());
    CHECK(text.find("g1 : {0,1};") != std::string::npos);
    CHECK(text.find("g2 : {0,1};") != std::string::npos);
  }
  fs::remove(out);
}

TEST_CASE("IPG dump command") {
  RunConfig config;
  config.spec_paths = {data_path("p1.xml")};
  fs::path out = fs::temp_directory_path() / "cpref_ipg.txt";
  config.out_path = out.string();
  std::ostringstream diag;
  REQUIRE(dump_ipg_command(config, diag) == 0);
  std::string text = slurp(out.string());
  CHECK(std::count(text.begin(), text.end(), '\n') == 8);
  CHECK(text.find("[s1]") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("the built binary answers a query end to end") {
  fs::path out = fs::temp_directory_path() / "cpref_cli_e2e.xml";
  std::string command = std::string("\"") + CPREF_CLI_PATH + "\" --query \"" +
                        data_path("q_p1_consistency.xml") + "\" --engine both --out \"" +
                        out.string() + "\"";
  int status = std::system(command.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(slurp(out.string()).find("ANSWER=\"true\"") != std::string::npos);
  fs::remove(out);
}
