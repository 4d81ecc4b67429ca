#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cpref/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "cpref - exact reasoner for ceteris paribus preference languages "
      "(CP-nets, TCP-nets, CP-theories)"};

  cpref::RunConfig config;
  std::string spec, spec2, engine = "symbolic", query, out, checker;
  bool emit_smv = false, dump_ipg = false;

  app.add_option("--spec", spec, "preference specification XML file");
  app.add_option("--spec2", spec2, "second specification (subsumption/equivalence)");
  app.add_option("--query", query, "query XML file");
  app.add_flag("--interactive", config.interactive, "menu-driven console mode");
  app.add_option("--engine", engine, "explicit | symbolic | both")
      ->check(CLI::IsMember({"explicit", "symbolic", "both"}));
  app.add_option("--out", out, "output file (stdout when omitted)");
  app.add_flag("--emit-smv", emit_smv, "write the SMV model instead of answering");
  app.add_flag("--dump-ipg", dump_ipg, "write the explicit induced preference graph");
  app.add_option("--checker", checker, "external SMV model checker to cross-check with");
  app.add_option("--node-budget", config.node_budget, "symbolic engine BDD node budget");
  app.add_option("--node-limit", config.node_limit, "explicit engine outcome-count limit");

  CLI11_PARSE(app, argc, argv);

  if (!spec.empty()) config.spec_paths.push_back(spec);
  if (!spec2.empty()) config.spec_paths.push_back(spec2);
  if (!query.empty()) config.query_path = query;
  if (!out.empty()) config.out_path = out;
  if (!checker.empty()) config.checker_path = checker;
  config.engine = engine == "explicit"  ? cpref::EngineSelect::Explicit
                  : engine == "both"    ? cpref::EngineSelect::Both
                                        : cpref::EngineSelect::Symbolic;

  if (emit_smv) return cpref::emit_model_command(config);
  if (dump_ipg) return cpref::dump_ipg_command(config);
  if (config.interactive == config.query_path.has_value()) {
    std::cerr << "error: pass exactly one of --query or --interactive "
                 "(or --emit-smv / --dump-ipg)\n";
    return 2;
  }
  if (config.interactive) return cpref::run_interactive(config);
  return cpref::run_batch(config);
}
