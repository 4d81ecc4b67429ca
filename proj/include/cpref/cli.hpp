#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpref/explicit_engine.hpp"
#include "cpref/model.hpp"
#include "cpref/proofs.hpp"
#include "cpref/smv.hpp"
#include "cpref/symbolic.hpp"
#include "cpref/xml.hpp"

namespace cpref {

/// The two engines (or the internal and external ones) disagree.
class EngineDivergence : public Error {
 public:
  using Error::Error;
};

enum class EngineSelect { Explicit, Symbolic, Both };

struct RunConfig {
  std::vector<std::string> spec_paths;  // overrides the query file's references
  std::optional<std::string> query_path;
  bool interactive = false;
  EngineSelect engine = EngineSelect::Symbolic;
  std::optional<std::string> out_path;  // stdout when absent
  std::optional<std::string> checker_path;
  std::size_t node_budget = kDefaultNodeBudget;
  std::uint64_t node_limit = kDefaultNodeLimit;
};

namespace detail {

inline Answer run_engine(EngineKind kind, const Query& query,
                         const std::vector<PreferenceSpec>& specs, std::size_t node_budget,
                         std::uint64_t node_limit) {
  if (kind == EngineKind::Explicit) {
    switch (query.kind) {
      case QueryKind::Dominance:
        return dominates_explicit(specs.at(0), query.better, query.worse, node_limit);
      case QueryKind::Consistency: return consistent_explicit(specs.at(0), node_limit);
      case QueryKind::Subsumption:
        return subsumes_explicit(specs.at(0), specs.at(1), node_limit);
      case QueryKind::Equivalence:
        return equivalent_explicit(specs.at(0), specs.at(1), node_limit);
    }
  }
  switch (query.kind) {
    case QueryKind::Dominance:
      return dominates_symbolic(specs.at(0), query.better, query.worse, node_budget);
    case QueryKind::Consistency: return consistent_symbolic(specs.at(0), node_budget);
    case QueryKind::Subsumption:
      return subsumes_symbolic(specs.at(0), specs.at(1), node_budget);
    case QueryKind::Equivalence: {
      // both directions in parallel, each with its own manager
      auto forward = std::async(std::launch::async, [&] {
        return subsumes_symbolic(specs.at(0), specs.at(1), node_budget);
      });
      auto backward = std::async(std::launch::async, [&] {
        return subsumes_symbolic(specs.at(1), specs.at(0), node_budget);
      });
      Answer f = forward.get(), b = backward.get();
      if (!f.value) {
        f.proof->direction = FailedDirection::P1NotInP2;
        return f;
      }
      if (!b.value) {
        b.proof->direction = FailedDirection::P2NotInP1;
        return b;
      }
      return {true, std::nullopt};
    }
  }
  throw Error("unreachable query kind");
}

inline void check_proof(const Query& query, const std::vector<PreferenceSpec>& specs,
                        Answer& answer) {
  if (!answer.proof) return;
  bool ok;
  if (specs.size() == 2) {
    answer.proof = normalize_proof(specs[0], specs[1], std::move(*answer.proof));
    ok = verify_proof(specs[0], specs[1], query, *answer.proof);
  } else {
    answer.proof = normalize_proof(specs[0], std::move(*answer.proof));
    ok = verify_proof(specs[0], query, *answer.proof);
  }
  if (!ok) throw InternalInconsistency("engine produced a proof that fails verification");
}

}  // namespace detail

/// Dispatches a query to the selected engine(s). Every produced proof is
/// normalized and re-verified. The symbolic default falls back to the
/// explicit engine on budget exhaustion when the outcome space is small
/// enough to materialize; "both" mode insists the engines agree.
inline QueryResult answer_query(const Query& query, const std::vector<PreferenceSpec>& specs,
                                EngineSelect engine = EngineSelect::Symbolic,
                                std::size_t node_budget = kDefaultNodeBudget,
                                std::uint64_t node_limit = kDefaultNodeLimit) {
  auto timed = [&](EngineKind kind) {
    auto start = std::chrono::steady_clock::now();
    Answer answer = detail::run_engine(kind, query, specs, node_budget, node_limit);
    auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start);
    detail::check_proof(query, specs, answer);
    return QueryResult{answer.value, std::move(answer.proof), kind, elapsed};
  };

  switch (engine) {
    case EngineSelect::Explicit: return timed(EngineKind::Explicit);
    case EngineSelect::Symbolic:
      try {
        return timed(EngineKind::Symbolic);
      } catch (const NodeBudgetExceeded&) {
        constexpr std::uint64_t kFallbackLimit = std::uint64_t{1} << 16;
        if (specs.at(0).outcome_count() > kFallbackLimit) throw;
        node_limit = std::max(node_limit, kFallbackLimit);
        return timed(EngineKind::Explicit);
      }
    case EngineSelect::Both: {
      QueryResult ex = timed(EngineKind::Explicit);
      QueryResult sym = timed(EngineKind::Symbolic);
      if (ex.answer != sym.answer)
        throw EngineDivergence("engines disagree on " + to_string(query.kind) +
                               ": explicit says " + (ex.answer ? "true" : "false") +
                               ", symbolic says " + (sym.answer ? "true" : "false"));
      return sym;
    }
  }
  throw Error("unreachable engine selection");
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline PreferenceSpec load_spec_file(const std::string& path) {
  PreferenceSpec spec = parse_spec(read_file(path));
  if (spec.name.empty()) spec.name = std::filesystem::path(path).stem().string();
  return spec;
}

inline void write_output(const std::optional<std::string>& out_path, const std::string& text,
                         std::ostream& fallback) {
  if (!out_path) {
    fallback << text;
    return;
  }
  std::ofstream out(*out_path, std::ios::binary);
  if (!out) throw Error("cannot write file '" + *out_path + "'");
  out << text;
}

/// Replays the query on an external checker via the emitted SMV document(s).
inline bool external_answer(const Query& query, const std::vector<PreferenceSpec>& specs,
                            const std::string& checker) {
  auto first_verdict = [&](SmvDocument doc) {
    doc.ctl_specs = emit_ctl(query, specs.at(0));
    if (query.kind == QueryKind::Dominance)
      doc.ctl_specs.resize(1);  // the negation is only for witness extraction
    return run_external(doc, checker).at(0).holds;
  };
  switch (query.kind) {
    case QueryKind::Dominance:
    case QueryKind::Consistency: return first_verdict(emit_smv(specs.at(0)));
    case QueryKind::Subsumption:
      return first_verdict(emit_smv_combined(specs.at(0), specs.at(1)));
    case QueryKind::Equivalence:
      return first_verdict(emit_smv_combined(specs.at(0), specs.at(1))) &&
             first_verdict(emit_smv_combined(specs.at(1), specs.at(0)));
  }
  throw Error("unreachable query kind");
}

inline std::string render_proof(const PreferenceSpec& spec, const Proof& proof) {
  std::ostringstream os;
  switch (proof.kind) {
    case ProofKind::DominancePath: os << "improving flip sequence:\n"; break;
    case ProofKind::InconsistencyCycle: os << "cycle of improving flips:\n"; break;
    case ProofKind::NonSubsumptionFlip:
      os << "counter-flip";
      if (proof.direction) os << " (" << to_string(*proof.direction) << ")";
      os << ":\n";
      break;
  }
  for (const auto& step : proof.steps)
    os << "  " << format_outcome(spec, step.from) << " --[" << step.statement_id << "]--> "
       << format_outcome(spec, step.to) << "\n";
  return os.str();
}

}  // namespace detail

/// Batch mode: one query file in, one result XML out.
/// Exit codes: 0 answered, 2 parse or validation problem, 3 resource limits
/// exhausted, 4 internal or cross-checker divergence.
inline int run_batch(const RunConfig& config, std::ostream& diag = std::cerr) {
  try {
    if (!config.query_path) throw Error("batch mode needs a query file");
    QueryDocument doc = parse_query_document(
        std::string_view(detail::read_file(*config.query_path)));

    std::vector<std::string> spec_paths = config.spec_paths;
    if (spec_paths.empty()) {
      auto base = std::filesystem::path(*config.query_path).parent_path();
      for (const auto& ref : doc.spec_files)
        spec_paths.push_back((base / ref).string());
    }
    std::vector<PreferenceSpec> specs;
    for (const auto& path : spec_paths) specs.push_back(detail::load_spec_file(path));
    std::vector<const PreferenceSpec*> spec_ptrs;
    for (const auto& s : specs) spec_ptrs.push_back(&s);
    Query query = resolve_query(doc, spec_ptrs);

    QueryResult result =
        answer_query(query, specs, config.engine, config.node_budget, config.node_limit);
    detail::write_output(config.out_path, emit_result(result, query, specs[0]), std::cout);

    if (config.checker_path) {
      bool external = detail::external_answer(query, specs, *config.checker_path);
      if (external != result.answer)
        throw EngineDivergence("external checker says " +
                               std::string(external ? "true" : "false") +
                               ", internal engine says " +
                               std::string(result.answer ? "true" : "false"));
    }
    return 0;
  } catch (const TooLarge& e) {
    diag << "error: " << e.what() << "\n";
    return 3;
  } catch (const NodeBudgetExceeded& e) {
    diag << "error: " << e.what()
         << " (try --engine explicit, a larger --node-budget, or an external checker)\n";
    return 3;
  } catch (const EngineDivergence& e) {
    diag << "error: " << e.what() << "\n";
    return 4;
  } catch (const InternalInconsistency& e) {
    diag << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return 2;
  }
}

/// Menu-driven console mode: dominance and consistency against one loaded
/// specification, plus subsumption and equivalence when two are loaded.
inline int run_interactive(const RunConfig& config, std::istream& in = std::cin,
                           std::ostream& out = std::cout) {
  std::vector<PreferenceSpec> specs;
  try {
    if (config.spec_paths.empty() || config.spec_paths.size() > 2)
      throw Error("interactive mode needs one or two --spec files");
    for (const auto& path : config.spec_paths)
      specs.push_back(detail::load_spec_file(path));
    if (specs.size() == 2) check_same_universe(specs[0], specs[1]);
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& s : specs)
    out << "loaded '" << s.name << "': " << s.variables.size() << " variables, "
        << s.statements.size() << " statements (" << to_string(classify_language(s)) << ")\n";

  auto prompt_outcome = [&](const char* label) -> std::optional<Outcome> {
    for (;;) {
      out << label << " outcome (var=value, comma-separated): " << std::flush;
      std::string line;
      if (!std::getline(in, line)) return std::nullopt;
      try {
        return parse_outcome(specs[0], line);
      } catch (const Error& e) {
        out << "  " << e.what() << "; try again\n";
      }
    }
  };

  for (;;) {
    out << "\n[d] dominance  [c] consistency";
    if (specs.size() == 2) out << "  [s] subsumption  [e] equivalence";
    out << "  [q] quit\n> " << std::flush;
    std::string choice;
    if (!std::getline(in, choice)) return 0;
    choice = std::string(detail::trim(choice));
    Query query;
    if (choice == "q" || choice == "quit") return 0;
    if (choice == "d") {
      auto better = prompt_outcome("better");
      if (!better) return 0;
      auto worse = prompt_outcome("worse");
      if (!worse) return 0;
      query.kind = QueryKind::Dominance;
      query.better = *better;
      query.worse = *worse;
    } else if (choice == "c") {
      query.kind = QueryKind::Consistency;
    } else if (choice == "s" && specs.size() == 2) {
      query.kind = QueryKind::Subsumption;
    } else if (choice == "e" && specs.size() == 2) {
      query.kind = QueryKind::Equivalence;
    } else {
      out << "unknown choice '" << choice << "'\n";
      continue;
    }
    try {
      std::vector<PreferenceSpec> used(specs.begin(),
                                       specs.begin() + (query.kind == QueryKind::Subsumption ||
                                                                query.kind == QueryKind::Equivalence
                                                            ? 2
                                                            : 1));
      QueryResult result =
          answer_query(query, used, config.engine, config.node_budget, config.node_limit);
      out << to_string(query.kind) << ": " << (result.answer ? "true" : "false") << "  ["
          << to_string(result.engine) << ", " << result.elapsed.count() << " us]\n";
      if (result.proof) out << detail::render_proof(specs[0], *result.proof);
    } catch (const Error& e) {
      out << "error: " << e.what() << "\n";
    }
  }
}

/// Writes the SMV model (single spec, or the combined model for two specs),
/// with CTL specifications appended when a query file is given.
inline int emit_model_command(const RunConfig& config, std::ostream& diag = std::cerr) {
  try {
    if (config.spec_paths.empty() || config.spec_paths.size() > 2)
      throw Error("SMV emission needs one or two --spec files");
    std::vector<PreferenceSpec> specs;
    for (const auto& path : config.spec_paths)
      specs.push_back(detail::load_spec_file(path));

    SmvDocument doc = specs.size() == 1 ? emit_smv(specs[0])
                                        : emit_smv_combined(specs[0], specs[1]);
    if (config.query_path) {
      QueryDocument qdoc = parse_query_document(
          std::string_view(detail::read_file(*config.query_path)));
      std::vector<const PreferenceSpec*> spec_ptrs;
      for (const auto& s : specs) spec_ptrs.push_back(&s);
      Query query = resolve_query(qdoc, spec_ptrs);
      doc.ctl_specs = emit_ctl(query, specs[0]);
    }
    detail::write_output(config.out_path, doc.full_text(), std::cout);
    return 0;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return 2;
  }
}

/// Writes the explicit engine's edge list for a single spec.
inline int dump_ipg_command(const RunConfig& config, std::ostream& diag = std::cerr) {
  try {
    if (config.spec_paths.size() != 1) throw Error("IPG dump needs exactly one --spec file");
    PreferenceSpec spec = detail::load_spec_file(config.spec_paths[0]);
    InducedPreferenceGraph g = build_ipg(spec, config.node_limit);
    std::ostringstream os;
    dump_ipg(g, os);
    detail::write_output(config.out_path, os.str(), std::cout);
    return 0;
  } catch (const TooLarge& e) {
    diag << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    diag << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cpref
