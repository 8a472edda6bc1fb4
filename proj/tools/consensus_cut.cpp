// consensus-cut: command-line front end for the solvers, verifiers,
// reduction compilers and decoders.
//
// Exit codes: 0 success, 1 bad input (flags, files, formats, parameter
// ranges), 2 a mathematically negative result (no solution, not satisfied,
// no fixed point), 3 internal error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ccut/dp.hpp"
#include "ccut/gen.hpp"
#include "ccut/greedy.hpp"
#include "ccut/io.hpp"
#include "ccut/lp.hpp"
#include "ccut/oracle.hpp"
#include "ccut/ppa.hpp"
#include "ccut/ppad.hpp"
#include "ccut/simplex.hpp"

using namespace ccut;

namespace {

constexpr int kOk = 0, kBadInput = 1, kNegative = 2, kInternal = 3;

struct Shared {
  std::string in, out, eps, seed = "0", jobs, csv;
  bool json = false;
};

// Numeric flags arrive as text and are read as exact rationals.
Rational rational_flag(const std::string& text, const char* name) {
  try {
    return parse_rational(text);
  } catch (const ParseError& e) {
    throw ParseError(std::string("--") + name + ": " + e.what());
  }
}

long integer_flag(const std::string& text, const char* name) {
  Rational r = rational_flag(text, name);
  if (r.get_den() != 1 || !r.get_num().fits_slong_p())
    throw ParseError(std::string("--") + name + " must be an integer, got " + text);
  return r.get_num().get_si();
}

int jobs_of(const Shared& sh) {
  std::string text = sh.jobs;
  if (text.empty())
    if (const char* env = std::getenv("CONSENSUS_CUT_JOBS")) text = env;
  if (text.empty()) return 1;
  long j = integer_flag(text, "jobs");
  if (j < 1) throw DomainError("--jobs must be >= 1");
  return static_cast<int>(j);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Instance load_instance(const std::string& path) {
  if (path.empty()) throw ParseError("an instance file is required (--in)");
  return instance_from_json(read_json_file(path));
}

Solution load_solution(const std::string& path, int k) {
  if (path.empty()) throw ParseError("a solution file is required (--solution)");
  return solution_from_json(read_json_file(path), k);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// The artifact goes to --out when given. stdout carries the JSON report with
// --json, otherwise the artifact itself (when there is no --out) or `summary`.
void emit(const Shared& sh, const json& artifact, json report, const std::string& summary) {
  if (!sh.out.empty()) write_text_file(sh.out, dump(artifact));
  if (sh.json) {
    std::cout << dump(report);
  } else if (sh.out.empty()) {
    std::cout << dump(artifact);
  } else {
    std::cout << summary << "\n";
  }
}

// One-row summary table for plotting discrepancies and runtimes.
void write_csv(const Shared& sh, const std::string& command, const Instance& inst, const Solution* s,
               const std::optional<BalanceReport>& rep, double ms) {
  if (sh.csv.empty()) return;
  std::ostringstream o;
  o << "command,n,k,cuts,max_discrepancy,satisfied,runtime_ms\n";
  o << command << "," << inst.n() << "," << inst.k << "," << (s ? std::to_string(s->cuts.size()) : "") << ","
    << (rep ? to_string(rep->max_discrepancy) : "") << "," << (rep ? (rep->satisfied ? "true" : "false") : "") << ","
    << ms << "\n";
  write_text_file(sh.csv, o.str());
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

struct SolveOpts {
  std::string algo = "dp", ell = "1";
  bool emit_rr = false, dump_lp = false;
};

int run_solve(const Shared& sh, const SolveOpts& o) {
  Instance inst = load_instance(sh.in);
  Timer timer;
  std::optional<Solution> sol;
  Rational eps = sh.eps.empty() ? Rational(0) : rational_flag(sh.eps, "eps");
  json report{{"command", "solve"}, {"algo", o.algo}};

  if (o.algo == "dp") {
    if (sh.eps.empty()) throw ParseError("solve --algo dp needs --eps");
    auto r = dp_solve(inst, eps);
    sol = r.solution;
    report["stats"] = {{"states_visited", r.stats.states_visited},
                       {"m", r.stats.m},
                       {"d", r.stats.d},
                       {"M", to_json(r.stats.M)}};
  } else if (o.algo == "greedy-half" || o.algo == "greedy-dblock") {
    if (sh.eps.empty()) eps = frac(1, 2);
    if (o.algo == "greedy-half") {
      auto r = solve_half_traced(inst, /*audit=*/true);
      sol = r.solution;
      report["violations"] = r.violations;
      if (o.emit_rr) {
        report["rr"] = to_json(r);
        if (!sh.json) std::cerr << dump(report["rr"]);
      }
    } else {
      sol = solve_half_dblock(inst);
    }
  } else if (o.algo == "lp") {
    long ell = integer_flag(o.ell, "ell");
    auto r = solve_with_budget(inst, static_cast<int>(ell), jobs_of(sh));
    sol = r.solution;
    report["budget"] = r.budget;
    report["cells"] = r.cells;
    report["subsets_tried"] = r.subsets_tried;
    if (o.dump_lp) {
      std::string text = r.program ? dump_lp(*r.program) : std::string("(no program: midpoint solution or no solution)\n");
      report["lp"] = text;
      if (!sh.json) std::cerr << text;
    }
  } else {
    throw ParseError("unknown --algo '" + o.algo + "' (dp, greedy-half, greedy-dblock, lp)");
  }

  double ms = timer.ms();
  report["runtime_ms"] = ms;
  if (!sol) {
    report["status"] = "no-solution";
    write_csv(sh, "solve-" + o.algo, inst, nullptr, std::nullopt, ms);
    if (sh.json) std::cout << dump(report);
    else std::cerr << "no solution\n";
    return kNegative;
  }
  auto rep = verify(inst, *sol, eps);
  report["status"] = "solved";
  report["solution"] = to_json(*sol, inst.k);
  report["report"] = to_json(rep, inst.k);
  write_csv(sh, "solve-" + o.algo, inst, &*sol, rep, ms);
  emit(sh, to_json(*sol, inst.k), report,
       std::to_string(sol->cuts.size()) + " cuts, max discrepancy " + to_string(rep.max_discrepancy));
  return kOk;
}

int run_verify(const Shared& sh, const std::string& solution_path) {
  Instance inst = load_instance(sh.in);
  Solution s = load_solution(solution_path, inst.k);
  Rational eps = sh.eps.empty() ? Rational(0) : rational_flag(sh.eps, "eps");
  Timer timer;
  check_solution(inst, s);
  auto rep = verify(inst, s, eps);
  write_csv(sh, "verify", inst, &s, rep, timer.ms());
  json report = to_json(rep, inst.k);
  report["eps"] = to_json(eps);
  if (!sh.out.empty()) write_text_file(sh.out, dump(report));
  if (sh.json) std::cout << dump(report);
  else std::cout << (rep.satisfied ? "satisfied" : "not satisfied") << ", max discrepancy "
                 << to_string(rep.max_discrepancy) << "\n";
  return rep.satisfied ? kOk : kNegative;
}

int run_refine(const Shared& sh, const std::string& solution_path) {
  Instance inst = load_instance(sh.in);
  Solution approx = load_solution(solution_path, inst.k);
  if (sh.eps.empty()) throw ParseError("refine needs --eps (the accuracy of the input solution)");
  Rational eps = rational_flag(sh.eps, "eps");
  Timer timer;
  auto r = refine_exact(inst, approx, eps);
  auto rep = verify(inst, r.solution, 0);
  write_csv(sh, "refine", inst, &r.solution, rep, timer.ms());
  json report{{"command", "refine"},
              {"exact", r.exact},
              {"z", to_json(r.z)},
              {"threshold", to_json(r.threshold)},
              {"best_effort", r.best_effort},
              {"pivots", r.pivots},
              {"solution", to_json(r.solution, inst.k)},
              {"report", to_json(rep, inst.k)}};
  emit(sh, to_json(r.solution, inst.k), report,
       (r.exact ? std::string("exact") : "not exact, z = " + to_string(r.z)));
  return r.exact ? kOk : kNegative;
}

// ---------------------------------------------------------------------------

struct TuckerOpts {
  std::string n = "1", circuit, layout, solution;
};

TuckerLabeling tucker_labeling(const TuckerOpts& o) {
  long N = integer_flag(o.n, "n");
  if (N < 1) throw DomainError("--n must be >= 1");
  if (o.circuit.empty()) return demo_labeling(static_cast<int>(N));
  TuckerLabeling lab;
  lab.N = static_cast<int>(N);
  lab.side = 8;
  lab.circuit = BoolCircuit::parse(read_text(o.circuit));
  lab.validate();
  return lab;
}

Rational tucker_eps(const Shared& sh, int N) {
  if (!sh.eps.empty()) return rational_flag(sh.eps, "eps");
  return 1 / (pow2(14) * N * N);
}

int run_compile_tucker(const Shared& sh, const TuckerOpts& o) {
  TuckerLabeling lab = tucker_labeling(o);
  CompiledCH c = compile_tucker(lab, tucker_eps(sh, lab.N));
  json layout = c.layout_json();
  std::string layout_path = o.layout.empty() && !sh.out.empty() ? sh.out + ".layout.json" : o.layout;
  if (!layout_path.empty()) write_text_file(layout_path, dump(layout));
  auto audit = audit_layout(c);
  json report{{"command", "compile-tucker"},
              {"agents", c.instance.n()},
              {"domain_right", to_json(c.instance.domain_right)},
              {"cut_budget", c.instance.cut_budget},
              {"audit_ok", audit.ok()},
              {"layout", layout}};
  emit(sh, to_json(c.instance), report,
       std::to_string(c.instance.n()) + " agents on [0, " + to_string(c.instance.domain_right) + "]");
  return kOk;
}

int run_decode_tucker(const Shared& sh, const TuckerOpts& o) {
  TuckerLabeling lab = tucker_labeling(o);
  CompiledCH c = compile_tucker(lab, tucker_eps(sh, lab.N));
  Solution s = load_solution(o.solution, 2);
  check_solution(c.instance, s);
  auto d = decode_solution(c, s);
  json report = to_json(d);
  if (!sh.out.empty()) write_text_file(sh.out, dump(report));
  if (sh.json) std::cout << dump(report);
  else std::cout << to_string(d.status) << (d.message.empty() ? "" : ": " + d.message) << "\n";
  return d.status == DecodeStatus::Pair ? kOk : kNegative;
}

struct FixpOpts {
  std::string circuit, layout, instance, solution, point;
  bool linear = false;
};

TruncCircuit load_trunc(const FixpOpts& o) {
  if (o.circuit.empty()) throw ParseError("--circuit is required");
  std::string text = read_text(o.circuit);
  return o.linear ? to_truncated(LinFixpCircuit::parse(text)) : TruncCircuit::parse(text);
}

int run_compile_fixp(const Shared& sh, const FixpOpts& o) {
  CompiledFixp c = compile_fixp(load_trunc(o));
  json layout = c.layout_json();
  std::string layout_path = o.layout.empty() && !sh.out.empty() ? sh.out + ".layout.json" : o.layout;
  if (!layout_path.empty()) write_text_file(layout_path, dump(layout));
  json report{{"command", "compile-fixp"}, {"agents", c.instance.n()}, {"layout", layout}};
  json artifact = to_json(c.instance);
  if (!o.point.empty()) {
    // "--place x1,x2": the forward placement at that point instead of the instance
    auto comma = o.point.find(',');
    if (comma == std::string::npos) throw ParseError("--place expects x1,x2");
    Point2 x{rational_flag(o.point.substr(0, comma), "place"), rational_flag(o.point.substr(comma + 1), "place")};
    auto p = forward_place_kdiv(c, x);
    report["placement"] = {{"solution", to_json(p.solution, 3)},
                           {"max_gate_discrepancy", to_json(p.max_gate_discrepancy)},
                           {"projection_residual",
                            {to_json(p.projection_residual[0]), to_json(p.projection_residual[1])}}};
    report["instance"] = artifact;
    artifact = to_json(p.solution, 3);
  }
  emit(sh, artifact, report, std::to_string(c.instance.n()) + " agents");
  return kOk;
}

int run_decode_fixp(const Shared& sh, const FixpOpts& o) {
  Instance inst = load_instance(o.instance.empty() ? sh.in : o.instance);
  if (inst.k != 3) throw ArityError("decode-fixp needs a three-label instance");
  Solution s = load_solution(o.solution, 3);
  check_solution(inst, s);
  auto rep = verify(inst, s, 0);
  json report{{"command", "decode-fixp"}, {"exact", rep.satisfied}};
  int code = kOk;
  try {
    FixedPointDecode d;
    if (!o.circuit.empty()) {
      CompiledFixp c = compile_fixp(load_trunc(o));
      if (!(c.instance == inst)) throw ParseError("the instance was not compiled from --circuit");
      d = decode_fixed_point(c, s);
    } else {
      d = decode_fixed_point(s, nullptr);
    }
    report["status"] = "fixed-point";
    report["decode"] = to_json(d);
  } catch (const DomainError& e) {
    report["status"] = "not-decodable";
    report["message"] = e.what();
    code = kNegative;
  }
  if (!sh.out.empty()) write_text_file(sh.out, dump(report));
  if (sh.json) std::cout << dump(report);
  else if (code == kOk) std::cout << "fixed point " << report["decode"]["x"][0].dump() << ", " << report["decode"]["x"][1].dump() << "\n";
  else std::cout << "not decodable: " << report["message"].get<std::string>() << "\n";
  return code;
}

// ---------------------------------------------------------------------------

struct OracleOpts {
  std::string grid = "8", max_cuts;
  bool all = false, explicit_labels = false;
};

int run_oracle(const Shared& sh, const OracleOpts& o) {
  Instance inst = load_instance(sh.in);
  GridSearchConfig cfg;
  cfg.m = static_cast<int>(integer_flag(o.grid, "grid"));
  cfg.max_cuts = o.max_cuts.empty() ? static_cast<int>(inst.cut_budget) : static_cast<int>(integer_flag(o.max_cuts, "max-cuts"));
  cfg.mode = o.explicit_labels ? LabelMode::ExplicitK : LabelMode::AlternatingEither;
  cfg.jobs = jobs_of(sh);
  Rational eps = sh.eps.empty() ? Rational(0) : rational_flag(sh.eps, "eps");
  Timer timer;
  json report{{"command", "oracle"}, {"grid", cfg.m}, {"max_cuts", cfg.max_cuts}, {"work", brute_force_work(inst, cfg)}};
  std::vector<Solution> found;
  if (o.all) {
    found = brute_force_all(inst, eps, cfg);
  } else if (auto s = brute_force(inst, eps, cfg)) {
    found.push_back(*s);
  }
  report["runtime_ms"] = timer.ms();
  json sols = json::array();
  for (const auto& s : found) sols.push_back(to_json(s, inst.k));
  report["solutions"] = sols;
  if (found.empty()) {
    report["status"] = "no-solution";
    if (sh.json) std::cout << dump(report);
    else std::cerr << "no solution on the grid\n";
    return kNegative;
  }
  report["status"] = "solved";
  json artifact = o.all ? sols : sols[0];
  emit(sh, artifact, report, std::to_string(found.size()) + " solution(s)");
  return kOk;
}

struct GenOpts {
  std::string kind, n = "1", M = "2", d = "2", copies = "1", resolution;
};

int run_gen(const Shared& sh, const GenOpts& o) {
  const auto seed = static_cast<std::uint64_t>(integer_flag(sh.seed, "seed"));
  const long n = integer_flag(o.n, "n");
  if (n < 1) throw DomainError("--n must be >= 1");
  Instance inst;
  if (o.kind == "random-single-block") {
    int res = o.resolution.empty() ? 0 : static_cast<int>(integer_flag(o.resolution, "resolution"));
    inst = random_single_block(static_cast<int>(n), rational_flag(o.M, "M"), seed, res);
  } else if (o.kind == "random-dblock") {
    int res = o.resolution.empty() ? 64 : static_cast<int>(integer_flag(o.resolution, "resolution"));
    inst = random_dblock(static_cast<int>(n), static_cast<int>(integer_flag(o.d, "d")), seed, res);
  } else if (o.kind == "copies") {
    long c = integer_flag(o.copies, "copies");
    inst = disjoint_copies(load_instance(sh.in), static_cast<int>(c));
  } else if (o.kind == "tucker-demo") {
    TuckerOpts t;
    t.n = o.n;
    inst = compile_tucker(tucker_labeling(t), tucker_eps(sh, static_cast<int>(n))).instance;
  } else {
    throw ParseError("unknown --kind '" + o.kind + "' (random-single-block, random-dblock, copies, tucker-demo)");
  }
  json report{{"command", "gen"}, {"kind", o.kind}, {"seed", seed}, {"instance", to_json(inst)}};
  emit(sh, to_json(inst), report, std::to_string(inst.n()) + " agents");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"consensus-cut: exact Consensus-Halving and Consensus-1/k-Division toolkit"};
  app.require_subcommand(1);
  Shared sh;
  auto shared = [&](CLI::App* sub) {
    sub->add_option("--in", sh.in, "input instance (JSON)");
    sub->add_option("--out", sh.out, "output file for the produced artifact");
    sub->add_option("--eps", sh.eps, "accuracy, an exact rational p/q");
    sub->add_option("--seed", sh.seed, "random seed");
    sub->add_option("--jobs", sh.jobs, "worker threads (default: $CONSENSUS_CUT_JOBS or 1)");
    sub->add_option("--csv", sh.csv, "write a summary table row (CSV) to this file");
    sub->add_flag("--json", sh.json, "print a machine-readable JSON report on stdout");
  };

  SolveOpts solve;
  auto* s = app.add_subcommand("solve", "solve an instance");
  shared(s);
  s->add_option("--algo", solve.algo, "dp | greedy-half | greedy-dblock | lp");
  s->add_option("--ell", solve.ell, "lp: use 2n - ell cuts");
  s->add_flag("--emit-rr", solve.emit_rr, "greedy-half: dump the reserved regions per step");
  s->add_flag("--dump-lp", solve.dump_lp, "lp: print the feasibility program");

  std::string solution_path;
  auto* v = app.add_subcommand("verify", "check a solution at accuracy eps");
  shared(v);
  v->add_option("--solution", solution_path, "solution (JSON)")->required();

  auto* r = app.add_subcommand("refine", "turn an eps-approximate solution into an exact one");
  shared(r);
  r->add_option("--solution,--approx", solution_path, "approximate solution (JSON)")->required();

  TuckerOpts tucker;
  auto* ct = app.add_subcommand("compile-tucker", "compile a Tucker labeling into Consensus-Halving");
  shared(ct);
  ct->add_option("--n", tucker.n, "dimension N");
  ct->add_option("--circuit", tucker.circuit, "labeling circuit file (default: the demo labeling)");
  ct->add_option("--layout", tucker.layout, "layout metadata output (default: <out>.layout.json)");

  auto* dt = app.add_subcommand("decode-tucker", "decode a Consensus-Halving solution into a Tucker pair");
  shared(dt);
  dt->add_option("--n", tucker.n, "dimension N");
  dt->add_option("--circuit", tucker.circuit, "labeling circuit file (default: the demo labeling)");
  dt->add_option("--solution", tucker.solution, "solution (JSON)")->required();

  FixpOpts fixp;
  auto* cf = app.add_subcommand("compile-fixp", "compile a truncated circuit into Consensus-1/3-Division");
  shared(cf);
  cf->add_option("--circuit", fixp.circuit, "circuit file")->required();
  cf->add_flag("--linear", fixp.linear, "the circuit uses MAX and exact gates; convert it first");
  cf->add_option("--layout", fixp.layout, "layout metadata output (default: <out>.layout.json)");
  cf->add_option("--place", fixp.point, "emit the forward placement at x1,x2 instead of the instance");

  auto* df = app.add_subcommand("decode-fixp", "read the fixed point out of a Consensus-1/3-Division solution");
  shared(df);
  df->add_option("--instance", fixp.instance, "compiled instance (JSON)");
  df->add_option("--solution", fixp.solution, "solution (JSON)")->required();
  df->add_option("--circuit", fixp.circuit, "circuit file: also check every interval and F(x) = x");
  df->add_flag("--linear", fixp.linear, "the circuit uses MAX and exact gates");

  OracleOpts oracle;
  auto* o = app.add_subcommand("oracle", "brute-force search over grid cuts");
  shared(o);
  o->add_option("--grid", oracle.grid, "grid resolution m");
  o->add_option("--max-cuts", oracle.max_cuts, "cut limit (default: the instance's budget)");
  o->add_flag("--all", oracle.all, "list every solution");
  o->add_flag("--explicit-labels", oracle.explicit_labels, "try every k-labeling instead of alternating ones");

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "generate an instance");
  shared(g);
  g->add_option("--kind", gen.kind, "random-single-block | random-dblock | copies | tucker-demo")->required();
  g->add_option("--n", gen.n, "number of agents (tucker-demo: dimension)");
  g->add_option("--M", gen.M, "random-single-block: block length >= 1/M");
  g->add_option("--d", gen.d, "random-dblock: blocks per agent");
  g->add_option("--copies", gen.copies, "copies: number of extra copies");
  g->add_option("--resolution", gen.resolution, "endpoint grid resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*s) return run_solve(sh, solve);
    if (*v) return run_verify(sh, solution_path);
    if (*r) return run_refine(sh, solution_path);
    if (*ct) return run_compile_tucker(sh, tucker);
    if (*dt) return run_decode_tucker(sh, tucker);
    if (*cf) return run_compile_fixp(sh, fixp);
    if (*df) return run_decode_fixp(sh, fixp);
    if (*o) return run_oracle(sh, oracle);
    if (*g) return run_gen(sh, gen);
  } catch (const WorkLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {  // ParseError, ArityError, DomainError
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
