#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "oucl/axioms.hpp"
#include "oucl/bridge.hpp"
#include "oucl/errors.hpp"
#include "oucl/logic.hpp"
#include "oucl/proof.hpp"
#include "oucl/random.hpp"
#include "oucl/sem.hpp"
#include "oucl/sim.hpp"

using json = nlohmann::json;
using namespace oucl;

namespace {

// exit 2: bad input or a budget ran out
struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Usage("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Usage("cannot write " + path);
  out << text;
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::vector<VariableId> var_list(const std::string& csv) {
  std::vector<VariableId> out;
  std::stringstream ss(csv);
  for (std::string tok; std::getline(ss, tok, ',');) {
    auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(VariableId::parse(tok.substr(b, e - b + 1)));
  }
  return out;
}

const char* tri_name(Tri t) { return t == Tri::True ? "true" : t == Tri::False ? "false" : "unknown"; }

// A formula file holds one formula per line; a query is their conjunction.
Formula read_formulas(const std::string& path) {
  std::vector<Formula> fs;
  for (auto& nf : parse_formula_file(slurp(path))) fs.push_back(std::move(nf.formula));
  return Formula::all_of(fs);
}

// Inline text, or @file for a formula file.
Formula formula_arg(const std::string& s) { return s.rfind('@', 0) == 0 ? read_formulas(s.substr(1)) : parse_formula(s); }

json witness_json(const InfluenceWitness& w) {
  return {{"context", w.context.str()}, {"x1", w.x1}, {"x2", w.x2}};
}

json verdict_json(const Verdict& v) {
  json j{{"verdict", to_string(v.kind)}, {"detail", v.detail}};
  if (v.kind != Verdict::Kind::Pass) {
    j["intervention"] = v.intervention.str();
    if (v.variable) j["variable"] = v.variable->str();
    j["lhs"] = tri_name(v.lhs);
    j["rhs"] = tri_name(v.rhs);
  }
  return j;
}

struct Out {
  bool json_mode = false;
  json j = json::object();
  std::ostringstream text;
  void emit() const {
    if (json_mode)
      std::cout << j.dump(2) << "\n";
    else
      std::cout << text.str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oucl: causal models, simulation programs and the logic of causal conditionals"};
  app.require_subcommand(1);
  bool as_json = false;
  int code = 0;
  Out out;
  std::function<void()> action;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* c = app.add_subcommand(name, help);
    c->add_flag("--json", as_json, "Print a JSON object instead of text");
    return c;
  };

  // parse
  std::string parse_file, parse_kind;
  auto* parse = add("parse", "Read a file and print its canonical form");
  parse->add_option("file", parse_file)->required();
  parse->add_option("--kind", parse_kind, "formula|sem|program|proof|cert (default: from the extension)");
  parse->callback([&] {
    action = [&] {
      std::string kind = parse_kind;
      if (kind.empty()) {
        kind = ends_with(parse_file, ".sem")    ? "sem"
               : ends_with(parse_file, ".siml") ? "program"
               : ends_with(parse_file, ".prf")  ? "proof"
               : ends_with(parse_file, ".cert") ? "cert"
                                                : "formula";
      }
      auto text = slurp(parse_file);
      out.j["kind"] = kind;
      try {
        if (kind == "formula") {
          json arr = json::array();
          for (const auto& nf : parse_formula_file(text)) {
            auto p = print(nf.formula);
            arr.push_back({{"line", nf.line}, {"formula", p}, {"language", in_language_L(nf.formula) ? "L" : "L+"}});
            out.text << p << "\n";
          }
          out.j["formulas"] = arr;
        } else if (kind == "sem") {
          auto s = print_sem(parse_sem(text));
          out.j["canonical"] = s;
          out.text << s;
        } else if (kind == "program") {
          auto p = SimProgram::parse(text);
          out.j["instructions"] = p.size();
          out.j["canonical"] = p.source();
          out.text << p.source();
          if (!p.source().empty() && p.source().back() != '\n') out.text << "\n";
        } else if (kind == "proof") {
          auto s = Derivation::parse(text).str();
          out.j["canonical"] = s;
          out.text << s;
        } else if (kind == "cert") {
          auto s = SatCertificate::parse(text).str();
          out.j["canonical"] = s;
          out.text << s;
        } else {
          throw Usage("unknown kind " + kind);
        }
        out.j["ok"] = true;
      } catch (const ParseError& e) {
        out.j = {{"ok", false}, {"kind", kind}, {"error", e.what()}, {"line", e.line()}, {"column", e.column()}};
        std::cerr << parse_file << ":" << e.what() << "\n";
        code = 1;
      }
    };
  });

  // sat
  std::string sat_file, sat_system = "AX", emit_cert, emit_model;
  int jobs = 1;
  auto* sat = add("sat", "Decide satisfiability of the conjunction of a formula file");
  sat->add_option("file", sat_file)->required();
  sat->add_option("--system", sat_system, "AX, AX+ or AX+T");
  sat->add_option("--emit-cert", emit_cert, "Write the certificate here");
  sat->add_option("--emit-model", emit_model, "Write the witness model here");
  sat->add_option("--jobs", jobs, "Worker threads (1 = serial search)")->check(CLI::PositiveNumber);
  sat->callback([&] {
    action = [&] {
      auto f = read_formulas(sat_file);
      auto sys = parse_system(sat_system);
      SatOptions o;
      o.exec = jobs > 1 ? Exec::Parallel : Exec::Serial;
      o.jobs = jobs;
      auto r = solve_sat(f, sys, o);
      out.j = {{"sat", r.sat}, {"system", to_string(sys)}, {"nodes", r.stats.nodes}, {"leaves", r.stats.leaves}};
      out.text << (r.sat ? "sat" : "unsat") << "\n";
      if (r.sat) {
        out.j["certificate"] = r.certificate->str();
        out.j["model"] = print_sem(*r.witness, true);
        if (!emit_cert.empty()) spit(emit_cert, r.certificate->str());
        if (!emit_model.empty()) spit(emit_model, print_sem(*r.witness, true));
      }
      code = r.sat ? 0 : 1;
    };
  });

  // verify-cert
  std::string vc_formula, vc_cert;
  auto* vc = add("verify-cert", "Check a certificate against a formula file");
  vc->add_option("formula", vc_formula)->required();
  vc->add_option("cert", vc_cert)->required();
  vc->callback([&] {
    action = [&] {
      auto f = read_formulas(vc_formula);
      SatCertificate c;
      try {
        c = SatCertificate::parse(slurp(vc_cert));
      } catch (const ParseError& e) {
        throw Usage(vc_cert + ":" + e.what());
      }
      auto r = verify_certificate(f, c);
      out.j = {{"ok", r.ok}, {"reason", r.reason}, {"steps", r.steps}};
      if (r.variable) out.j["variable"] = r.variable->str();
      if (r.alpha1) out.j["alpha1"] = r.alpha1->str();
      if (r.alpha2) out.j["alpha2"] = r.alpha2->str();
      out.text << (r.ok ? "ok" : "invalid: " + r.reason) << "\n";
      code = r.ok ? 0 : 1;
    };
  });

  // eval
  std::string ev_model, ev_program, ev_formula, ev_scope;
  std::uint64_t budget = 1'000'000;
  auto* ev = add("eval", "Evaluate a formula (text, or @file) in a model or a program");
  auto* ev_m = ev->add_option("--model", ev_model);
  auto* ev_p = ev->add_option("--program", ev_program);
  ev_m->excludes(ev_p);
  ev->add_option("--budget", budget, "Step budget per program run");
  ev->add_option("--scope", ev_scope, "Comma-separated influence scope");
  ev->add_option("formula", ev_formula)->required();
  ev->callback([&] {
    action = [&] {
      auto f = formula_arg(ev_formula);
      EvalOptions o;
      if (!ev_scope.empty()) {
        auto vs = var_list(ev_scope);
        o.scope = std::set<VariableId>(vs.begin(), vs.end());
      }
      Tri v;
      if (!ev_model.empty())
        v = tri(eval(parse_sem(slurp(ev_model)), f, o));
      else if (!ev_program.empty())
        v = eval(SimProgram::parse(slurp(ev_program)), f, budget, o);
      else
        throw Usage("eval needs --model or --program");
      out.j = {{"value", tri_name(v)}, {"formula", print(f)}};
      out.text << tri_name(v) << "\n";
    };
  });

  // run
  std::string run_program, run_intervene, run_watch;
  auto* run_cmd = add("run", "Run a program and print its tape writes");
  run_cmd->add_option("--program", run_program)->required();
  run_cmd->add_option("--intervene", run_intervene, "Intervention such as X=1,Y_2=0");
  run_cmd->add_option("--budget", budget, "Step budget");
  run_cmd->add_option("--watch", run_watch, "Only report these variables");
  run_cmd->callback([&] {
    action = [&] {
      auto p = SimProgram::parse(slurp(run_program));
      auto i = run_intervene.empty() ? Intervention{} : Intervention::parse(run_intervene);
      auto t = run(p, i, budget);
      out.j = {{"halted", t.halted}, {"steps", t.steps}};
      if (run_watch.empty()) {
        json arr = json::array();
        for (const auto& w : t.writes) {
          arr.push_back({{"var", w.var.str()}, {"bit", w.bit ? 1 : 0}, {"step", w.step}});
          out.text << w.step << " " << w.var.str() << "=" << (w.bit ? 1 : 0) << "\n";
        }
        out.j["writes"] = arr;
      } else {
        json obj = json::object();
        for (const auto& v : var_list(run_watch)) {
          auto b = t.value(v);
          obj[v.str()] = b ? json(*b ? 1 : 0) : json(nullptr);
          out.text << v.str() << "=" << (b ? (*b ? "1" : "0") : "blank") << "\n";
        }
        out.j["values"] = obj;
      }
      out.text << (t.halted ? "halted" : "budget exhausted") << " after " << t.steps << " steps\n";
    };
  });

  // compile
  std::string cp_sem, cp_out;
  auto* cp = add("compile", "Translate a model into an equivalent program");
  cp->add_option("--sem", cp_sem)->required();
  cp->add_option("--out", cp_out, "Output path (default: stdout)");
  cp->callback([&] {
    action = [&] {
      auto m = parse_sem(slurp(cp_sem));
      auto text = "# generated by oucl compile from " + cp_sem + "\n" + sem_to_sim_text(m);
      SimProgram::parse(text);  // must read back
      out.j = {{"program", text}, {"variables", m.declared().size()}};
      if (cp_out.empty()) {
        out.text << text;
      } else {
        spit(cp_out, text);
        out.j["out"] = cp_out;
        out.text << "wrote " << cp_out << "\n";
      }
    };
  });

  // extract
  std::string ex_program, ex_vars, ex_time, ex_out;
  auto* ex = add("extract", "Tabulate a model from a program");
  ex->add_option("--program", ex_program)->required();
  ex->add_option("--vars", ex_vars)->required();
  ex->add_option("--time", ex_time, "Time map, e.g. \"X:0, Y_*: i0 + 1\" (default: the program's .time)");
  ex->add_option("--out", ex_out, "Output path (default: stdout)");
  ex->add_option("--budget", budget, "Step budget per run");
  ex->callback([&] {
    action = [&] {
      auto p = SimProgram::parse(slurp(ex_program));
      TimeMapDecl t;
      if (!ex_time.empty())
        t = TimeMapDecl::parse(ex_time);
      else if (p.time_map())
        t = *p.time_map();
      else
        throw Usage("extract needs --time or a program with a .time line");
      auto m = sim_to_sem(p, var_list(ex_vars), t, budget);
      auto text = print_sem(m);
      out.j = {{"model", text}};
      if (ex_out.empty()) {
        out.text << text;
      } else {
        spit(ex_out, text);
        out.j["out"] = ex_out;
        out.text << "wrote " << ex_out << "\n";
      }
    };
  });

  // influence
  std::string in_model, in_x, in_y, in_scope;
  auto* in = add("influence", "Search for a context in which X influences Y");
  in->add_option("--model", in_model)->required();
  in->add_option("X", in_x)->required();
  in->add_option("Y", in_y)->required();
  in->add_option("--scope", in_scope, "Comma-separated scope (default: declared variables)");
  in->callback([&] {
    action = [&] {
      auto m = parse_sem(slurp(in_model));
      auto x = VariableId::parse(in_x), y = VariableId::parse(in_y);
      std::set<VariableId> scope;
      if (in_scope.empty()) {
        scope = default_scope(m, {x, y});
      } else {
        auto vs = var_list(in_scope);
        scope.insert(vs.begin(), vs.end());
      }
      auto w = find_influence(m, x, y, scope);
      out.j = {{"influences", w.has_value()}};
      if (w) {
        out.j["witness"] = witness_json(*w);
        out.text << "yes: under [" << w->context.str() << "] " << x.str() << "=" << w->x1 << " and " << x.str()
                 << "=" << w->x2 << " give different " << y.str() << "\n";
      } else {
        out.text << "no\n";
      }
      code = w ? 0 : 1;
    };
  });

  // mediator
  std::string md_model, md_x, md_y;
  auto* md = add("mediator", "Find a variable mediating X's influence on Y in a local model");
  md->add_option("--model", md_model)->required();
  md->add_option("X", md_x)->required();
  md->add_option("Y", md_y)->required();
  md->callback([&] {
    action = [&] {
      auto m = parse_sem(slurp(md_model));
      auto x = VariableId::parse(md_x), y = VariableId::parse(md_y);
      auto w = find_influence(m, x, y, default_scope(m, {x, y}));
      if (!w) {
        out.j = {{"influences", false}};
        out.text << x.str() << " does not influence " << y.str() << "\n";
        code = 1;
        return;
      }
      try {
        auto r = find_mediator(m, x, y, *w);
        out.j = {{"influences", true},
                 {"mediator", r.mediator.str()},
                 {"source_to_mediator", witness_json(r.source_to_mediator)},
                 {"mediator_to_target", witness_json(r.mediator_to_target)}};
        out.text << r.mediator.str() << "\n";
      } catch (const InvalidWitness& e) {
        throw Usage(e.what());
      }
    };
  });

  // check-proof
  std::string pf_file, pf_system = "AX";
  std::size_t pf_models = 0;
  std::uint64_t seed = 1;
  auto* pf = add("check-proof", "Check a derivation");
  pf->add_option("file", pf_file)->required();
  pf->add_option("--system", pf_system, "AX, AX+ or AX+T");
  pf->add_option("--cross-validate", pf_models, "Also evaluate the last line on this many random models");
  pf->add_option("--seed", seed, "Seed for --cross-validate");
  pf->callback([&] {
    action = [&] {
      Derivation d;
      try {
        d = Derivation::parse(slurp(pf_file));
      } catch (const ParseError& e) {
        throw Usage(pf_file + ":" + e.what());
      }
      auto sys = parse_system(pf_system);
      auto r = check_derivation(d, sys);
      out.j = {{"ok", r.ok}, {"lines", d.lines.size()}, {"system", to_string(sys)}};
      if (!r.ok) {
        out.j["line"] = r.line;
        out.j["reason"] = r.reason;
        out.text << "line " << r.line << ": " << r.reason << "\n";
        code = 1;
        return;
      }
      out.text << "ok (" << d.lines.size() << " lines)\n";
      if (pf_models > 0 && !d.lines.empty()) {
        std::set<VariableId> vs;
        for (const auto& l : d.lines) {
          auto fv = std::visit([](const auto& f) { return free_vars(f); }, l.formula);
          vs.insert(fv.begin(), fv.end());
        }
        std::mt19937_64 rng(seed);
        std::vector<FiniteSem> models;
        for (std::size_t i = 0; i < pf_models; ++i)
          models.push_back(random_sem_over(rng, {vs.begin(), vs.end()}, sys == System::AXPlusT));
        auto v = cross_validate(d, models);
        out.j["cross_validation"] = verdict_json(v);
        out.text << "cross-validation: " << to_string(v.kind) << (v.detail.empty() ? "" : " (" + v.detail + ")")
                 << "\n";
        if (!v.pass()) code = 1;
      }
    };
  });

  // equiv
  std::string eq_sem, eq_program, eq_vars;
  bool eq_all = false;
  auto* eq = add("equiv", "Compare a model with a program on the given variables");
  eq->add_option("--sem", eq_sem)->required();
  eq->add_option("--program", eq_program)->required();
  eq->add_option("--vars", eq_vars, "Variables to compare (default: the model's)");
  eq->add_flag("--all-interventions", eq_all, "Try every intervention on the variables, not just the empty one");
  eq->add_option("--budget", budget, "Step budget per run");
  eq->callback([&] {
    action = [&] {
      auto m = parse_sem(slurp(eq_sem));
      auto p = SimProgram::parse(slurp(eq_program));
      auto vars = eq_vars.empty() ? m.declared() : var_list(eq_vars);
      auto is = eq_all ? all_interventions(vars) : std::vector<Intervention>{Intervention{}};
      auto v = check_equiv(m, p, vars, is, budget);
      out.j = verdict_json(v);
      out.j["interventions"] = is.size();
      out.text << to_string(v.kind);
      if (!v.pass()) out.text << ": " << v.detail;
      out.text << "\n";
      code = v.pass() ? 0 : 1;
    };
  });

  // gen
  std::string gen_what;
  std::size_t gen_vars = 4, gen_count = 1;
  bool gen_local = false;
  std::string gen_schema;
  auto* gen = add("gen", "Print random test inputs: formula, sem, program or axiom");
  gen->add_option("what", gen_what)->required()->check(CLI::IsMember({"formula", "sem", "program", "axiom"}));
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--vars", gen_vars, "Number of variables");
  gen->add_option("--count", gen_count, "How many");
  gen->add_flag("--local", gen_local, "Local models only");
  gen->add_option("--schema", gen_schema, "Axiom schema for `gen axiom`");
  gen->callback([&] {
    action = [&] {
      std::mt19937_64 rng(seed);
      std::vector<VariableId> vars;
      for (std::size_t i = 0; i < gen_vars; ++i) vars.emplace_back("V", std::vector<std::uint32_t>{static_cast<std::uint32_t>(i)});
      json arr = json::array();
      for (std::size_t k = 0; k < gen_count; ++k) {
        std::string s;
        if (gen_what == "formula") {
          RandomFormulaOptions o;
          o.vars = vars;
          s = print(random_formula(rng, o)) + "\n";
        } else if (gen_what == "sem" || gen_what == "program") {
          RandomSemOptions o;
          o.vars = gen_vars;
          o.local = gen_local;
          auto m = random_sem(rng, o);
          s = gen_what == "sem" ? print_sem(m) : sem_to_sim_text(m);
        } else {
          if (gen_schema.empty()) throw Usage("gen axiom needs --schema");
          AxiomGenOptions o;
          o.vars = vars;
          if (o.vars.size() < 3) throw Usage("gen axiom needs --vars 3 or more");
          s = print(random_instance(rng, parse_schema(gen_schema), o)) + "\n";
        }
        arr.push_back(s);
        out.text << s;
      }
      out.j = {{"seed", seed}, {"items", arr}};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  out.json_mode = as_json;
  try {
    action();
  } catch (const std::exception& e) {
    if (as_json) std::cout << json{{"error", e.what()}}.dump(2) << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  out.emit();
  return code;
}
