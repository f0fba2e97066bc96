// Command-line front end: run, solve, check, fmt, agree, divmod, dims, serve.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "namedcalc/namedcalc.hpp"
#include "namedcalc/server.hpp"

using namespace namedcalc;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::NotFound, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// NAME=VALUE pairs, values in the program's unit vocabulary
std::map<std::string, Quantity> read_overrides(const StepProgram& p, const std::vector<std::string>& sets) {
  std::map<std::string, Quantity> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorCode::SyntaxError, "expected NAME=VALUE, got '" + s + "'");
    out[s.substr(0, eq)] = parse_quantity(s.substr(eq + 1), p.registry());
  }
  return out;
}

UnitExpr read_unit(const std::string& text, const UnitRegistry& reg) {
  if (text == "1") return {};
  return parse_quantity("1 " + text, reg).unit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact named-number step programs"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> sets;
  std::vector<std::string> lets;
  int trials = 100;
  std::uint64_t seed = 1;
  bool expand = false;
  bool quotient = false;

  auto* run_cmd = app.add_subcommand("run", "evaluate with numbers and print the trace");
  run_cmd->add_option("file", file)->required();
  run_cmd->add_option("--set", sets, "override a declaration, e.g. --set 'C=48 cherry'");

  auto* solve_cmd = app.add_subcommand("solve", "evaluate with letters and print the closed form");
  solve_cmd->add_option("file", file)->required();
  solve_cmd->add_option("--let", lets, "declarations to replace by letters (default: all)");
  solve_cmd->add_option("--set", sets, "override a declaration that stays numeric");

  auto* check_cmd = app.add_subcommand("check", "report whether helpful numbers drop out");
  check_cmd->add_option("file", file)->required();

  auto* fmt_cmd = app.add_subcommand("fmt", "print the program in canonical form");
  fmt_cmd->add_option("file", file)->required();

  auto* agree_cmd = app.add_subcommand("agree", "compare both evaluators at random inputs");
  agree_cmd->add_option("file", file)->required();
  agree_cmd->add_option("--trials", trials);
  agree_cmd->add_option("--seed", seed);

  std::string dividend;
  std::string divisor;
  auto* divmod_cmd = app.add_subcommand("divmod", "divide univariate polynomials");
  divmod_cmd->add_option("dividend", dividend)->required();
  divmod_cmd->add_option("divisor", divisor)->required();
  divmod_cmd->add_flag("--quotient", quotient, "also print the quotient");
  divmod_cmd->add_flag("--expand", expand, "print big powers in full");

  std::string target;
  std::vector<std::string> basis;
  std::vector<std::string> units;
  auto* dims_cmd = app.add_subcommand("dims", "find the exponents that give a target dimension");
  dims_cmd->add_option("--target", target)->required();
  dims_cmd->add_option("--basis", basis)->required();
  dims_cmd->add_option("--unit", units, "extra unit or rate declarations");

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string store_dir;
  auto* serve_cmd = app.add_subcommand("serve", "serve worksheets over HTTP");
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--store", store_dir, "worksheet directory (default $NAMEDCALC_STORE or ./worksheets)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      StepProgram p = parse(read_file(file));
      std::cout << render_trace(eval_by_value(p, read_overrides(p, sets)));
    } else if (*solve_cmd) {
      StepProgram p = parse(read_file(file));
      std::set<std::string> symbolize(lets.begin(), lets.end());
      if (symbolize.empty()) {
        for (const auto& d : p.decls()) symbolize.insert(d.name);
      }
      std::cout << render_symbolic(p, eval_by_name(p, symbolize, read_overrides(p, sets)));
    } else if (*check_cmd) {
      StepProgram p = parse(read_file(file));
      auto report = check_helpful_independence(p);
      if (report.empty()) std::cout << "no helpful numbers\n";
      for (const auto& e : report) {
        std::cout << e.name << ": " << to_string(e.verdict)
                  << " (absent from answer: " << (e.absent_from_answer ? "yes" : "no")
                  << ", dimension disjoint from answer: " << (e.dimension_disjoint ? "yes" : "no") << ")\n";
      }
    } else if (*fmt_cmd) {
      std::cout << format_program(parse(read_file(file)));
    } else if (*agree_cmd) {
      AgreementReport r = agreement_check(parse(read_file(file)), trials, seed);
      std::cout << (r.agreed ? "agreed" : "DISAGREED") << " on " << r.trials << " trials (" << r.skipped
                << " infeasible draws resampled)\n";
      if (!r.agreed) {
        std::cout << r.counterexample << "\n";
        return 1;
      }
    } else if (*divmod_cmd) {
      RenderOptions opts{expand};
      DivMod d = poly_divmod(parse_polynomial(dividend), parse_polynomial(divisor));
      if (quotient) std::cout << "quotient: " << render(d.quotient, opts) << "\n";
      std::cout << (quotient ? "remainder: " : "") << render(d.remainder, opts) << "\n";
    } else if (*dims_cmd) {
      std::string decls;
      for (const auto& u : units) decls += u + "\n";
      UnitRegistry reg = parse(decls + "x := 0\n").registry();
      std::vector<Dimension> dims;
      for (const auto& b : basis) dims.push_back(reg.dimension_of(read_unit(b, reg)));
      auto x = solve_dimensions(reg.dimension_of(read_unit(target, reg)), dims);
      for (std::size_t i = 0; i < x.size(); ++i) std::cout << basis[i] << ": " << render_rational(x[i]) << "\n";
    } else if (*serve_cmd) {
      WorksheetStore store(store_dir.empty() ? default_store_dir() : std::filesystem::path(store_dir));
      WorksheetServer server(store);
      std::cerr << "serving " << store.directory() << " on http://" << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << e.describe() << "\n";
    return 1;
  }
  return 0;
}
