#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmp/error.hpp"
#include "pmp/pmpcheck.hpp"
#include "pmp/registry.hpp"
#include "pmp/run_config.hpp"

namespace {

void print_summary(const pmp::Report& r) {
  std::cout << r.problem << " / " << r.control << " (" << (r.bolza ? "bolza" : "mayer") << ")\n";
  for (const auto& v : r.verdicts) {
    const char* tag = v.status != pmp::VerdictStatus::Evaluated ? pmp::to_string(v.status)
                                                                : (v.pass ? "PASS" : "FAIL");
    std::cout << "  " << std::left << std::setw(11) << pmp::to_string(v.condition) << std::setw(15) << tag
              << " residual=" << std::setprecision(3) << std::scientific << v.residual
              << " tol=" << v.tolerance << std::defaultfloat << "  " << v.detail << "\n";
  }
  for (const auto& e : r.errors) {
    std::cout << "  error [" << e.stage << "] " << e.kind << ": " << e.message << "\n";
  }
  std::cout << (r.pass ? "PASS" : "FAIL") << "\n";
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw pmp::Error(pmp::ErrorKind::Config, "cannot write '" + path + "'");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of the maximum principle for registry problems"};
  app.require_subcommand(1);

  std::string run_file, report_path, csv_dir, out_path;
  std::optional<unsigned> seed;

  auto* run = app.add_subcommand("run", "verify a candidate described by a run file");
  run->add_option("file", run_file, "run file (JSON)")->required();
  run->add_option("--report", report_path, "write the JSON report here ('-' for stdout)");
  run->add_option("--csv", csv_dir, "write contraction.csv and expansion.csv into this directory");
  run->add_option("--seed", seed, "override the run file seed");

  auto* expand = app.add_subcommand("expand", "needle expansion diagnostic as CSV");
  expand->add_option("file", run_file, "run file (JSON)")->required();
  expand->add_option("--out", out_path, "CSV path (default stdout)");
  expand->add_option("--seed", seed, "override the run file seed");

  auto* picard = app.add_subcommand("picard", "Picard contraction diagnostic as CSV");
  picard->add_option("file", run_file, "run file (JSON)")->required();
  picard->add_option("--out", out_path, "CSV path (default stdout)");
  picard->add_option("--seed", seed, "override the run file seed");

  auto* list = app.add_subcommand("list", "list registry problems and their controls");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& e : pmp::registry()) {
        std::cout << e.name << "\n  " << e.summary << "\n  controls:";
        for (const auto& c : e.controls) std::cout << ' ' << c;
        std::cout << "\n  params:";
        for (const auto& [k, v] : e.defaults) std::cout << ' ' << k << '=' << v;
        std::cout << '\n';
      }
      return 0;
    }

    pmp::RunConfig cfg = pmp::parse_run(run_file);
    if (seed) cfg.seed = *seed;

    if (run->parsed()) {
      const pmp::Report rep = pmp::verify(cfg);
      print_summary(rep);
      if (!report_path.empty()) {
        std::ofstream f;
        open_out(report_path, f) << pmp::report_to_json(rep, cfg).dump(2) << '\n';
      }
      if (!csv_dir.empty()) {
        std::filesystem::create_directories(csv_dir);
        if (rep.diagnostics.contraction) {
          std::ofstream f(std::filesystem::path(csv_dir) / "contraction.csv");
          pmp::write_contraction_csv(f, rep.diagnostics.contraction->trace);
        }
        if (rep.diagnostics.expansion) {
          std::ofstream f(std::filesystem::path(csv_dir) / "expansion.csv");
          pmp::write_expansion_csv(f, *rep.diagnostics.expansion);
        }
      }
      return pmp::exit_code(rep);
    }

    cfg.diagnostics = true;
    const pmp::Report rep = pmp::verify(cfg);
    for (const auto& e : rep.errors) std::cerr << "error [" << e.stage << "] " << e.kind << ": " << e.message << '\n';
    std::ofstream f;
    if (expand->parsed()) {
      if (!rep.diagnostics.expansion) return 2;
      pmp::write_expansion_csv(open_out(out_path, f), *rep.diagnostics.expansion);
    } else {
      if (!rep.diagnostics.contraction) return 2;
      pmp::write_contraction_csv(open_out(out_path, f), rep.diagnostics.contraction->trace);
    }
    return 0;
  } catch (const pmp::Error& e) {
    std::cerr << "error: " << pmp::to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
