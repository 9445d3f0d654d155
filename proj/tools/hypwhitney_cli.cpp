#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hypwhitney/experiment.hpp"

namespace fs = std::filesystem;
using namespace hw;

namespace {

struct Common {
  std::string config, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool negative_controls = false;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("write failed: " + p.string());
}

void print_summary(const Bundle& b) {
  for (const auto& e : b.entries) {
    const char* verdict = e.negative_control ? (e.report.pass ? "UNEXPECTED PASS" : "failed as expected")
                                             : (e.report.pass ? "pass" : "FAIL");
    std::cerr << "  " << e.group << "/" << e.report.name << ": " << verdict << " (" << e.report.failures << " of "
              << e.report.trials << ")\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic-surface Whitney decomposition audits and bilinear extension experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Common o;
  app.add_option("--config", o.config, "JSON experiment config (defaults are used for missing keys)");
  app.add_option("--out", o.out, "output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", o.seed, "master seed (overrides config)");
  app.add_option("--threads", o.threads, "OpenMP threads, 0 = runtime default")->check(CLI::NonNegativeNumber);
  app.add_flag("--negative-controls", o.negative_controls, "append corrupted-input audits that must fail");

  auto* audit = app.add_subcommand("audit", "run every audit and write report.json");
  auto* decomp = app.add_subcommand("decompose", "build the decomposition of a strip pair and audit it");
  bool write_pairs = false;
  decomp->add_flag("--pairs", write_pairs, "also write pairs.jsonl (materializes; narrow the delta range)");
  auto* trans = app.add_subcommand("transversality", "prototype transversality across delta");
  auto* scal = app.add_subcommand("scaling-law", "bilinear ratio sweeps and power-law fits");
  bool field_csv = false;
  scal->add_flag("--field-csv", field_csv, "write the bilinear field of the first curved-regime pair");
  auto* sums = app.add_subcommand("sumsets", "sumset window and cube audits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  o.seed_set = seed_opt->count() > 0;

  ExperimentConfig cfg;
  try {
    if (!o.config.empty()) cfg = load_config(o.config);
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  if (o.threads > 0) set_threads(o.threads);

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    auto finish = [&](Bundle b) {
      if (o.negative_controls) {
        auto nc = run_negative_controls(cfg);
        for (auto& e : nc.entries) b.entries.push_back(std::move(e));
      }
      write_json(dir / "report.json", to_json(b, cfg));
      print_summary(b);
      if (o.negative_controls && !b.negative_controls_ok())
        std::cerr << "warning: a negative control passed; the corresponding audit may be vacuous\n";
      return b.pass() ? 0 : 1;
    };
    if (*audit) {
      code = finish(run_audits(cfg, false));
    } else if (*decomp) {
      if (write_pairs) {
        auto os = open_out(dir / "pairs.jsonl");
        code = finish(run_decompose(cfg, &os));
      } else {
        code = finish(run_decompose(cfg));
      }
    } else if (*trans) {
      code = finish(run_transversality(cfg));
    } else if (*sums) {
      code = finish(run_sumsets(cfg));
    } else if (*scal) {
      const auto r = run_scaling_law(cfg);
      {
        auto os = open_out(dir / "sweep.csv");
        write_sweep_csv(r, os);
      }
      nlohmann::json j = {{"schema", "hypwhitney/1"}, {"command", "scaling-law"}, {"config", to_json(cfg)}};
      j["scaling_law"] = to_json(r);
      if (o.negative_controls) {
        const auto nc = run_negative_controls(cfg);
        j["negative_controls"] = to_json(nc, cfg)["entries"];
      }
      if (field_csv && !cfg.scaling.curved_deltas.empty()) {
        const auto pair = scaling_pair(cfg.scaling.rho, cfg.scaling.curved_deltas.front(), cfg.C0);
        const auto fld = bilinear_field(pair, TestFunction::indicator(first_carrier(pair)),
                                        TestFunction::indicator(second_carrier(pair)), PhaseFamily::base(), cfg.quad);
        auto os = open_out(dir / "field.csv");
        write_field_csv(fld, os);
      }
      write_json(dir / "report.json", j);
      for (const auto& f : r.fits)
        std::cerr << "  " << f.regime << ": exponent " << f.fit.exponent << " (theory " << f.theory << ", r2 "
                  << f.fit.r_squared << ") " << (f.within ? "within band" : "OUTSIDE band") << '\n';
      code = r.pass() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "runtime " << secs << " s\n";
  return code;
}
