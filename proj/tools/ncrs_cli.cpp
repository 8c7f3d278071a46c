// ncrs: run, sweep, validate and params subcommands.
// stdout carries machine-readable output only; diagnostics go to stderr.
// Exit codes: 0 success, 1 runtime or check failure, 2 usage or config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncrs/ncrs.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out = "ncrs_out";
  unsigned workers = 1;
  double scale = 1.0;
  std::uint64_t validate_seed = 0;
  std::string json_path;
  int verbosity = 0;
  double epsilon = 0.0, lf = 0.0, k = 0.0, delta_f = 0.0, c = 0.0, big_c = 0.0, rho_r = 0.0;
};

std::optional<std::string> config_path(const Options& o) {
  if (o.config.empty()) return std::nullopt;
  return o.config;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_run(const Options& o) {
  ncrs::RunConfig rc;
  std::uint64_t seed = 0;
  try {
    const json doc = ncrs::load_config(config_path(o), o.overrides);
    json cell = doc;
    const json seeds = cell.at("seeds");
    cell.erase("seeds");
    rc = ncrs::parse_run_config(cell);
    if (o.seed) {
      seed = *o.seed;
    } else {
      if (!seeds.is_array() || seeds.empty()) throw ncrs::ConfigError("config key 'seeds' must be a nonempty list");
      seed = ncrs::detail::get_count(seeds.front(), "seeds");
    }
  } catch (const ncrs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }
  const ncrs::RunResult rr = ncrs::run_one(rc, seed);
  const std::filesystem::path outdir(o.out);
  const auto csv = ncrs::trajectory_path(outdir, rr.summary);
  std::filesystem::create_directories(csv.parent_path());
  ncrs::write_trajectory_csv(csv, rr.trajectory);
  const json summary = ncrs::summary_to_json(rr.summary, true);
  write_json_file(outdir / "summary.json", summary);
  for (const auto& w : rr.summary.warnings) std::cerr << "warning: " << w << '\n';
  if (o.verbosity > 0) std::cerr << "wrote " << csv.string() << '\n';
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

int cmd_sweep(const Options& o) {
  ncrs::SweepPlan plan;
  try {
    plan = ncrs::expand_sweep(ncrs::load_config(config_path(o), o.overrides));
  } catch (const ncrs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  }
  if (o.verbosity > 0) {
    std::cerr << plan.cells.size() << " cells x " << plan.seeds.size() << " seeds\n";
  }
  const auto result = ncrs::run_sweep(plan, o.workers, std::filesystem::path(o.out));
  std::size_t failed = 0;
  for (const auto& r : result.runs) {
    if (!r.summary) {
      ++failed;
      std::cerr << "run failed (cell " << plan.cells[r.cell_index].hash << ", seed " << r.seed << "): " << r.error
                << '\n';
    }
  }
  std::cout << result.aggregate.dump(2) << '\n';
  return failed == 0 ? kOk : kFailure;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", xs[i]);
    if (i) s += ';';
    s += buf;
  }
  return s;
}

int cmd_validate(const Options& o) {
  if (!(o.scale > 0.0)) {
    std::cerr << "--scale must be positive\n";
    return kUsage;
  }
  const auto reports = ncrs::run_validation_suite({o.scale, o.validate_seed});
  std::size_t failed = 0;
  std::cout << "status\tname\testimates\ttheory\tstd_errors\tn\n";
  for (const auto& r : reports) {
    if (!r.pass) ++failed;
    std::cout << (r.pass ? "PASS" : "FAIL") << '\t' << r.name << '\t' << fmt_list(r.estimates) << '\t'
              << fmt_list(r.theory) << '\t' << fmt_list(r.std_errors) << '\t' << r.n_samples << '\n';
  }
  if (!o.json_path.empty()) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(ncrs::report_to_json(r));
    write_json_file(o.json_path, arr);
  }
  std::cerr << reports.size() - failed << "/" << reports.size() << " checks passed\n";
  return failed == 0 ? kOk : kFailure;
}

int cmd_params(const Options& o) {
  ncrs::VoteParams vp;
  try {
    vp = ncrs::vote_params(o.epsilon, o.lf, o.k, o.delta_f, o.c, o.big_c, o.rho_r);
  } catch (const ncrs::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  }
  const json j = {{"epsilon", vp.epsilon}, {"alpha", vp.alpha},   {"T", vp.T},
                  {"N", vp.N},             {"N_times_T", vp.total_comparisons()},
                  {"l_cC", vp.l_cC},       {"N_rate", vp.n_rate}, {"N_gamma", vp.n_gamma}};
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Comparison-based random search on ridge objectives", "ncrs"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", o.verbosity, "More progress messages on stderr");

  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file (comments allowed)");
    sub->add_option("--set", o.overrides, "Override KEY=VALUE with a dotted key; repeatable, last wins")
        ->allow_extra_args(false);
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Execute one run and print its summary JSON");
  add_config_flags(run);
  run->add_option("--seed", o.seed, "Master seed (default: first entry of 'seeds')");

  auto* sweep = app.add_subcommand("sweep", "Expand list-valued keys into a grid and run every cell and seed");
  add_config_flags(sweep);
  sweep->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Run the diagnostic suite; one table row per check");
  validate->add_option("--scale", o.scale, "Multiplier on the default sample sizes")->capture_default_str();
  validate->add_option("--seed", o.validate_seed, "Master seed")->capture_default_str();
  validate->add_option("--json", o.json_path, "Also write the reports as JSON to this path");

  auto* params = app.add_subcommand("params", "Print step size, horizon and vote count for the vote variant");
  params->add_option("--epsilon", o.epsilon, "Target gradient norm, in (0, 1)")->required();
  params->add_option("--lf", o.lf, "Smoothness constant L_f")->required();
  params->add_option("--k", o.k, "Intrinsic dimension")->required();
  params->add_option("--delta-f", o.delta_f, "Initial suboptimality f(theta1) - f*")->required();
  params->add_option("--c", o.c, "Local slope c of rho on [0, r]")->required();
  params->add_option("--C", o.big_c, "Second-moment constant C >= 1")->required();
  params->add_option("--rho-r", o.rho_r, "rho(r), in (0, 1]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*validate) return cmd_validate(o);
    if (*params) return cmd_params(o);
  } catch (const ncrs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
