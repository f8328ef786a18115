// Command line driver for the experiments. Writes <out>/<command>.csv (or
// .records.json) and the metadata sidecar <out>/<command>.meta.json.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "covergap/experiments.hpp"

namespace fs = std::filesystem;
using namespace covergap;

namespace {

constexpr int kNumericalFailure = 1;
constexpr int kUsageError = 2;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  bool export_data = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

/// Flag overrides, applied after the config file.
struct Overrides {
  std::vector<std::function<void(ExperimentConfig&)>> setters;

  template <class T>
  void add(CLI::App* app, const std::string& name, T ExperimentConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) opt->delimiter(',');
    setters.push_back([opt, value, field](ExperimentConfig& cfg) {
      if (opt->count() > 0) cfg.*field = *value;
    });
  }
  void add_flag(CLI::App* app, const std::string& name, bool ExperimentConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, help);
    setters.push_back([opt, field](ExperimentConfig& cfg) {
      if (opt->count() > 0) cfg.*field = true;
    });
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

/// Hom tuples and estimates per sample, plus the support set and blocks.
void export_gap_data(const ExperimentConfig& cfg, const fs::path& dir, const std::string& stem, int threads) {
  const GapCampaign c = run_gap_campaign(cfg, threads);
  nlohmann::json samples = nlohmann::json::array();
  for (const GapRecord& r : c.records) samples.push_back({{"hom", to_json(r.hom)}, {"estimate", to_json(r.estimate)}});
  write_text(dir / (stem + ".samples.json"), samples.dump(2) + "\n");
  const FuchsianRealization real = build_bolza_realization();
  const QuadratureGrid grid = build_grid(real, cfg.grid_m);
  const BlockFamily family = assemble_family(real, KernelRadius(cfg.t), grid, threads);
  write_text(dir / (stem + ".support.json"), to_json(family.support, real.presentation).dump(2) + "\n");
  export_blocks(dir / (stem + ".blocks"), family, grid, real.presentation);
}

int run(Command cmd, const Common& common, const Overrides& overrides) {
  ExperimentConfig cfg;
  try {
    if (!common.config.empty()) {
      std::ifstream f(common.config);
      if (!f) throw ConfigError("cannot read config file " + common.config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      apply_json(cfg, j);
    }
    for (const auto& set : overrides.setters) set(cfg);
    if (common.seed_opt->count() > 0) cfg.seed = common.seed;
    if (common.out_opt->count() > 0) cfg.output_dir = common.out;
    validate(cfg, cmd);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  const std::string name = command_name(cmd);
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "usage error: cannot create " << dir << ": " << ec.message() << "\n";
    return kUsageError;
  }

  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  try {
    result = run_command(cmd, cfg, common.threads);
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    result.failure = e.what();
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string table_file = cfg.format == "csv" ? name + ".csv" : name + ".records.json";
  try {
    if (cfg.format == "csv") write_text(dir / table_file, to_csv(result.table));
    else write_text(dir / table_file, to_records_json(result.table).dump(2) + "\n");
    if (common.export_data && !result.failure) export_gap_data(cfg, dir, name, common.threads);

    nlohmann::json meta = {{"command", name},
                           {"status", result.failure ? "numerical_failure" : "ok"},
                           {"error", result.failure ? nlohmann::json(*result.failure) : nlohmann::json(nullptr)},
                           {"partial", result.failure.has_value()},
                           {"code_version", code_version()},
                           {"config", to_json(cfg)},
                           {"threads", common.threads},
                           {"table", table_file},
                           {"rows", result.table.rows.size()},
                           {"wall_time", {{"total_seconds", total}, {"item_seconds", result.wall_times}}},
                           {"summary", result.summary}};
    write_text(dir / (name + ".meta.json"), meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }

  if (result.failure) {
    std::cerr << "numerical failure: " << *result.failure << "\n";
    return kNumericalFailure;
  }
  std::cout << name << ": " << result.table.rows.size() << " rows -> " << (dir / table_file).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap experiments on random covers of the Bolza surface"};
  app.require_subcommand(1);

  struct Sub {
    Command cmd;
    CLI::App* app;
    Common common;
    Overrides overrides;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  auto add = [&](Command cmd, const std::string& help) -> Sub& {
    auto s = std::make_unique<Sub>();
    s->cmd = cmd;
    s->app = app.add_subcommand(command_name(cmd), help);
    s->app->add_option("--config", s->common.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
    s->common.out_opt = s->app->add_option("--out", s->common.out, "Output directory");
    s->common.seed_opt = s->app->add_option("--seed", s->common.seed, "Master seed");
    s->app->add_option("--threads", s->common.threads, "Worker threads")->check(CLI::PositiveNumber);
    s->overrides.add(s->app, "--format", &ExperimentConfig::format, "csv or json");
    subs.push_back(std::move(s));
    return *subs.back();
  };
  auto spectral = [](Sub& s) {
    s.overrides.add(s.app, "--t", &ExperimentConfig::t, "Kernel radius");
    s.overrides.add(s.app, "--grid-m", &ExperimentConfig::grid_m, "Target number of grid nodes");
    s.overrides.add(s.app, "--n-list", &ExperimentConfig::n_list, "Cover degrees, ascending");
    s.overrides.add(s.app, "--samples", &ExperimentConfig::samples_per_n, "Samples per degree");
    s.overrides.add_flag(s.app, "--require-transitive", &ExperimentConfig::require_transitive,
                         "Redraw each sample until the cover is connected");
  };

  Sub& gap = add(Command::GapSweep, "Spectral gap estimates for sampled covers");
  spectral(gap);
  gap.app->add_flag("--export", gap.common.export_data, "Also write hom tuples, estimates, support set and blocks");
  Sub& strong = add(Command::StrongConvergence, "Exceedance fractions of op_norm over (1 + eps) h_t(0)");
  spectral(strong);
  strong.overrides.add(strong.app, "--eps", &ExperimentConfig::eps_list, "Epsilon values");
  Sub& trunc = add(Command::TruncationStudy, "Low-rank truncation bounds against the full operator");
  spectral(trunc);
  trunc.overrides.add(trunc.app, "--r-list", &ExperimentConfig::truncation_r_list, "Truncation ranks, ascending");
  Sub& selberg = add(Command::SelbergTable, "Selberg transform of the ball kernel");
  selberg.overrides.add(selberg.app, "--t-list", &ExperimentConfig::t_list, "Kernel radii");
  selberg.overrides.add(selberg.app, "--a-points", &ExperimentConfig::a_points, "Points on a in [0, 1/2]");
  selberg.overrides.add(selberg.app, "--r-list", &ExperimentConfig::r_list, "Real spectral parameters");
  Sub& sampler = add(Command::SamplerValidate, "Exhaustive check of the hom sampler for small n");
  sampler.overrides.add(sampler.app, "--n-max", &ExperimentConfig::n_max, "Largest n (at most 4)");
  sampler.overrides.add(sampler.app, "--draws", &ExperimentConfig::draws, "Sampler draws per n");
  Sub& lattice = add(Command::LatticeCount, "Orbit point counts and support set sizes");
  lattice.overrides.add(lattice.app, "--radii", &ExperimentConfig::radii, "Lattice radii, ascending");
  lattice.overrides.add(lattice.app, "--support-t", &ExperimentConfig::support_t_list, "Kernel radii for S(t)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }
  for (const auto& s : subs) {
    if (s->app->parsed()) return run(s->cmd, s->common, s->overrides);
  }
  return kUsageError;
}
