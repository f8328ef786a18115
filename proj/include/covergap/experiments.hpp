#pragma once

// Batch experiments behind the command line driver: configuration, seeded
// sampling campaigns, tables and their CSV/JSON forms.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "covergap/cover_spectrum.hpp"

namespace covergap {

/// Invalid configuration; the driver maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  int genus = 2;
  double t = 1.0;
  int grid_m = 400;
  std::vector<int> n_list{4, 8, 16};
  int samples_per_n = 200;
  std::uint64_t seed = 1;
  std::vector<int> truncation_r_list{1, 2, 4, 8, 16, 32, 64, 128, 256, 400};
  std::string output_dir = "out";
  std::string format = "csv";
  /// Redraw within a sample's own stream until the hom is transitive.
  bool require_transitive = false;
  std::vector<double> eps_list{0.001, 0.01, 0.1};
  std::vector<double> t_list{0.5, 1.0, 2.0};
  int a_points = 101;
  std::vector<double> r_list{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  int n_max = 4;
  int draws = 100000;
  std::vector<double> radii{0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> support_t_list{0.5, 1.0, 1.5};
  int lanczos_subspace = 40;
  int lanczos_max_restarts = 300;
};

/// Overwrites the fields present in `j`; unknown keys and wrong types throw
/// ConfigError.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

enum class Command { GapSweep, StrongConvergence, TruncationStudy, SelbergTable, SamplerValidate, LatticeCount };

std::string command_name(Command c);
/// Version string recorded in every metadata sidecar.
std::string code_version();
/// Checks the fields the command uses.
void validate(const ExperimentConfig& cfg, Command c);

/// SplitMix64 mixing of (master, a, b): independent per-sample streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

using Cell = std::variant<std::monostate, bool, std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// "%.17g", which round-trips; the same bits always print the same text.
std::string format_double(double x);
/// RFC 4180: CRLF line ends, fields with comma, quote or line break quoted,
/// embedded quotes doubled. Empty cells print as nothing.
std::string to_csv(const Table& t);
/// Array of objects keyed by the header; empty cells become null.
nlohmann::json to_records_json(const Table& t);

struct RunResult {
  Table table;
  nlohmann::json summary = nlohmann::json::object();
  /// Per-row or per-sample wall times; kept out of the table.
  std::vector<double> wall_times;
  /// Set when a numerical failure cut the run short; the table holds the
  /// rows completed before it.
  std::optional<std::string> failure;
};

struct GapRecord {
  int n = 0;
  int index = 0;
  std::uint64_t seed = 0;
  bool transitive = false;
  HomTuple hom;
  SpectralEstimate estimate;
  double wall_time = 0.0;
};

struct GapCampaign {
  std::vector<GapRecord> records;
  double constant_eigenvalue = 0.0;
  double ceiling_tolerance = 0.0;
  std::optional<std::string> failure;
};

/// Samples and estimates for every (n, index); records are in (n, index)
/// order and do not depend on the thread count.
GapCampaign run_gap_campaign(const ExperimentConfig& cfg, int threads);

struct GapSummaryRow {
  int n = 0;
  int samples = 0;
  int transitive = 0;
  /// Over transitive samples; the deficit is 1/4 - lambda_lower_bound.
  double median_deficit = 0.0;
  double mean_deficit = 0.0;
  double fraction_with_lambda_hat = 0.0;
  double median_op_norm = 0.0;
};

std::vector<GapSummaryRow> summarize_gaps(const GapCampaign& c, const ExperimentConfig& cfg);

/// Least-squares slope of y against x.
double linear_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Least-squares slope of log y against log x over the points with y > 0;
/// empty with fewer than two such points.
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExceedanceRow {
  int n = 0;
  double epsilon = 0.0;
  int transitive = 0;
  int exceedances = 0;
  double fraction = 0.0;
  double threshold = 0.0;
};

/// Fraction of transitive samples with op_norm > (1 + eps) h_t(0).
std::vector<ExceedanceRow> exceedance_table(const GapCampaign& c, const ExperimentConfig& cfg);
/// True when the fraction is nonincreasing along n for the given eps.
bool nonincreasing_in_n(const std::vector<ExceedanceRow>& rows, double eps);

RunResult cmd_gap_sweep(const ExperimentConfig& cfg, int threads);
RunResult cmd_strong_convergence(const ExperimentConfig& cfg, int threads);
RunResult cmd_truncation_study(const ExperimentConfig& cfg, int threads);
RunResult cmd_selberg_table(const ExperimentConfig& cfg, int threads);
RunResult cmd_sampler_validate(const ExperimentConfig& cfg, int threads);
RunResult cmd_lattice_count(const ExperimentConfig& cfg, int threads);

RunResult run_command(Command c, const ExperimentConfig& cfg, int threads);

}  // namespace covergap
