#include "covergap/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "covergap/parallel.hpp"

#ifndef COVERGAP_VERSION
#define COVERGAP_VERSION "unknown"
#endif

namespace covergap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  try {
    out = j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

template <class T>
bool strictly_ascending(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](const T& a, const T& b) { return !(a < b); }) == v.end();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

LanczosOptions lanczos_options(const ExperimentConfig& cfg) {
  LanczosOptions o;
  o.subspace = cfg.lanczos_subspace;
  o.max_restarts = cfg.lanczos_max_restarts;
  return o;
}

Cell optional_cell(const std::optional<double>& x) { return x ? Cell{*x} : Cell{}; }

nlohmann::json optional_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); }

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

struct Geometry {
  FuchsianRealization real;
  QuadratureGrid grid;
  BlockFamily family;
};

Geometry build_geometry(const ExperimentConfig& cfg, int threads) {
  Geometry g{build_bolza_realization(), {}, {}};
  g.grid = build_grid(g.real, cfg.grid_m);
  g.family = assemble_family(g.real, KernelRadius(cfg.t), g.grid, threads);
  return g;
}

struct Job {
  int n;
  int index;
};

std::vector<Job> sample_jobs(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (int n : cfg.n_list)
    for (int i = 0; i < cfg.samples_per_n; ++i) jobs.push_back({n, i});
  return jobs;
}

HomTuple draw_hom(const HomSampler& sampler, std::uint64_t seed, bool transitive_only) {
  Rng rng(seed);
  HomTuple h = sampler.sample(rng);
  while (transitive_only && !h.transitive) h = sampler.sample(rng);
  h.seed = seed;
  return h;
}

std::map<int, HomSampler> make_samplers(const ExperimentConfig& cfg) {
  std::map<int, HomSampler> out;
  for (int n : cfg.n_list) out.emplace(n, HomSampler(n, cfg.genus));
  return out;
}

/// First failing job in index order, as "n=.., sample=..: what".
template <class Errors>
std::optional<std::pair<std::size_t, std::string>> first_failure(const std::vector<Job>& jobs, const Errors& errors) {
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (errors[k]) {
      return std::make_pair(k, "n=" + std::to_string(jobs[k].n) + ", sample=" + std::to_string(jobs[k].index) + ": " +
                                   *errors[k]);
    }
  }
  return std::nullopt;
}

nlohmann::json geometry_summary(const ExperimentConfig& cfg, double constant, double slack) {
  const KernelRadius t(cfg.t);
  return {{"h_peak", h_peak(t)},
          {"ball_area", ball_area(t)},
          {"constant_eigenvalue", constant},
          {"constant_relative_error", (constant - ball_area(t)) / ball_area(t)},
          {"ceiling_tolerance", slack}};
}

}  // namespace

void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const char* k = key.c_str();
    if (key == "genus") read_field(value, k, cfg.genus);
    else if (key == "t") read_field(value, k, cfg.t);
    else if (key == "grid_m") read_field(value, k, cfg.grid_m);
    else if (key == "n_list") read_field(value, k, cfg.n_list);
    else if (key == "samples_per_n") read_field(value, k, cfg.samples_per_n);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("config field 'seed' must be a nonnegative integer");
      cfg.seed = value.get<std::uint64_t>();
    }
    else if (key == "truncation_r_list") read_field(value, k, cfg.truncation_r_list);
    else if (key == "output_dir") read_field(value, k, cfg.output_dir);
    else if (key == "format") read_field(value, k, cfg.format);
    else if (key == "require_transitive") read_field(value, k, cfg.require_transitive);
    else if (key == "eps_list") read_field(value, k, cfg.eps_list);
    else if (key == "t_list") read_field(value, k, cfg.t_list);
    else if (key == "a_points") read_field(value, k, cfg.a_points);
    else if (key == "r_list") read_field(value, k, cfg.r_list);
    else if (key == "n_max") read_field(value, k, cfg.n_max);
    else if (key == "draws") read_field(value, k, cfg.draws);
    else if (key == "radii") read_field(value, k, cfg.radii);
    else if (key == "support_t_list") read_field(value, k, cfg.support_t_list);
    else if (key == "lanczos_subspace") read_field(value, k, cfg.lanczos_subspace);
    else if (key == "lanczos_max_restarts") read_field(value, k, cfg.lanczos_max_restarts);
    else throw ConfigError("unknown config field '" + key + "'");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {{"genus", cfg.genus},
          {"t", cfg.t},
          {"grid_m", cfg.grid_m},
          {"n_list", cfg.n_list},
          {"samples_per_n", cfg.samples_per_n},
          {"seed", cfg.seed},
          {"truncation_r_list", cfg.truncation_r_list},
          {"output_dir", cfg.output_dir},
          {"format", cfg.format},
          {"require_transitive", cfg.require_transitive},
          {"eps_list", cfg.eps_list},
          {"t_list", cfg.t_list},
          {"a_points", cfg.a_points},
          {"r_list", cfg.r_list},
          {"n_max", cfg.n_max},
          {"draws", cfg.draws},
          {"radii", cfg.radii},
          {"support_t_list", cfg.support_t_list},
          {"lanczos_subspace", cfg.lanczos_subspace},
          {"lanczos_max_restarts", cfg.lanczos_max_restarts}};
}

std::string command_name(Command c) {
  switch (c) {
    case Command::GapSweep: return "gap-sweep";
    case Command::StrongConvergence: return "strong-convergence";
    case Command::TruncationStudy: return "truncation-study";
    case Command::SelbergTable: return "selberg-table";
    case Command::SamplerValidate: return "sampler-validate";
    case Command::LatticeCount: return "lattice-count";
  }
  return "unknown";
}

std::string code_version() { return COVERGAP_VERSION; }

void validate(const ExperimentConfig& cfg, Command c) {
  require(cfg.format == "csv" || cfg.format == "json", "format must be csv or json");
  require(!cfg.output_dir.empty(), "output_dir is empty");
  const bool spectral =
      c == Command::GapSweep || c == Command::StrongConvergence || c == Command::TruncationStudy;
  if (spectral) {
    require(cfg.genus == 2, "spectral experiments use the genus-2 Bolza surface");
    require(cfg.t >= 0.5 && cfg.t <= 2.0, "t must lie in [0.5, 2]");
    require(cfg.grid_m >= 50, "grid_m must be at least 50");
    require(cfg.grid_m <= 6400, "grid_m above 6400 is not supported");
    require(!cfg.n_list.empty(), "n_list is empty");
    require(strictly_ascending(cfg.n_list), "n_list must be strictly ascending");
    require(cfg.n_list.front() >= 2, "n_list entries must be at least 2");
    require(cfg.n_list.back() <= kDefaultSymmetricCap, "n_list entries above " + std::to_string(kDefaultSymmetricCap) +
                                                             " exceed the character table cap");
    require(cfg.samples_per_n >= 1, "samples_per_n must be positive");
    require(cfg.lanczos_subspace >= 4, "lanczos_subspace must be at least 4");
    require(cfg.lanczos_max_restarts >= 0, "lanczos_max_restarts must be nonnegative");
  }
  if (c == Command::StrongConvergence) {
    require(!cfg.eps_list.empty(), "eps_list is empty");
    for (double e : cfg.eps_list) require(e > 0.0 && std::isfinite(e), "eps_list entries must be positive");
  }
  if (c == Command::TruncationStudy) {
    require(!cfg.truncation_r_list.empty(), "truncation_r_list is empty");
    require(strictly_ascending(cfg.truncation_r_list), "truncation_r_list must be strictly ascending");
    require(cfg.truncation_r_list.front() >= 1, "truncation ranks must be positive");
  }
  if (c == Command::SelbergTable) {
    require(!cfg.t_list.empty(), "t_list is empty");
    for (double t : cfg.t_list) require(t > 0.0 && t <= 20.0, "t_list entries must lie in (0, 20]");
    require(cfg.a_points >= 2, "a_points must be at least 2");
    require(strictly_ascending(cfg.r_list), "r_list must be strictly ascending");
    for (double r : cfg.r_list) require(r >= 0.0 && std::isfinite(r), "r_list entries must be nonnegative");
  }
  if (c == Command::SamplerValidate) {
    require(cfg.genus == 2, "sampler validation enumerates genus 2");
    require(cfg.n_max >= 2 && cfg.n_max <= 4, "n_max must lie in [2, 4] (exhaustive enumeration)");
    require(cfg.draws >= 1, "draws must be positive");
  }
  if (c == Command::LatticeCount) {
    require(!cfg.radii.empty(), "radii is empty");
    require(strictly_ascending(cfg.radii), "radii must be strictly ascending");
    require(cfg.radii.front() >= 0.0 && cfg.radii.back() <= LatticeOptions{}.radius_cap,
            "radii must lie in [0, " + format_double(LatticeOptions{}.radius_cap) + "]");
    require(strictly_ascending(cfg.support_t_list), "support_t_list must be strictly ascending");
    for (double t : cfg.support_t_list) require(t > 0.0 && t <= 2.0, "support_t_list entries must lie in (0, 2]");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ b);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& t) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  auto text = [](const Cell& c) -> std::string {
    return std::visit(
        [](const auto& v) -> std::string {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, std::monostate>) return "";
          else if constexpr (std::is_same_v<V, bool>) return v ? "true" : "false";
          else if constexpr (std::is_same_v<V, double>) return format_double(v);
          else if constexpr (std::is_same_v<V, std::string>) return v;
          else return std::to_string(v);
        },
        c);
  };
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + field(t.header[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw std::logic_error("table row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + field(text(row[i]));
    out += "\r\n";
  }
  return out;
}

nlohmann::json to_records_json(const Table& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      obj[t.header[i]] = std::visit(
          [](const auto& v) -> nlohmann::json {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) return nullptr;
            else return v;
          },
          row[i]);
    }
    out.push_back(std::move(obj));
  }
  return out;
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  return linear_slope(lx, ly);
}

GapCampaign run_gap_campaign(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::GapSweep);
  const Geometry geo = build_geometry(cfg, threads);
  GapCampaign out;
  out.constant_eigenvalue = constant_eigenvalue(geo.family).value;
  out.ceiling_tolerance = std::max(0.0, out.constant_eigenvalue - ball_area(KernelRadius(cfg.t))) + 1e-9;
  const auto terms = make_terms(geo.family);
  const auto samplers = make_samplers(cfg);
  const std::vector<Job> jobs = sample_jobs(cfg);

  std::vector<GapRecord> records(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const Clock::time_point start = Clock::now();
    try {
      GapRecord& r = records[k];
      r.n = jobs[k].n;
      r.index = jobs[k].index;
      r.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r.n), static_cast<std::uint64_t>(r.index));
      r.hom = draw_hom(samplers.at(r.n), r.seed, cfg.require_transitive);
      r.transitive = r.hom.transitive;
      const CoverOperator op(terms, r.hom, Fiber::MeanZero);
      GapOptions opts;
      opts.ceiling_tolerance = out.ceiling_tolerance;
      opts.lanczos_seed = r.seed;
      opts.lanczos = lanczos_options(cfg);
      r.estimate = estimate_gap(op, KernelRadius(cfg.t), opts);
      r.estimate.seed = r.seed;
      r.wall_time = seconds_since(start);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });
  std::size_t done = jobs.size();
  if (const auto f = first_failure(jobs, errors)) {
    done = f->first;
    out.failure = f->second;
  }
  records.resize(done);
  out.records = std::move(records);
  return out;
}

std::vector<GapSummaryRow> summarize_gaps(const GapCampaign& c, const ExperimentConfig& cfg) {
  std::vector<GapSummaryRow> out;
  for (int n : cfg.n_list) {
    GapSummaryRow row;
    row.n = n;
    std::vector<double> deficits;
    std::vector<double> norms;
    int with_hat = 0;
    for (const GapRecord& r : c.records) {
      if (r.n != n) continue;
      ++row.samples;
      if (!r.transitive) continue;
      ++row.transitive;
      deficits.push_back(0.25 - r.estimate.lambda_lower_bound);
      norms.push_back(r.estimate.op_norm);
      if (r.estimate.lambda_hat) ++with_hat;
    }
    if (row.transitive > 0) {
      row.median_deficit = median(deficits);
      row.mean_deficit = std::accumulate(deficits.begin(), deficits.end(), 0.0) / row.transitive;
      row.fraction_with_lambda_hat = static_cast<double>(with_hat) / row.transitive;
      row.median_op_norm = median(norms);
    } else {
      row.median_deficit = row.mean_deficit = row.median_op_norm = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(row);
  }
  return out;
}

std::vector<ExceedanceRow> exceedance_table(const GapCampaign& c, const ExperimentConfig& cfg) {
  const double peak = h_peak(KernelRadius(cfg.t));
  std::vector<ExceedanceRow> out;
  for (double eps : cfg.eps_list) {
    for (int n : cfg.n_list) {
      ExceedanceRow row;
      row.n = n;
      row.epsilon = eps;
      row.threshold = (1.0 + eps) * peak;
      for (const GapRecord& r : c.records) {
        if (r.n != n || !r.transitive) continue;
        ++row.transitive;
        if (r.estimate.op_norm > row.threshold) ++row.exceedances;
      }
      row.fraction = row.transitive > 0 ? static_cast<double>(row.exceedances) / row.transitive : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

bool nonincreasing_in_n(const std::vector<ExceedanceRow>& rows, double eps) {
  std::optional<double> previous;
  for (const ExceedanceRow& r : rows) {
    if (r.epsilon != eps) continue;
    if (previous && r.fraction > *previous) return false;
    previous = r.fraction;
  }
  return true;
}

RunResult cmd_gap_sweep(const ExperimentConfig& cfg, int threads) {
  const GapCampaign c = run_gap_campaign(cfg, threads);
  RunResult out;
  out.failure = c.failure;
  out.table.header = {"n",        "sample",           "seed",           "transitive",      "op_norm",       "lambda_hat",
                      "lambda_lower_bound", "linearized_bound", "param_a", "krylov_residual", "min_eigenvalue"};
  for (const GapRecord& r : c.records) {
    const SpectralEstimate& e = r.estimate;
    out.table.rows.push_back({std::int64_t{r.n}, std::int64_t{r.index}, r.seed, r.transitive, e.op_norm,
                              optional_cell(e.lambda_hat), e.lambda_lower_bound, e.linearized_bound, e.param_a,
                              e.krylov_residual, e.min_eigenvalue});
    out.wall_times.push_back(r.wall_time);
  }

  const auto rows = summarize_gaps(c, cfg);
  nlohmann::json per_n = nlohmann::json::array();
  std::vector<double> ns;
  std::vector<double> medians;
  bool nonincreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const GapSummaryRow& r = rows[i];
    per_n.push_back({{"n", r.n},
                     {"samples", r.samples},
                     {"transitive", r.transitive},
                     {"median_deficit", finite_or_null(r.median_deficit)},
                     {"mean_deficit", finite_or_null(r.mean_deficit)},
                     {"fraction_with_lambda_hat", r.fraction_with_lambda_hat},
                     {"median_op_norm", finite_or_null(r.median_op_norm)}});
    ns.push_back(r.n);
    medians.push_back(r.median_deficit);
    if (i > 0 && r.median_deficit > rows[i - 1].median_deficit) nonincreasing = false;
  }
  const std::optional<double> slope = log_log_slope(ns, medians);
  out.summary = geometry_summary(cfg, c.constant_eigenvalue, c.ceiling_tolerance);
  out.summary["per_n"] = per_n;
  out.summary["median_deficit_nonincreasing"] = nonincreasing;
  out.summary["log_median_deficit_slope"] = optional_json(slope);
  out.summary["beta_hat"] = slope ? nlohmann::json(-*slope) : nlohmann::json(nullptr);
  return out;
}

RunResult cmd_strong_convergence(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::StrongConvergence);
  const GapCampaign c = run_gap_campaign(cfg, threads);
  RunResult out;
  out.failure = c.failure;
  out.table.header = {"n", "epsilon", "transitive_samples", "exceedances", "fraction", "threshold"};
  const auto rows = exceedance_table(c, cfg);
  for (const ExceedanceRow& r : rows) {
    out.table.rows.push_back({std::int64_t{r.n}, r.epsilon, std::int64_t{r.transitive}, std::int64_t{r.exceedances},
                              r.fraction, r.threshold});
  }
  for (const GapRecord& r : c.records) out.wall_times.push_back(r.wall_time);
  const KernelRadius t(cfg.t);
  out.summary = geometry_summary(cfg, c.constant_eigenvalue, c.ceiling_tolerance);
  nlohmann::json trend = nlohmann::json::array();
  for (double eps : cfg.eps_list) {
    trend.push_back({{"epsilon", eps},
                     {"nonincreasing_in_n", nonincreasing_in_n(rows, eps)},
                     {"structural_zero", (1.0 + eps) * h_peak(t) >= ball_area(t) + c.ceiling_tolerance}});
  }
  out.summary["trend"] = trend;
  // Above this eps no op_norm below the ceiling can exceed (1 + eps) h_t(0).
  out.summary["structural_epsilon"] = (ball_area(t) + c.ceiling_tolerance) / h_peak(t) - 1.0;
  return out;
}

RunResult cmd_truncation_study(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::TruncationStudy);
  const Geometry geo = build_geometry(cfg, threads);
  const auto m = static_cast<int>(geo.grid.size());
  const FamilySvd svd = family_svd(geo.family);
  const auto terms = make_terms(geo.family);
  const auto samplers = make_samplers(cfg);
  const std::vector<Job> jobs = sample_jobs(cfg);

  std::vector<std::vector<std::vector<Cell>>> rows(jobs.size());
  std::vector<double> times(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());
  std::vector<char> observed_ok(jobs.size(), 1);
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const Clock::time_point start = Clock::now();
    try {
      const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(jobs[k].n),
                                             static_cast<std::uint64_t>(jobs[k].index));
      const HomTuple h = draw_hom(samplers.at(jobs[k].n), seed, cfg.require_transitive);
      const double full = top_norm(CoverOperator(terms, h, Fiber::MeanZero), seed, lanczos_options(cfg)).value;
      for (int r : cfg.truncation_r_list) {
        const TruncationBound b = truncated_norm_bound(geo.family, svd, h, r, seed, lanczos_options(cfg));
        const double observed = std::abs(b.truncated_norm - full);
        if (observed > b.error_sum + 1e-9 * std::max(1.0, full)) observed_ok[k] = 0;
        rows[k].push_back({std::int64_t{jobs[k].n}, std::int64_t{jobs[k].index}, seed, h.transitive, std::int64_t{r},
                           full, b.truncated_norm, b.error_sum, observed, b.hs_reference, b.certified});
      }
      times[k] = seconds_since(start);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  });

  RunResult out;
  std::size_t done = jobs.size();
  if (const auto f = first_failure(jobs, errors)) {
    done = f->first;
    out.failure = f->second;
  }
  out.table.header = {"n",          "sample",          "seed",     "transitive",   "r",        "full_norm",
                      "truncated_norm", "certified_gap", "observed_gap", "hs_reference", "certified"};
  bool all_ok = true;
  for (std::size_t k = 0; k < done; ++k) {
    for (auto& row : rows[k]) out.table.rows.push_back(std::move(row));
    out.wall_times.push_back(times[k]);
    all_ok = all_ok && observed_ok[k];
  }

  // Slopes over r < m, where the truncation is proper.
  std::vector<double> rs;
  std::vector<double> hs_ref;
  std::vector<double> mean_gap;
  for (std::size_t i = 0; i < cfg.truncation_r_list.size(); ++i) {
    const int r = cfg.truncation_r_list[i];
    if (r >= m || done == 0) continue;
    double gap = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < done; ++k) {
      gap += std::get<double>(out.table.rows[k * cfg.truncation_r_list.size() + i][7]);
      ref = std::get<double>(out.table.rows[k * cfg.truncation_r_list.size() + i][9]);
    }
    rs.push_back(r);
    hs_ref.push_back(ref);
    mean_gap.push_back(gap / static_cast<double>(done));
  }
  out.summary = {{"m", m},
                 {"observed_within_certified", all_ok},
                 {"hs_reference_slope", optional_json(log_log_slope(rs, hs_ref))},
                 {"certified_gap_slope", optional_json(log_log_slope(rs, mean_gap))}};
  return out;
}

RunResult cmd_selberg_table(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::SelbergTable);
  struct Item {
    double t;
    SpectralParameter p;
  };
  std::vector<Item> items;
  for (double t : cfg.t_list) {
    for (int k = 0; k < cfg.a_points; ++k)
      items.push_back({t, SpectralParameter::imaginary(0.5 * k / (cfg.a_points - 1))});
    for (double r : cfg.r_list) items.push_back({t, SpectralParameter::real(r)});
  }
  std::vector<TransformValue> values(items.size());
  std::vector<double> times(items.size());
  parallel_for(items.size(), threads, [&](std::size_t k) {
    const Clock::time_point start = Clock::now();
    values[k] = selberg_h(KernelRadius(items[k].t), items[k].p);
    times[k] = seconds_since(start);
  });

  RunResult out;
  out.wall_times = times;
  out.table.header = {"t", "kind", "param", "value", "error_estimate", "lambda", "plane_density"};
  nlohmann::json per_t = nlohmann::json::array();
  for (double t : cfg.t_list) {
    bool monotone = true;
    std::optional<double> previous;
    double at_half = 0.0;
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (items[k].t != t) continue;
      const SpectralParameter& p = items[k].p;
      const double lambda = lambda_from_param(p);
      out.table.rows.push_back({t, std::string(p.is_imaginary() ? "imaginary" : "real"), p.value(), values[k].value,
                                values[k].quadrature_error_estimate, lambda, plane_density(lambda)});
      if (p.is_imaginary()) {
        if (previous && values[k].value < *previous) monotone = false;
        previous = values[k].value;
        at_half = values[k].value;
      }
    }
    const KernelRadius kt(t);
    per_t.push_back({{"t", t},
                     {"h_peak", h_peak(kt)},
                     {"ball_area", ball_area(kt)},
                     {"value_at_a_half", at_half},
                     {"imaginary_nondecreasing", monotone}});
  }
  out.summary["per_t"] = per_t;
  return out;
}

RunResult cmd_sampler_validate(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::SamplerValidate);
  const int count = cfg.n_max - 1;
  struct Report {
    std::int64_t enumerated = 0;
    BigInt formula;
    double chi2 = 0.0;
    std::int64_t dof = 0;
    double p = 0.0;
    double seconds = 0.0;
  };
  std::vector<Report> reports(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t k) {
    const Clock::time_point start = Clock::now();
    const int n = static_cast<int>(k) + 2;
    std::vector<Permutation> perms;
    std::map<std::vector<int>, std::size_t> rank;
    std::vector<int> images(static_cast<std::size_t>(n));
    std::iota(images.begin(), images.end(), 0);
    do {
      rank.emplace(images, perms.size());
      perms.emplace_back(images);
    } while (std::next_permutation(images.begin(), images.end()));
    const std::size_t f = perms.size();

    std::map<std::size_t, std::size_t> cell;
    for (std::size_t a = 0; a < f; ++a)
      for (std::size_t b = 0; b < f; ++b)
        for (std::size_t c = 0; c < f; ++c)
          for (std::size_t d = 0; d < f; ++d) {
            const Permutation g[] = {perms[a], perms[b], perms[c], perms[d]};
            if (relation_holds(g)) cell.emplace(((a * f + b) * f + c) * f + d, cell.size());
          }
    Report& rep = reports[k];
    rep.enumerated = static_cast<std::int64_t>(cell.size());
    rep.formula = count_homs(n, 2);

    const HomSampler sampler(n, 2);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n), 0));
    std::vector<std::int64_t> hits(cell.size(), 0);
    for (int i = 0; i < cfg.draws; ++i) {
      const HomTuple h = sampler.sample(rng);
      std::size_t key = 0;
      for (const Permutation& g : h.gens) key = key * f + rank.at(g.images());
      ++hits.at(cell.at(key));
    }
    const double expected = static_cast<double>(cfg.draws) / static_cast<double>(cell.size());
    for (std::int64_t o : hits) rep.chi2 += (static_cast<double>(o) - expected) * (static_cast<double>(o) - expected) / expected;
    rep.dof = static_cast<std::int64_t>(cell.size()) - 1;
    rep.p = rep.dof > 0 ? boost::math::gamma_q(0.5 * static_cast<double>(rep.dof), 0.5 * rep.chi2) : 1.0;
    rep.seconds = seconds_since(start);
  });

  RunResult out;
  out.table.header = {"n", "enumerated", "count_homs", "counts_match", "draws", "chi_square", "dof", "p_value", "pass"};
  nlohmann::json per_n = nlohmann::json::array();
  bool all = true;
  for (int k = 0; k < count; ++k) {
    const Report& r = reports[static_cast<std::size_t>(k)];
    const bool match = BigInt(r.enumerated) == r.formula;
    const bool pass = match && r.p > 0.01;
    all = all && pass;
    out.table.rows.push_back({std::int64_t{k + 2}, r.enumerated, r.formula.str(), match, std::int64_t{cfg.draws}, r.chi2,
                              r.dof, r.p, pass});
    out.wall_times.push_back(r.seconds);
    per_n.push_back({{"n", k + 2}, {"counts_match", match}, {"p_value", r.p}, {"pass", pass}});
    if (!match && !out.failure) {
      out.failure = "enumerated " + std::to_string(r.enumerated) + " homs at n=" + std::to_string(k + 2) +
                    ", formula gives " + r.formula.str();
    }
  }
  out.summary = {{"significance", 0.01}, {"all_pass", all}, {"per_n", per_n}};
  return out;
}

RunResult cmd_lattice_count(const ExperimentConfig& cfg, int threads) {
  validate(cfg, Command::LatticeCount);
  const FuchsianRealization real = build_bolza_realization();
  const std::size_t nr = cfg.radii.size();
  const std::size_t total = nr + cfg.support_t_list.size();
  std::vector<std::size_t> counts(total);
  std::vector<double> times(total);
  parallel_for(total, threads, [&](std::size_t k) {
    const Clock::time_point start = Clock::now();
    counts[k] = k < nr ? lattice_points(real, cfg.radii[k]).size()
                       : support_set(real, KernelRadius(cfg.support_t_list[k - nr])).size();
    times[k] = seconds_since(start);
  });

  RunResult out;
  out.wall_times = times;
  out.table.header = {"kind", "parameter", "count"};
  std::vector<double> fit_r;
  std::vector<double> fit_log;
  for (std::size_t k = 0; k < nr; ++k) {
    out.table.rows.push_back({std::string("lattice"), cfg.radii[k], static_cast<std::int64_t>(counts[k])});
    if (cfg.radii[k] >= 4.0 && cfg.radii[k] <= 8.0) {
      fit_r.push_back(cfg.radii[k]);
      fit_log.push_back(std::log(static_cast<double>(counts[k])));
    }
  }
  double c_hat = 0.0;
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t k = nr; k < total; ++k) {
    const double t = cfg.support_t_list[k - nr];
    out.table.rows.push_back({std::string("support"), t, static_cast<std::int64_t>(counts[k])});
    const double ratio = static_cast<double>(counts[k]) / std::exp(2.0 * t);
    c_hat = std::max(c_hat, ratio);
    ratios.push_back({{"t", t}, {"count_over_e2t", ratio}});
  }
  // Counts stay at 1 below the minimal displacement 2 arccosh(1 + sqrt 2) = 3.06.
  std::vector<std::size_t> at_246;
  for (double r : {2.0, 4.0, 6.0}) {
    const auto it = std::find(cfg.radii.begin(), cfg.radii.end(), r);
    if (it != cfg.radii.end()) at_246.push_back(counts[static_cast<std::size_t>(it - cfg.radii.begin())]);
  }
  nlohmann::json strictly_increasing = nullptr;
  if (at_246.size() == 3) strictly_increasing = at_246[0] < at_246[1] && at_246[1] < at_246[2];
  bool nondecreasing = true;
  for (std::size_t k = 1; k < nr; ++k) nondecreasing = nondecreasing && counts[k] >= counts[k - 1];
  out.summary = {{"growth_exponent", fit_r.size() >= 2 ? nlohmann::json(linear_slope(fit_r, fit_log)) : nlohmann::json(nullptr)},
                 {"growth_fit_radii", fit_r},
                 {"strictly_increasing_at_2_4_6", strictly_increasing},
                 {"nondecreasing", nondecreasing},
                 {"c_hat", c_hat},
                 {"support_ratios", ratios}};
  return out;
}

RunResult run_command(Command c, const ExperimentConfig& cfg, int threads) {
  switch (c) {
    case Command::GapSweep: return cmd_gap_sweep(cfg, threads);
    case Command::StrongConvergence: return cmd_strong_convergence(cfg, threads);
    case Command::TruncationStudy: return cmd_truncation_study(cfg, threads);
    case Command::SelbergTable: return cmd_selberg_table(cfg, threads);
    case Command::SamplerValidate: return cmd_sampler_validate(cfg, threads);
    case Command::LatticeCount: return cmd_lattice_count(cfg, threads);
  }
  throw std::logic_error("unknown command");
}

}  // namespace covergap
