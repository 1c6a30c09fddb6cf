#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "htpc/branching.hpp"
#include "htpc/components.hpp"
#include "htpc/sampler.hpp"
#include "htpc/sweep.hpp"
#include "htpc/theory.hpp"
#include "htpc/torus.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitRuntime = 3;

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    a[static_cast<Eigen::Index>(i)] = values[i];
  return a;
}

std::string real17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double resolve_p(const htpc::TorusSpec& spec, std::optional<double> lambda,
                 std::optional<double> c, std::optional<double> p) {
  const int given = lambda.has_value() + c.has_value() + p.has_value();
  if (given != 1)
    throw std::invalid_argument("give exactly one of --lambda, --c, --p");
  if (lambda) return htpc::lambda_to_p(spec, *lambda);
  if (c) return htpc::c_log_to_p(spec, *c);
  if (!(*p >= 0.0 && *p <= 1.0))
    throw std::invalid_argument("--p must lie in [0, 1]");
  return *p;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

int cmd_theory(const std::vector<double>& a_list, double lambda, bool tail,
               const std::string& out_path) {
  const Eigen::VectorXd a = to_vector(a_list);
  const htpc::TheoryReport report = htpc::theory_report(a, lambda);
  std::string json = htpc::report_to_json(report);
  if (tail) {
    const htpc::TailConstants tc = htpc::tail_constants(lambda, a);
    std::string tail_json = ",\n  \"tail\": {\"theta_star\": " +
                            real17(tc.theta_star) +
                            ", \"alpha\": " + real17(tc.alpha) +
                            ", \"C\": " + real17(tc.C) + ", \"mu\": [";
    for (Eigen::Index i = 0; i < tc.mu.size(); ++i)
      tail_json += std::string(i ? ", " : "") + real17(tc.mu[i]);
    tail_json += "]}";
    json.insert(json.rfind("\n}"), tail_json);
  }
  if (out_path.empty())
    std::cout << json;
  else
    write_text_file(out_path, json);
  return kExitOk;
}

int cmd_simulate(const std::vector<double>& a_list, long n,
                 std::optional<double> lambda, std::optional<double> c,
                 std::optional<double> p_opt, std::uint64_t seed,
                 const std::string& dump_path, const std::string& hist_path,
                 int plane_k, int threads) {
  const Eigen::VectorXd a = to_vector(a_list);
  const htpc::TorusSpec spec =
      htpc::make_spec(static_cast<int>(a.size()), a, n);
  const double p = resolve_p(spec, lambda, c, p_opt);
  const htpc::SiteConfig config = htpc::sample(spec, p, seed, threads);
  const htpc::ComponentStats stats = htpc::connected_components(config);

  if (!dump_path.empty()) htpc::dump_config(config, dump_path);
  if (!hist_path.empty()) {
    std::ofstream out(hist_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + hist_path);
    htpc::write_histogram_csv(stats, out);
  }

  std::cout << "{\"d\":" << spec.d << ",\"n\":" << spec.n << ",\"L\":[";
  for (int i = 0; i < spec.d; ++i)
    std::cout << (i ? "," : "") << spec.L[i];
  std::cout << "],\"p\":" << real17(p) << ",\"seed\":" << seed << ",\"census\":"
            << htpc::stats_to_json(stats);
  if (plane_k > 0)
    std::cout << ",\"plane_occupancy_max\":"
              << htpc::plane_occupancy_max(config, plane_k);
  std::cout << "}\n";
  return kExitOk;
}

int cmd_census(const std::string& in_path, const std::string& hist_path) {
  const htpc::SiteConfig config = htpc::load_config(in_path);
  const htpc::ComponentStats stats = htpc::connected_components(config);
  if (!hist_path.empty()) {
    std::ofstream out(hist_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + hist_path);
    htpc::write_histogram_csv(stats, out);
  }
  std::cout << htpc::stats_to_json(stats) << "\n";
  return kExitOk;
}

int cmd_branching(const std::string& law_kind, double lambda,
                  const std::vector<double>& a_list, long n,
                  const std::string& start, long trials, long cap,
                  std::uint64_t seed, const std::string& csv_path,
                  int threads) {
  const Eigen::VectorXd a = to_vector(a_list);
  htpc::OffspringLaw law =
      law_kind == "poisson"
          ? htpc::OffspringLaw::poisson(lambda, a)
          : htpc::OffspringLaw::binomial(lambda, a, n);

  htpc::StartSpec start_spec = htpc::StartSpec::special_start();
  if (start != "special") {
    const int type = static_cast<int>(std::stol(start));
    start_spec = htpc::StartSpec::of_type(type);
  }

  const auto samples =
      htpc::progeny_samples(law, start_spec, trials, cap, seed, threads);
  std::int64_t survived = 0;
  for (const auto& s : samples) survived += s.exceeded;
  const double probability =
      static_cast<double>(survived) / static_cast<double>(trials);
  const double std_error = std::sqrt(
      probability * (1.0 - probability) / static_cast<double>(trials));

  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + csv_path);
    out << "trial,size,exceeded\n";
    for (std::size_t k = 0; k < samples.size(); ++k)
      out << k << ',' << samples[k].size << ',' << (samples[k].exceeded ? 1 : 0)
          << '\n';
    if (!out) throw std::runtime_error("write to " + csv_path + " failed");
  }

  std::cout << "{\"law\":\"" << law_kind << "\",\"lambda\":" << real17(lambda)
            << ",\"start\":\"" << start << "\",\"trials\":" << trials
            << ",\"cap\":" << cap << ",\"seed\":" << seed
            << ",\"survival_estimate\":" << real17(probability)
            << ",\"std_error\":" << real17(std_error)
            << ",\"hit_cap_count\":" << survived << "}\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, htpc::SweepPlan overrides,
              bool have_d, bool have_a, bool have_n, bool have_regime,
              bool have_values, bool have_replicates, bool have_seed,
              bool have_out, bool have_histograms, int threads) {
  htpc::SweepPlan plan;
  if (!config_path.empty()) plan = htpc::parse_plan_file(config_path);
  if (have_d) plan.d = overrides.d;
  if (have_a) {
    plan.a = overrides.a;
    if (!have_d && plan.d == 0) plan.d = static_cast<int>(plan.a.size());
  }
  if (have_n) plan.n_values = overrides.n_values;
  if (have_regime) plan.regime = overrides.regime;
  if (have_values) plan.values = overrides.values;
  if (have_replicates) plan.replicates = overrides.replicates;
  if (have_seed) plan.seed = overrides.seed;
  if (have_out) plan.out_base = overrides.out_base;
  if (have_histograms) plan.histograms = overrides.histograms;
  if (plan.d == 0 && plan.a.size() > 0)
    plan.d = static_cast<int>(plan.a.size());

  const std::vector<htpc::SweepRow> rows = htpc::run_sweep(plan, threads);
  const std::string summary = htpc::compare_report(plan, rows);

  if (plan.out_base.empty()) {
    htpc::write_rows_csv(plan, rows, std::cout);
    std::cerr << summary;
  } else {
    std::ofstream csv(plan.out_base + ".csv", std::ios::binary);
    if (!csv)
      throw std::runtime_error("cannot open " + plan.out_base + ".csv");
    htpc::write_rows_csv(plan, rows, csv);
    if (!csv) throw std::runtime_error("CSV write failed");
    write_text_file(plan.out_base + ".json", summary);
    if (plan.histograms) htpc::write_point_histograms(plan, rows);
  }
  double total_ms = 0.0;
  for (const auto& row : rows) total_ms += row.wall_ms;
  std::cerr << "sweep: " << rows.size() << " rows, " << total_ms
            << " ms simulation time\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Site percolation laboratory for d-dimensional Hamming tori"};
  app.require_subcommand(1);

  // theory
  auto* theory = app.add_subcommand(
      "theory", "Critical point, extinction, thresholds for (a, lambda)");
  std::vector<double> th_a{1.0, 1.0};
  double th_lambda = 1.0;
  bool th_tail = false;
  std::string th_out;
  theory->add_option("--a", th_a, "Aspect ratios a_1..a_d")->delimiter(',');
  theory->add_option("--lambda", th_lambda, "Occupancy scale p = lambda/n");
  theory->add_flag("--tail", th_tail,
                   "Include subcritical tail constants (needs lambda < lambda_c)");
  theory->add_option("--out", th_out, "Write JSON here instead of stdout");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Sample one configuration and run the component census");
  std::vector<double> sim_a{1.0, 1.0};
  long sim_n = 100;
  std::optional<double> sim_lambda, sim_c, sim_p;
  std::uint64_t sim_seed = 0;
  std::string sim_dump, sim_hist;
  int sim_plane_k = 0;
  int sim_threads = 0;
  simulate->add_option("--a", sim_a, "Aspect ratios")->delimiter(',');
  simulate->add_option("--n", sim_n, "Scale parameter");
  simulate->add_option("--lambda", sim_lambda, "p = lambda/n");
  simulate->add_option("--c", sim_c, "p = c log(n)/n");
  simulate->add_option("--p", sim_p, "Occupation probability directly");
  simulate->add_option("--seed", sim_seed, "Sampling seed");
  simulate->add_option("--dump", sim_dump, "Write binary occupancy dump");
  simulate->add_option("--hist", sim_hist, "Write (size,count) CSV");
  simulate->add_option("--plane-max", sim_plane_k,
                       "Also report max plane occupancy fixing k coordinates");
  simulate->add_option("--threads", sim_threads, "Sampling worker threads");

  // census
  auto* census = app.add_subcommand(
      "census", "Component census of a stored occupancy dump");
  std::string census_in, census_hist;
  census->add_option("input", census_in, "HTPC dump path")->required();
  census->add_option("--hist", census_hist, "Write (size,count) CSV");

  // branching
  auto* branching = app.add_subcommand(
      "branching", "Multitype branching-process Monte Carlo");
  std::string br_law = "poisson";
  double br_lambda = 1.0;
  std::vector<double> br_a{1.0, 1.0};
  long br_n = 1000;
  std::string br_start = "special";
  long br_trials = 10000;
  long br_cap = 100000;
  std::uint64_t br_seed = 0;
  std::string br_csv;
  int br_threads = 0;
  branching->add_option("--law", br_law, "poisson or binomial")
      ->check(CLI::IsMember({"poisson", "binomial"}));
  branching->add_option("--lambda", br_lambda, "Intensity");
  branching->add_option("--a", br_a, "Aspect ratios")->delimiter(',');
  branching->add_option("--n", br_n, "Scale for the binomial law");
  branching->add_option("--start", br_start,
                        "Ancestor type (1-based) or 'special' (default: the "
                        "special first step bearing all types)");
  branching->add_option("--trials", br_trials, "Monte Carlo trials");
  branching->add_option("--cap", br_cap, "Total-progeny cap per trial");
  branching->add_option("--seed", br_seed, "Base seed");
  branching->add_option("--csv", br_csv, "Write per-trial progeny CSV");
  branching->add_option("--threads", br_threads, "Worker threads");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Run a parameter sweep from a config file and/or flags");
  std::string sw_config;
  htpc::SweepPlan sw;
  std::vector<double> sw_a;
  std::vector<long> sw_n;
  std::vector<double> sw_values;
  std::string sw_regime;
  long sw_replicates = 0;
  std::uint64_t sw_seed = 0;
  std::string sw_out;
  int sw_d = 0;
  int sw_threads = 0;
  sweep->add_option("--config", sw_config, "Flat key = value plan file");
  auto* opt_d = sweep->add_option("--d", sw_d, "Dimension");
  auto* opt_a = sweep->add_option("--a", sw_a, "Aspect ratios")->delimiter(',');
  auto* opt_n = sweep->add_option("--n", sw_n, "Scale list")->delimiter(',');
  auto* opt_regime =
      sweep->add_option("--regime", sw_regime, "lambda or log")
          ->check(CLI::IsMember({"lambda", "log", "lambda-scale", "log-scale"}));
  auto* opt_values =
      sweep->add_option("--values", sw_values, "lambda or c list")->delimiter(',');
  auto* opt_replicates =
      sweep->add_option("--replicates", sw_replicates, "Replicates per point");
  auto* opt_seed = sweep->add_option("--seed", sw_seed, "Base seed");
  auto* opt_out = sweep->add_option("--out", sw_out,
                                    "Output prefix (.csv and .json appended)");
  bool sw_histograms = false;
  auto* opt_hist = sweep->add_flag(
      "--histograms", sw_histograms,
      "Also write merged per-point size histograms (<out>.histK.csv; large)");
  sweep->add_option("--threads", sw_threads,
                    "Worker threads (HTPC_THREADS also honored)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory->parsed()) return cmd_theory(th_a, th_lambda, th_tail, th_out);
    if (simulate->parsed())
      return cmd_simulate(sim_a, sim_n, sim_lambda, sim_c, sim_p, sim_seed,
                          sim_dump, sim_hist, sim_plane_k, sim_threads);
    if (census->parsed()) return cmd_census(census_in, census_hist);
    if (branching->parsed())
      return cmd_branching(br_law, br_lambda, br_a, br_n, br_start, br_trials,
                           br_cap, br_seed, br_csv, br_threads);
    if (sweep->parsed()) {
      sw.d = sw_d;
      if (!sw_a.empty()) sw.a = to_vector(sw_a);
      sw.n_values = sw_n;
      if (sw_regime == "lambda" || sw_regime == "lambda-scale")
        sw.regime = htpc::SweepPlan::Regime::lambda_scale;
      else if (sw_regime == "log" || sw_regime == "log-scale")
        sw.regime = htpc::SweepPlan::Regime::log_scale;
      sw.values = sw_values;
      sw.replicates = sw_replicates;
      sw.seed = sw_seed;
      sw.out_base = sw_out;
      sw.histograms = sw_histograms;
      return cmd_sweep(sw_config, sw, !opt_d->empty(), !opt_a->empty(),
                       !opt_n->empty(), !opt_regime->empty(),
                       !opt_values->empty(), !opt_replicates->empty(),
                       !opt_seed->empty(), !opt_out->empty(),
                       !opt_hist->empty(), sw_threads);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
