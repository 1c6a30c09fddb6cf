#include "htpc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "htpc/components.hpp"
#include "htpc/rng.hpp"
#include "htpc/sampler.hpp"
#include "htpc/theory.hpp"
#include "htpc/torus.hpp"

namespace htpc {

void SweepPlan::validate() const {
  if (d < 1) throw std::invalid_argument("plan: d must be >= 1");
  if (a.size() != d) throw std::invalid_argument("plan: a must have d entries");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0)) throw std::invalid_argument("plan: a entries must be > 0");
  if (n_values.empty()) throw std::invalid_argument("plan: n list is empty");
  for (long n : n_values)
    if (n < 1) throw std::invalid_argument("plan: n must be >= 1");
  if (values.empty()) throw std::invalid_argument("plan: values list is empty");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("plan: values must be finite and >= 0");
  if (replicates < 1) throw std::invalid_argument("plan: replicates must be >= 1");
  // Infeasible p (> 1) is a plan error, caught before any work starts.
  for (long n : n_values) {
    const TorusSpec spec = make_spec(d, a, n);
    for (double v : values) {
      if (regime == Regime::lambda_scale)
        lambda_to_p(spec, v);
      else
        c_log_to_p(spec, v);
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("plan: cannot parse '" + s + "' for key " + key);
  }
}

long parse_long(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("plan: cannot parse '" + s + "' for key " + key);
  }
}

}  // namespace

SweepPlan parse_plan(std::istream& in) {
  SweepPlan plan;
  bool have_d = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("plan: expected 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "d") {
      plan.d = static_cast<int>(parse_long(value, key));
      have_d = true;
    } else if (key == "a") {
      const auto items = split_list(value);
      plan.a.resize(static_cast<Eigen::Index>(items.size()));
      for (std::size_t i = 0; i < items.size(); ++i)
        plan.a[static_cast<Eigen::Index>(i)] = parse_double(items[i], key);
    } else if (key == "n") {
      plan.n_values.clear();
      for (const auto& item : split_list(value))
        plan.n_values.push_back(parse_long(item, key));
    } else if (key == "regime") {
      if (value == "lambda" || value == "lambda-scale")
        plan.regime = SweepPlan::Regime::lambda_scale;
      else if (value == "log" || value == "log-scale")
        plan.regime = SweepPlan::Regime::log_scale;
      else
        throw std::invalid_argument("plan: unknown regime '" + value + "'");
    } else if (key == "values") {
      plan.values.clear();
      for (const auto& item : split_list(value))
        plan.values.push_back(parse_double(item, key));
    } else if (key == "replicates") {
      plan.replicates = parse_long(value, key);
    } else if (key == "seed") {
      plan.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "out") {
      plan.out_base = value;
    } else if (key == "histograms") {
      if (value == "true" || value == "1")
        plan.histograms = true;
      else if (value == "false" || value == "0")
        plan.histograms = false;
      else
        throw std::invalid_argument("plan: histograms must be true or false");
    } else {
      throw std::invalid_argument("plan: unknown key '" + key + "'");
    }
  }
  if (!have_d && plan.a.size() > 0) plan.d = static_cast<int>(plan.a.size());
  return plan;
}

SweepPlan parse_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plan file " + path);
  return parse_plan(in);
}

namespace {

struct PointTheory {
  double p = 0.0;
  double lambda_eff = 0.0;
  double lambda_c = 0.0;
  double giant_fraction_pred = 0.0;
  double c_conn = 0.0;
  double c_iso_giant = 0.0;
  double normalizer = 1.0;
};

PointTheory point_theory(const SweepPlan& plan, const TorusSpec& spec,
                         double value) {
  PointTheory th;
  if (plan.regime == SweepPlan::Regime::lambda_scale) {
    th.p = lambda_to_p(spec, value);
    th.lambda_eff = value;
  } else {
    th.p = c_log_to_p(spec, value);
    th.lambda_eff = th.p * static_cast<double>(spec.n);
  }
  if (plan.d >= 2) {
    th.lambda_c = critical_lambda(plan.a);
    th.giant_fraction_pred = 1.0 - extinction(th.lambda_eff, plan.a).q;
    const ConnectivityThresholds ct = connectivity_thresholds(plan.a);
    th.c_conn = ct.c_conn;
    th.c_iso_giant = ct.c_iso_giant;
  }
  th.normalizer = th.lambda_eff * plan.a.prod() *
                  std::pow(static_cast<double>(spec.n),
                           static_cast<double>(plan.d - 1));
  return th;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepPlan& plan, int threads) {
  plan.validate();

  struct Point {
    long n;
    double value;
    PointTheory theory;
  };
  std::vector<Point> points;
  for (long n : plan.n_values) {
    const TorusSpec spec = make_spec(plan.d, plan.a, n);
    for (double value : plan.values)
      points.push_back({n, value, point_theory(plan, spec, value)});
  }

  const std::int64_t total_rows =
      static_cast<std::int64_t>(points.size()) * plan.replicates;
  std::vector<SweepRow> rows(total_rows);

  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t task = next.fetch_add(1);
      if (task >= total_rows) return;
      const int point_index = static_cast<int>(task / plan.replicates);
      const long replicate = static_cast<long>(task % plan.replicates);
      const Point& pt = points[point_index];

      const auto t0 = std::chrono::steady_clock::now();
      const TorusSpec spec = make_spec(plan.d, plan.a, pt.n);
      const std::uint64_t row_seed = derive_seed(
          plan.seed, static_cast<std::uint64_t>(task));
      // Rows already run in parallel; keep each row single-threaded.
      const SiteConfig config = sample(spec, pt.theory.p, row_seed, 1);
      const ComponentStats stats = connected_components(config);
      const auto t1 = std::chrono::steady_clock::now();

      SweepRow& row = rows[task];
      row.point_index = point_index;
      row.n = pt.n;
      row.value = pt.value;
      row.p = pt.theory.p;
      row.replicate = replicate;
      row.row_seed = row_seed;
      row.occupied_count = stats.occupied_count;
      row.largest = stats.largest;
      row.second_largest = stats.second_largest;
      row.isolated_count = stats.isolated_count;
      row.component_count = stats.component_count;
      row.is_connected = stats.is_connected;
      row.largest_over_log_n =
          static_cast<double>(stats.largest) / std::log(static_cast<double>(pt.n));
      row.largest_normalized =
          pt.theory.normalizer > 0.0
              ? static_cast<double>(stats.largest) / pt.theory.normalizer
              : 0.0;
      row.lambda_c = pt.theory.lambda_c;
      row.giant_fraction_pred = pt.theory.giant_fraction_pred;
      row.c_conn = pt.theory.c_conn;
      row.c_iso_giant = pt.theory.c_iso_giant;
      row.wall_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      if (plan.histograms) row.size_histogram = stats.size_histogram();
    }
  };

  const int nthreads =
      static_cast<int>(std::min<std::int64_t>(effective_threads(threads), total_rows));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_rows_csv(const SweepPlan& plan, const std::vector<SweepRow>& rows,
                    std::ostream& out) {
  std::ostringstream a_field;
  for (Eigen::Index i = 0; i < plan.a.size(); ++i)
    a_field << (i ? "," : "") << format_double(plan.a[i]);
  const std::string quoted_a = "\"" + a_field.str() + "\"";
  const char* regime = plan.regime == SweepPlan::Regime::lambda_scale
                           ? "lambda"
                           : "log";

  out << "d,a,n,regime,value,p,replicate,row_seed,occupied_count,largest,"
         "second_largest,isolated_count,component_count,is_connected,"
         "largest_over_log_n,largest_normalized,lambda_c,giant_fraction_pred,"
         "c_conn,c_iso_giant\n";
  for (const SweepRow& row : rows) {
    out << plan.d << ',' << quoted_a << ',' << row.n << ',' << regime << ','
        << format_double(row.value) << ',' << format_double(row.p) << ','
        << row.replicate << ',' << row.row_seed << ',' << row.occupied_count
        << ',' << row.largest << ',' << row.second_largest << ','
        << row.isolated_count << ',' << row.component_count << ','
        << (row.is_connected ? 1 : 0) << ','
        << format_double(row.largest_over_log_n) << ','
        << format_double(row.largest_normalized) << ','
        << format_double(row.lambda_c) << ','
        << format_double(row.giant_fraction_pred) << ','
        << format_double(row.c_conn) << ',' << format_double(row.c_iso_giant)
        << "\n";
  }
}

std::string compare_report(const SweepPlan& plan,
                           const std::vector<SweepRow>& rows) {
  nlohmann::json summary;
  summary["d"] = plan.d;
  std::vector<double> a_list(plan.a.data(), plan.a.data() + plan.a.size());
  summary["a"] = a_list;
  summary["regime"] =
      plan.regime == SweepPlan::Regime::lambda_scale ? "lambda" : "log";
  summary["replicates"] = plan.replicates;
  summary["seed"] = plan.seed;

  std::map<int, std::vector<const SweepRow*>> by_point;
  for (const SweepRow& row : rows) by_point[row.point_index].push_back(&row);

  double total_wall = 0.0;
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [index, group] : by_point) {
    const std::size_t m = group.size();
    double mean = 0.0, frac_connected = 0.0, frac_isolated = 0.0, wall = 0.0;
    for (const SweepRow* r : group) {
      mean += r->largest_normalized;
      frac_connected += r->is_connected ? 1.0 : 0.0;
      frac_isolated += r->isolated_count > 0 ? 1.0 : 0.0;
      wall += r->wall_ms;
    }
    mean /= static_cast<double>(m);
    frac_connected /= static_cast<double>(m);
    frac_isolated /= static_cast<double>(m);
    double var = 0.0;
    for (const SweepRow* r : group) {
      const double dev = r->largest_normalized - mean;
      var += dev * dev;
    }
    var = m > 1 ? var / static_cast<double>(m - 1) : 0.0;
    const double ci95 = m > 1 ? 1.96 * std::sqrt(var / static_cast<double>(m)) : 0.0;

    const SweepRow* first = group.front();
    nlohmann::json pt;
    pt["n"] = first->n;
    pt["value"] = first->value;
    pt["p"] = first->p;
    pt["runs"] = m;
    pt["mean_normalized_largest"] = mean;
    pt["ci95_halfwidth"] = ci95;
    pt["giant_fraction_pred"] = first->giant_fraction_pred;
    pt["abs_dev_from_pred"] = std::abs(mean - first->giant_fraction_pred);
    pt["fraction_connected"] = frac_connected;
    pt["fraction_with_isolated"] = frac_isolated;
    pt["lambda_c"] = first->lambda_c;
    pt["c_conn"] = first->c_conn;
    pt["c_iso_giant"] = first->c_iso_giant;
    pt["mean_wall_ms"] = wall / static_cast<double>(m);
    total_wall += wall;
    points.push_back(pt);
  }
  summary["points"] = points;
  summary["total_wall_ms"] = total_wall;
  return summary.dump(2) + "\n";
}

void write_point_histograms(const SweepPlan& plan,
                            const std::vector<SweepRow>& rows) {
  if (!plan.histograms)
    throw std::invalid_argument("plan was run without histograms enabled");
  if (plan.out_base.empty())
    throw std::invalid_argument("histograms need an output prefix");

  std::map<int, std::map<std::int64_t, std::int64_t>> merged;
  for (const SweepRow& row : rows)
    for (const auto& [size, count] : row.size_histogram)
      merged[row.point_index][size] += count;

  for (const auto& [point, histogram] : merged) {
    const std::string path =
        plan.out_base + ".hist" + std::to_string(point) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "size,count\n";
    for (const auto& [size, count] : histogram)
      out << size << ',' << count << '\n';
    if (!out) throw std::runtime_error("write to " + path + " failed");
  }
}

}  // namespace htpc
