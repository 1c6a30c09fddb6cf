#include "htpc/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace htpc {

namespace {

void require_d2(const Eigen::Ref<const Eigen::VectorXd>& a, const char* op) {
  if (a.size() < 2)
    throw std::invalid_argument(std::string(op) + " requires d >= 2");
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] > 0.0))
      throw std::invalid_argument(std::string(op) + ": aspect ratios must be positive");
}

// Elementary symmetric sums e_0..e_d by the one-pass recurrence.
std::vector<double> elementary_symmetric(const Eigen::Ref<const Eigen::VectorXd>& a) {
  const int d = static_cast<int>(a.size());
  std::vector<double> e(d + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < d; ++i)
    for (int l = std::min(i + 1, d); l >= 1; --l) e[l] += a[i] * e[l - 1];
  return e;
}

// 1 - sum_{l=2}^d (l-1) lambda^l e_l(a): positive at 0, strictly decreasing
// for lambda > 0, so its sign brackets the critical point.
double signed_poly(double lambda, const std::vector<double>& e) {
  const int d = static_cast<int>(e.size()) - 1;
  double value = 1.0;
  double lam_pow = lambda * lambda;
  for (int l = 2; l <= d; ++l) {
    value -= (l - 1) * lam_pow * e[l];
    lam_pow *= lambda;
  }
  return value;
}

}  // namespace

Eigen::MatrixXd expectation_matrix(double lambda,
                                   const Eigen::Ref<const Eigen::VectorXd>& a) {
  const Eigen::Index d = a.size();
  Eigen::MatrixXd m = lambda * a.transpose().replicate(d, 1);
  m.diagonal().setZero();
  return m;
}

double char_poly_value(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a) {
  const int d = static_cast<int>(a.size());
  const double sign = (d % 2 == 0) ? 1.0 : -1.0;
  return sign * signed_poly(lambda, elementary_symmetric(a));
}

double char_poly_scale(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a) {
  const auto e = elementary_symmetric(a);
  const int d = static_cast<int>(e.size()) - 1;
  double scale = 1.0;
  double lam_pow = lambda * lambda;
  for (int l = 2; l <= d; ++l) {
    scale += (l - 1) * lam_pow * e[l];
    lam_pow *= lambda;
  }
  return scale;
}

double critical_lambda(const Eigen::Ref<const Eigen::VectorXd>& a) {
  require_d2(a, "critical_lambda");
  const auto e = elementary_symmetric(a);

  double hi = 1.0;
  while (signed_poly(hi, e) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("critical_lambda bracket failed");
  }
  double lo = 0.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (signed_poly(mid, e) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

PerronData perron(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a) {
  require_d2(a, "perron");
  if (!(lambda > 0.0)) throw std::invalid_argument("perron requires lambda > 0");
  const Eigen::Index d = a.size();
  const Eigen::MatrixXd m = expectation_matrix(lambda, a);

  // Shift makes the Perron eigenvalue strictly dominant in modulus (for d = 2
  // the spectrum is +/- rho and plain iteration would oscillate).
  const double shift = lambda * a.maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
  double value = 0.0;
  for (int iter = 0; iter < 200000; ++iter) {
    Eigen::VectorXd y = m * x + shift * x;
    const double norm = y.lpNorm<1>();
    y /= norm;
    const double delta = (y - x).lpNorm<1>();
    x.swap(y);
    value = norm - shift;
    if (delta < 1e-15 * static_cast<double>(d)) {
      PerronData out;
      out.mu = x;
      out.rho = (m * x).lpNorm<1>();  // ||M mu||_1 = rho for positive mu
      return out;
    }
  }
  throw std::runtime_error("perron power iteration did not converge");
}

ExtinctionResult extinction(double lambda,
                            const Eigen::Ref<const Eigen::VectorXd>& a) {
  require_d2(a, "extinction");
  const Eigen::Index d = a.size();

  ExtinctionResult out;
  // Subcriticality via the spectral radius; avoids a second root-find.
  if (!(lambda > 0.0) || perron(lambda, a).rho <= 1.0 + 1e-12) {
    out.q_vec = Eigen::VectorXd::Ones(d);
    out.q = 1.0;
    return out;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd fx(d);
  double delta = 1.0;
  const long max_iter = 1000000;
  for (long iter = 0; iter < max_iter; ++iter) {
    // f_i(x) = exp[-lambda (S - a_i (1 - x_i))], S = sum_j a_j (1 - x_j).
    const double s = a.dot(Eigen::VectorXd::Ones(d) - x);
    for (Eigen::Index i = 0; i < d; ++i)
      fx[i] = std::exp(-lambda * (s - a[i] * (1.0 - x[i])));
    delta = (fx - x).lpNorm<Eigen::Infinity>();
    x = fx;
    if (delta < 1e-13) {
      out.q_vec = x;
      out.q = std::pow(x.prod(), 1.0 / static_cast<double>(d - 1));
      return out;
    }
  }
  std::ostringstream msg;
  msg << "extinction fixed point did not converge; last residual " << delta;
  throw std::runtime_error(msg.str());
}

GiantPrediction giant_size_prediction(int d,
                                      const Eigen::Ref<const Eigen::VectorXd>& a,
                                      long n, double lambda) {
  require_d2(a, "giant_size_prediction");
  if (a.size() != d)
    throw std::invalid_argument("aspect vector size does not match d");
  // Same subcriticality test as extinction, so the boundary is consistent:
  // q == 1 means there is no giant to predict.
  const ExtinctionResult ext = extinction(lambda, a);
  if (ext.q >= 1.0)
    throw std::invalid_argument(
        "giant_size_prediction requires lambda > lambda_c; below it the "
        "largest component is O(log n)");
  GiantPrediction out;
  out.normalizer = lambda * a.prod() *
                   std::pow(static_cast<double>(n), static_cast<double>(d - 1));
  out.predicted_size = (1.0 - ext.q) * out.normalizer;
  return out;
}

ConnectivityThresholds connectivity_thresholds(
    const Eigen::Ref<const Eigen::VectorXd>& a) {
  require_d2(a, "connectivity_thresholds");
  const int d = static_cast<int>(a.size());
  std::vector<double> sorted(a.data(), a.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double sum = 0.0, tail_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    sum += sorted[i];
    if (i >= 1) tail_sum += sorted[i];
  }
  ConnectivityThresholds out;
  out.c_conn = (d - 1) / sum;
  out.c_iso_giant = (d - 1) / (2.0 * tail_sum + sorted[0]);
  return out;
}

double log_psi(int i, double theta, double lambda,
               const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& mu) {
  double value = -theta * mu[i];
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (j != i) value += lambda * a[j] * std::expm1(theta * mu[j]);
  return value;
}

double TailConstants::prefactor_for(
    const Eigen::Ref<const Eigen::VectorXd>& z0) const {
  return std::exp(theta_star * z0.dot(mu));
}

TailConstants tail_constants(double lambda,
                             const Eigen::Ref<const Eigen::VectorXd>& a) {
  require_d2(a, "tail_constants");
  const PerronData pd = perron(lambda, a);
  if (!(pd.rho < 1.0 - 1e-12))
    throw std::invalid_argument(
        "tail_constants requires a subcritical process (rho < 1)");

  const int d = static_cast<int>(a.size());
  const auto envelope = [&](double theta) {
    double worst = -1e300;
    for (int i = 0; i < d; ++i)
      worst = std::max(worst, log_psi(i, theta, lambda, a, pd.mu));
    return worst;
  };

  // The envelope is 1 at 0, dips below, then diverges; double until it is
  // back above 1 (log > 0), with a hard cap against exp overflow.
  double theta_hi = 1.0;
  const double theta_cap = 500.0 / pd.mu.maxCoeff();
  while (envelope(theta_hi) < 0.0 && theta_hi < theta_cap) theta_hi *= 2.0;

  // Golden-section on [0, theta_hi]; max of convex functions is unimodal.
  constexpr double kGolden = 0.6180339887498949;
  double lo = 0.0, hi = std::min(theta_hi, theta_cap);
  double m1 = hi - kGolden * (hi - lo);
  double m2 = lo + kGolden * (hi - lo);
  double f1 = envelope(m1), f2 = envelope(m2);
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    if (f1 <= f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - kGolden * (hi - lo);
      f1 = envelope(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + kGolden * (hi - lo);
      f2 = envelope(m2);
    }
  }

  TailConstants out;
  out.mu = pd.mu;
  out.rho = pd.rho;
  out.theta_star = 0.5 * (lo + hi);
  out.alpha = -envelope(out.theta_star);
  out.C = std::exp(out.theta_star * pd.mu.lpNorm<1>());
  return out;
}

TheoryReport theory_report(const Eigen::Ref<const Eigen::VectorXd>& a,
                           double lambda) {
  TheoryReport report;
  report.d = static_cast<int>(a.size());
  report.a = a;
  report.lambda = lambda;
  report.lambda_c = critical_lambda(a);
  report.rho = lambda > 0.0 ? perron(lambda, a).rho : 0.0;
  const ExtinctionResult ext = extinction(lambda, a);
  report.q_vec = ext.q_vec;
  report.q = ext.q;
  report.giant_fraction = 1.0 - ext.q;
  const ConnectivityThresholds thresholds = connectivity_thresholds(a);
  report.conn_threshold = thresholds.c_conn;
  report.iso_giant_threshold = thresholds.c_iso_giant;
  return report;
}

namespace {

std::string real17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string report_to_json(const TheoryReport& report) {
  std::ostringstream out;
  out << "{\n  \"d\": " << report.d << ",\n  \"a\": [";
  for (Eigen::Index i = 0; i < report.a.size(); ++i)
    out << (i ? ", " : "") << real17(report.a[i]);
  out << "],\n  \"lambda\": " << real17(report.lambda)
      << ",\n  \"lambda_c\": " << real17(report.lambda_c)
      << ",\n  \"rho\": " << real17(report.rho) << ",\n  \"q_vec\": [";
  for (Eigen::Index i = 0; i < report.q_vec.size(); ++i)
    out << (i ? ", " : "") << real17(report.q_vec[i]);
  out << "],\n  \"q\": " << real17(report.q)
      << ",\n  \"giant_fraction\": " << real17(report.giant_fraction)
      << ",\n  \"conn_threshold\": " << real17(report.conn_threshold)
      << ",\n  \"iso_giant_threshold\": " << real17(report.iso_giant_threshold)
      << "\n}\n";
  return out.str();
}

}  // namespace htpc
