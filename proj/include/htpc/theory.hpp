#pragma once

#include <Eigen/Core>
#include <string>

namespace htpc {

// Expected-progeny matrix of the approximating multitype branching process:
// entry (i, j) = lambda * a_j off the diagonal, zero on it.
Eigen::MatrixXd expectation_matrix(double lambda,
                                   const Eigen::Ref<const Eigen::VectorXd>& a);

// det(M_lambda - I) evaluated through its closed polynomial form
// (-1)^d [1 - sum_{l=2}^d (l-1) lambda^l e_l(a)], with the elementary
// symmetric sums e_l computed by the one-pass recurrence.
double char_poly_value(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a);

// Natural magnitude of that evaluation (sum of absolute terms); the right
// denominator for relative comparisons against a direct determinant.
double char_poly_scale(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a);

// Unique positive root of det(M_lambda - I) = 0, by bisection (bracket found
// by doubling) to absolute tolerance 1e-12. Requires d >= 2.
double critical_lambda(const Eigen::Ref<const Eigen::VectorXd>& a);

struct PerronData {
  double rho = 0.0;        // spectral radius of M_lambda
  Eigen::VectorXd mu;      // positive right eigenvector, ||mu||_1 = 1
};

// Shifted power iteration on M_lambda to relative tolerance 1e-12.
// Requires d >= 2; throws on non-convergence.
PerronData perron(double lambda, const Eigen::Ref<const Eigen::VectorXd>& a);

struct ExtinctionResult {
  Eigen::VectorXd q_vec;   // per-type extinction probabilities, in (0, 1]
  double q = 1.0;          // (prod q_i)^(1/(d-1))
};

// Minimal fixed point of f_i(x) = exp[-lambda sum_{j != i} a_j (1 - x_j)],
// iterated from x = 0 (monotone, converges to the extinction vector). When
// rho(M_lambda) <= 1 the vector is exactly 1. Requires d >= 2.
ExtinctionResult extinction(double lambda,
                            const Eigen::Ref<const Eigen::VectorXd>& a);

struct GiantPrediction {
  double predicted_size = 0.0;  // (1-q) * lambda * prod(a) * n^(d-1)
  double normalizer = 0.0;      // lambda * prod(a) * n^(d-1), ~ expected occupied
};

// Requires lambda > critical_lambda(a); below it there is no giant.
GiantPrediction giant_size_prediction(int d,
                                      const Eigen::Ref<const Eigen::VectorXd>& a,
                                      long n, double lambda);

struct ConnectivityThresholds {
  double c_conn = 0.0;       // (d-1) / sum(a)
  double c_iso_giant = 0.0;  // (d-1) / (2 sum_{i>=2} a_i + a_1), a sorted desc
};

ConnectivityThresholds connectivity_thresholds(
    const Eigen::Ref<const Eigen::VectorXd>& a);

struct TailConstants {
  Eigen::VectorXd mu;       // Perron right eigenvector, ||mu||_1 = 1
  double rho = 0.0;         // Perron eigenvalue, < 1
  double theta_star = 0.0;  // minimizer of max_i psi_i(theta)
  double alpha = 0.0;       // decay rate: exp(-alpha) = max_i psi_i(theta*)
  double C = 1.0;           // prefactor for a single-ancestor start

  // exp(theta* <z0, mu>) for an explicit initial active vector.
  double prefactor_for(const Eigen::Ref<const Eigen::VectorXd>& z0) const;
};

// log of psi_i(theta) = exp(-theta mu_i) prod_{j != i} exp[lambda a_j
// (exp(theta mu_j) - 1)]; exposed for tests.
double log_psi(int i, double theta, double lambda,
               const Eigen::Ref<const Eigen::VectorXd>& a,
               const Eigen::Ref<const Eigen::VectorXd>& mu);

// Total-progeny tail bound P(T > x) <= C exp(-alpha x) for the subcritical
// process: golden-section minimization of the convex envelope max_i psi_i.
// Requires rho(M_lambda) < 1.
TailConstants tail_constants(double lambda,
                             const Eigen::Ref<const Eigen::VectorXd>& a);

// Everything the `theory` subcommand reports for one (a, lambda).
struct TheoryReport {
  int d = 0;
  Eigen::VectorXd a;
  double lambda = 0.0;
  double lambda_c = 0.0;
  double rho = 0.0;
  Eigen::VectorXd q_vec;
  double q = 1.0;
  double giant_fraction = 0.0;  // 1 - q
  double conn_threshold = 0.0;
  double iso_giant_threshold = 0.0;
};

TheoryReport theory_report(const Eigen::Ref<const Eigen::VectorXd>& a,
                           double lambda);

// JSON with every real printed to 17 significant digits.
std::string report_to_json(const TheoryReport& report);

}  // namespace htpc
