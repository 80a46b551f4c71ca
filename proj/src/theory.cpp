#include "csm/theory.hpp"

#include <cmath>

#include "csm/error.hpp"

namespace csm::theory {

namespace {

void require_gap(double delta_min) {
  if (!(delta_min > 0.0) || !std::isfinite(delta_min)) {
    fail(ErrorCategory::Domain, "reward gap must be positive and finite");
  }
}

void require_probability(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(ErrorCategory::Domain, "epsilon must lie in (0,1)");
}

double convergence_horizon(double K, double N, double epsilon, double delta, double t_min,
                           double required_decreases) {
  require_probability(epsilon);
  const double tail = 6.0 * std::pow(t_min, -4.0);
  if (!(delta > tail)) fail(ErrorCategory::Validity, "delta must exceed 6 t_min^-4");
  const double p = decrease_probability(N, epsilon, t_min);
  if (!(p > 0.0)) fail(ErrorCategory::Validity, "per-super-frame decrease probability is not positive");
  const double frame = 2.0 * K;
  return t_min + (frame / p) * (std::log(1.0 / (delta - tail)) / (4.0 * p) + required_decreases);
}

}  // namespace

double t_min_bound(double K, double delta_min) {
  require_gap(delta_min);
  const double root = 32.0 * K / (delta_min * delta_min);
  return root * root;
}

double s_min_bound(double horizon, double delta_min) {
  require_gap(delta_min);
  if (!(horizon >= 2.0)) fail(ErrorCategory::Domain, "horizon must be at least 2");
  return 8.0 * std::log(horizon) / (delta_min * delta_min);
}

double decrease_probability(double N, double epsilon, double t_min) {
  return epsilon * std::pow(1.0 - epsilon, N - 1.0) - 2.0 * std::pow(t_min, -4.0);
}

double T_delta_static(double K, double N, double epsilon, double delta, double t_min) {
  return convergence_horizon(K, N, epsilon, delta, t_min, 2.0 * N * (K - 1.0));
}

double T_delta_departure(double K, double N, double epsilon, double delta, double t_min) {
  return convergence_horizon(K, N, epsilon, delta, t_min, N * (N - 1.0));
}

ArrivalBound T_arrival_bound(double K, double N, double epsilon, double delta, double delta_min) {
  require_gap(delta_min);
  require_probability(epsilon);
  if (N >= K) fail(ErrorCategory::Domain, "an arriving user needs a vacant channel (N < K)");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCategory::Domain, "delta must lie in (0,1)");
  const double bracket = std::log(1.0 / delta) / std::log(1.0 / (1.0 - epsilon)) - 1.0;
  if (bracket < 0.0) return {0.0, true};
  const double root = 4.0 / (delta_min * delta_min) * ((K - N) / (K - 1.0)) * bracket;
  return {root * root, false};
}

std::int64_t phi_max(std::int64_t N) {
  if (N < 1) fail(ErrorCategory::Domain, "N must be at least 1");
  return N * (N - 1) / 2;
}

BoundReport bound_report(std::int64_t K, std::int64_t N, double epsilon, double delta,
                         double delta_min, double horizon) {
  BoundReport report;
  const auto k = static_cast<double>(K);
  const auto n = static_cast<double>(N);
  report.t_min = t_min_bound(k, delta_min);
  report.s_min = s_min_bound(horizon, delta_min);
  report.phi_max = phi_max(N);
  try {
    report.T_delta_static = T_delta_static(k, n, epsilon, delta, report.t_min);
    report.T_delta_departure = T_delta_departure(k, n, epsilon, delta, report.t_min);
    report.static_valid = true;
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::Validity && e.category() != ErrorCategory::Domain) throw;
  }
  if (N < K && epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
    const auto arrival = T_arrival_bound(k, n, epsilon, delta, delta_min);
    report.T_arrival = arrival.slots;
    report.arrival_valid = !arrival.clamped;
  }
  return report;
}

}  // namespace csm::theory
