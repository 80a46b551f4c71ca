#pragma once

#include <cstdint>

namespace csm::theory {

/// Slots after which a potential change is a decrease w.h.p.: (32K / gap^2)^2.
double t_min_bound(double K, double delta_min);

/// Samples per channel needed by the index comparison: 8 ln(horizon) / gap^2.
double s_min_bound(double horizon, double delta_min);

/// Per-super-frame probability floor used by the static and departure bounds:
/// eps (1-eps)^(N-1) - 2 t_min^-4.
double decrease_probability(double N, double epsilon, double t_min);

/// Convergence horizon for the static system (published form, with the
/// 2N(K-1) term). Throws Validity when delta <= 6 t_min^-4 or the decrease
/// probability is not positive.
double T_delta_static(double K, double N, double epsilon, double delta, double t_min);

/// Same shape with N(N-1) replacing 2N(K-1).
double T_delta_departure(double K, double N, double epsilon, double delta, double t_min);

struct ArrivalBound {
  double slots = 0.0;
  bool clamped = false;  // the inner bracket was negative and was clamped to 0
};

/// ((4/gap^2) (K-N)/(K-1) (ln(1/delta)/ln(1/(1-eps)) - 1))^2.
/// Throws Domain when N >= K.
ArrivalBound T_arrival_bound(double K, double N, double epsilon, double delta, double delta_min);

/// N(N-1)/2.
std::int64_t phi_max(std::int64_t N);

struct BoundReport {
  double t_min = 0.0;
  double s_min = 0.0;
  double T_delta_static = 0.0;
  double T_delta_departure = 0.0;
  double T_arrival = 0.0;
  std::int64_t phi_max = 0;
  bool static_valid = false;     // delta > 6 t_min^-4 and positive decrease probability
  bool arrival_valid = false;    // N < K and the bracket was not clamped
};

/// Every bound for one parameter cell; invalid entries are reported as 0
/// with their flag cleared instead of throwing.
BoundReport bound_report(std::int64_t K, std::int64_t N, double epsilon, double delta,
                         double delta_min, double horizon);

}  // namespace csm::theory
