// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything holds).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bounds_ref.hpp"
#include "csm/agent.hpp"
#include "csm/engine.hpp"
#include "csm/experiment_spec.hpp"
#include "csm/metrics.hpp"
#include "csm/oracle.hpp"
#include "csm/theory.hpp"
#include "oracles.hpp"

using namespace csm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

const ModelFactory kDrawn = [](const ExperimentConfig& c) { return draw_model_for(c); };

struct Batch {
  std::vector<RunOutput> runs;
  std::vector<MetricsTrace> metrics;
};

Batch run_batch(const ExperimentConfig& config) {
  Batch b;
  b.runs = run_repetitions(config, kDrawn, workers());
  for (const auto& r : b.runs) b.metrics.push_back(compute_metrics(r.trace, r.model));
  return b;
}

// Collision tally shared by every simulated scenario.
std::int64_t g_runs = 0;
std::int64_t g_unintended = 0;
std::int64_t g_probes = 0;

void tally(const Batch& b) {
  for (const auto& r : b.runs) {
    ++g_runs;
    g_unintended += r.trace.unintended_collisions;
    g_probes += r.trace.probes;
  }
}

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
  std::mt19937_64 eng(101);
  long configs = 0, mismatches = 0, enum_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    const int K = 3 + static_cast<int>(eng() % 3);
    const int N = 1 + static_cast<int>(eng() % K);
    const auto mu = oracle_ref::random_mu(K, N, eng);
    const RewardModel model(mu);
    std::vector<Configuration> filtered;
    for (const auto& a : oracle_ref::all_assignments(K, N)) {
      ++configs;
      const Configuration c{a};
      const bool lib = is_smc(c, model);
      if (lib != oracle_ref::stable(mu, a, true)) ++mismatches;
      if (lib) filtered.push_back(c);
    }
    if (enumerate_absorbing(model) != filtered) ++enum_mismatch;
  }
  return {mismatches == 0 && enum_mismatch == 0,
          std::to_string(configs) + " configurations, " + std::to_string(mismatches) +
              " is_smc mismatches, " + std::to_string(enum_mismatch) + " enumeration mismatches"};
}

struct LightStats {
  Verdict convergence;
  Verdict monotonicity;
};

LightStats light_scenario() {
  ExperimentConfig c;
  c.K = 10;
  c.N_initial = 7;
  c.T = 200000;
  c.seed = 1;
  c.repetitions = 50;
  const auto b = run_batch(c);
  tally(b);

  int settled = 0;
  double tail_phi = 0.0, initial_phi = 0.0;
  long increases = 0, changes = 0;
  for (std::size_t r = 0; r < b.runs.size(); ++r) {
    const auto& m = b.metrics[r];
    const auto S = m.super_frames();
    const auto from = S - S / 10;
    bool all = true;
    double sum = 0.0;
    for (auto i = from; i < S; ++i) {
      all = all && m.in_smc[static_cast<std::size_t>(i)];
      sum += m.potential[static_cast<std::size_t>(i)];
    }
    settled += all;
    tail_phi += sum / static_cast<double>(S - from);
    initial_phi += system_potential(b.runs[r].model, Configuration{b.runs[r].trace.cfl_assignment});
    for (auto i = S / 2 + 1; i < S; ++i) {
      const int d = m.potential[static_cast<std::size_t>(i)] - m.potential[static_cast<std::size_t>(i - 1)];
      if (d != 0) ++changes;
      if (d > 0) ++increases;
    }
  }
  const double n = static_cast<double>(b.runs.size());
  const double frac = settled / n;
  const double ratio = (tail_phi / n) / (initial_phi / n);
  const double inc_frac = changes ? static_cast<double>(increases) / static_cast<double>(changes) : 0.0;
  LightStats out;
  out.convergence = {frac >= 0.90 && ratio <= 0.10,
                     fmt("runs in SMC over final 10%%: %.2f (need >= 0.90)", frac) +
                         fmt(", tail/initial mean potential: %.3f (need <= 0.10)", ratio)};
  out.monotonicity = {inc_frac <= 0.05, std::to_string(increases) + " of " + std::to_string(changes) +
                                            fmt(" second-half changes are increases: %.3f (need <= 0.05)", inc_frac)};
  return out;
}

Verdict reward_sweep() {
  std::string detail;
  bool pass = true;
  double worst = 1.0;
  for (int N = 3; N <= 10; ++N) {
    ExperimentConfig c;
    c.K = 10;
    c.N_initial = N;
    c.T = 200000;
    c.seed = 1000 + static_cast<std::uint64_t>(N) * 100;
    c.repetitions = 50;
    const auto b = run_batch(c);
    tally(b);
    double mean = 0.0;
    for (const auto& m : b.metrics) mean += m.norm_reward.back();
    mean /= static_cast<double>(b.metrics.size());
    worst = std::min(worst, mean);
    pass = pass && mean >= 0.93;
    detail += fmt(" N=%.0f:", N) + fmt("%.4f", mean);
  }
  ExperimentConfig big;
  big.K = 25;
  big.N_initial = 5;
  big.T = 200000;
  big.seed = 2500;
  big.repetitions = 50;
  const auto b = run_batch(big);
  tally(b);
  double mean = 0.0;
  for (const auto& m : b.metrics) mean += m.norm_reward.back();
  mean /= static_cast<double>(b.metrics.size());
  pass = pass && mean >= 0.98;
  return {pass, "K=10 mean final ratio" + detail + fmt(" (min %.4f, need >= 0.93)", worst) +
                    fmt("; K=25 N=5: %.4f (need >= 0.98)", mean)};
}

Verdict election_statistics() {
  const double eps = 0.1;
  const int trials = 100000;
  bool pass = true;
  std::string detail;
  for (int ell : {1, 3, 7}) {
    std::vector<RngStream> rngs;
    for (int n = 0; n < ell; ++n) rngs.emplace_back(606 + ell, stream_id(StreamPurpose::Flag, n));
    const std::vector<Channel> wants{0};
    std::vector<int> flags(static_cast<std::size_t>(ell));
    long fixed = 0, none = 0;
    for (int t = 0; t < trials; ++t) {
      for (int n = 0; n < ell; ++n) flags[static_cast<std::size_t>(n)] = initiator_flag(wants, eps, rngs[n]);
      const auto who = elect_initiator(flags);
      if (!who) ++none;
      else if (*who == 0) ++fixed;
    }
    const double p = p_initiator(eps, ell);
    const double q = 1.0 - ell * p;
    const double zf = (fixed / double(trials) - p) / std::sqrt(p * (1 - p) / trials);
    const double zn = (none / double(trials) - q) / std::sqrt(q * (1 - q) / trials);
    pass = pass && std::abs(zf) <= 4.0 && std::abs(zn) <= 4.0;
    detail += fmt(" l=%.0f:", ell) + fmt(" z_elected=%+.2f", zf) + fmt(" z_none=%+.2f;", zn);
  }
  return {pass, detail.substr(1)};
}

Verdict dynamic_scenario() {
  ExperimentConfig c;
  c.K = 10;
  c.N_initial = 6;
  c.T = 300000;
  c.dynamic = true;
  c.seed = 7000;
  c.repetitions = 50;
  c.arrivals = {{50000, 6}, {150000, 7}};
  c.departures = {{100000, 0}, {200000, 2}};
  const auto b = run_batch(c);
  tally(b);

  const auto S = c.super_frames();
  std::vector<double> mean_phi(static_cast<std::size_t>(S), 0.0);
  int settled = 0;
  for (const auto& m : b.metrics) {
    for (std::int64_t i = 0; i < S; ++i) mean_phi[static_cast<std::size_t>(i)] += m.potential[static_cast<std::size_t>(i)];
    bool all = true;
    for (auto i = S - S / 10; i < S; ++i) all = all && m.in_smc[static_cast<std::size_t>(i)];
    settled += all;
  }
  for (auto& v : mean_phi) v /= static_cast<double>(b.metrics.size());

  struct Mark {
    std::int64_t boundary;
    const char* what;
  };
  std::vector<Mark> marks{{c.boundary_of(50000), "arrival"},
                          {c.boundary_of(100000), "departure"},
                          {c.boundary_of(150000), "arrival"},
                          {c.boundary_of(200000), "departure"}};
  bool pass = true;
  std::string detail;
  const std::int64_t window = 50;
  for (std::size_t e = 0; e < marks.size(); ++e) {
    const auto m = marks[e].boundary;
    const auto next = e + 1 < marks.size() ? marks[e + 1].boundary : S;
    const double before = mean_phi[static_cast<std::size_t>(m - 1)];
    double peak = 0.0;
    for (auto i = m; i < m + window; ++i) peak = std::max(peak, mean_phi[static_cast<std::size_t>(i)]);
    double late = 0.0;
    const auto late_from = next - (next - m) / 10;
    for (auto i = late_from; i < next; ++i) late += mean_phi[static_cast<std::size_t>(i)];
    late /= static_cast<double>(next - late_from);
    const bool up = peak > before;
    const bool decays = late < peak;
    pass = pass && up && decays;
    detail += std::string(" ") + marks[e].what + fmt(" %.2f", before) + fmt("->%.2f", peak) + fmt("->%.2f", late) +
              (up && decays ? "" : "(x)") + ";";
  }
  const double frac = settled / static_cast<double>(b.metrics.size());
  pass = pass && frac >= 0.90;
  return {pass, "mean potential before->peak->late per event:" + detail +
                    fmt(" runs in SMC over final 10%%: %.2f (need >= 0.90)", frac)};
}

Verdict potential_cap() {
  std::mt19937_64 eng(808);
  int violations = 0, shared_misses = 0, shared = 0;
  for (int i = 0; i < 200; ++i) {
    const int N = 2 + static_cast<int>(eng() % 4);
    const bool identical = i % 2 == 0;
    const auto mu = identical ? oracle_ref::identical_ranking_mu(N, N, eng) : oracle_ref::random_mu(N, N, eng);
    const RewardModel model(mu);
    int worst = 0;
    for (const auto& smc : enumerate_absorbing(model)) worst = std::max(worst, system_potential(model, smc));
    const auto cap = theory::phi_max(N);
    if (worst > cap) ++violations;
    if (identical) {
      ++shared;
      if (worst != cap) ++shared_misses;
    }
  }
  return {violations == 0 && shared_misses == 0,
          std::to_string(violations) + " instances above N(N-1)/2, " + std::to_string(shared - shared_misses) +
              "/" + std::to_string(shared) + " identical-ranking instances attain it"};
}

Verdict assignment_oracle() {
  std::mt19937_64 eng(909);
  int instances = 0, wrong = 0;
  for (int K = 1; K <= 6; ++K) {
    for (int N = 1; N <= K; ++N) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto mu = oracle_ref::random_mu(K, N, eng);
        ++instances;
        const double got = optimal_assignment(RewardModel(mu)).value;
        if (std::abs(got - oracle_ref::best_total(mu)) > 1e-12) ++wrong;
      }
    }
  }
  const RewardModel big(oracle_ref::random_mu(200, 200, eng));
  const auto start = std::chrono::steady_clock::now();
  const auto best = optimal_assignment(big);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  (void)best;
  return {wrong == 0 && took.count() < 1.0,
          std::to_string(wrong) + "/" + std::to_string(instances) + " brute-force mismatches for K<=6; K=200 in " +
              fmt("%.3f s (need < 1 s)", took.count())};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Verdict bound_calculators() {
  std::mt19937_64 eng(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int monotone_failures = 0;
  int points = 0;
  while (points < 100) {
    const double K = 3 + static_cast<double>(eng() % 48);
    const double N = 1 + static_cast<double>(eng() % static_cast<std::uint64_t>(K - 1));
    const double eps = 1.0 / K;
    const double delta = 0.001 + 0.2 * u(eng);
    const double gap = 0.005 + 0.5 * u(eng);
    const double T = 100 + 1e6 * u(eng);
    ++points;

    const double tm = theory::t_min_bound(K, gap);
    worst = std::max(worst, rel(tm, bounds_ref::t_min(K, gap)));
    worst = std::max(worst, rel(theory::s_min_bound(T, gap), bounds_ref::s_min(T, gap)));
    const double st = theory::T_delta_static(K, N, eps, delta, tm);
    const double dep = theory::T_delta_departure(K, N, eps, delta, tm);
    worst = std::max(worst, rel(st, bounds_ref::horizon(K, N, eps, delta, tm, false)));
    worst = std::max(worst, rel(dep, bounds_ref::horizon(K, N, eps, delta, tm, true)));
    const auto arr = theory::T_arrival_bound(K, N, eps, delta, gap);
    worst = std::max(worst, rel(arr.slots, bounds_ref::arrival(K, N, eps, delta, gap)));
    if (theory::phi_max(static_cast<std::int64_t>(N)) != bounds_ref::phi_max(static_cast<long long>(N))) {
      worst = 1.0;
    }

    // Monotonicity: smaller delta, larger K, larger N, smaller gap all lengthen
    // the static horizon; s_min and t_min follow the same direction in gap.
    monotone_failures += !(theory::T_delta_static(K, N, eps, delta / 2, tm) > st);
    const double tm_k = theory::t_min_bound(K + 1, gap);
    monotone_failures += !(theory::T_delta_static(K + 1, N, eps, delta, tm_k) > st);
    monotone_failures += !(theory::T_delta_static(K, N + 1, eps, delta, tm) > st);
    const double tm_g = theory::t_min_bound(K, gap * 0.9);
    monotone_failures += !(theory::T_delta_static(K, N, eps, delta, tm_g) > st);
    monotone_failures += !(theory::s_min_bound(T, gap * 0.9) > theory::s_min_bound(T, gap));
    monotone_failures += !(tm_k > tm);
    monotone_failures += !(dep <= st);
    if (N > 1) monotone_failures += !(theory::T_arrival_bound(K, N - 1, eps, delta, gap).slots > arr.slots);
    monotone_failures += !(theory::T_arrival_bound(K, N, eps, delta, gap * 0.9).slots > arr.slots);
    // Faster elections: larger eps (1-eps)^(N-1) gives a shorter horizon.
    const double eps_up = std::min(eps * 1.1, 1.0 / N);
    if (eps_up > eps) monotone_failures += !(theory::T_delta_static(K, N, eps_up, delta, tm) < st);
  }
  return {worst <= 1e-12 && monotone_failures == 0,
          std::to_string(points) + fmt(" grid points, max relative error %.2e (need <= 1e-12), ", worst) +
              std::to_string(monotone_failures) + " monotonicity violations"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const auto root = std::filesystem::temp_directory_path() / "csm_acceptance_determinism";
  std::filesystem::remove_all(root);
  const char* docs[] = {
      R"({"K": 10, "N": 7, "T": 20000, "repetitions": 6, "seed": 77})",
      R"({"K": 8, "N": 4, "T": 20000, "dynamic": true, "repetitions": 4, "seed": 78,
          "arrivals": [{"slot": 4000, "user": 4}], "departures": [{"slot": 9000, "user": 1}]})",
      R"({"K": [5, 6], "N": "2..K", "T": 4000, "sweep": true, "repetitions": 3, "seed": 79})",
  };
  int identical = 0, total = 0;
  for (std::size_t d = 0; d < std::size(docs); ++d) {
    const auto spec = parse_config(docs[d]);
    const auto a = emit_metrics(run_spec(spec, workers()), spec, root / std::to_string(d) / "a");
    const auto b = emit_metrics(run_spec(spec, 1), spec, root / std::to_string(d) / "b");
    for (const auto& [x, y] : {std::pair{a.metrics, b.metrics}, {a.summary, b.summary}, {a.bounds, b.bounds}}) {
      ++total;
      identical += slurp(x) == slurp(y) && !slurp(x).empty();
    }
  }
  std::filesystem::remove_all(root);
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                  " output files byte-identical across reruns (different worker counts)"};
}

}  // namespace

int main() {
  std::array<Verdict, 12> v;
  const char* names[] = {"",
                         "oracle equivalence",
                         "orthogonality invariant",
                         "light-scenario convergence",
                         "potential monotonicity at steady state",
                         "stable-reward sweep",
                         "initiator election statistics",
                         "dynamic scenario",
                         "SMC potential cap",
                         "optimal-assignment oracle",
                         "bound calculators",
                         "determinism"};

  v[1] = oracle_equivalence();
  const auto light = light_scenario();
  v[3] = light.convergence;
  v[4] = light.monotonicity;
  v[5] = reward_sweep();
  v[6] = election_statistics();
  v[7] = dynamic_scenario();
  v[8] = potential_cap();
  v[9] = assignment_oracle();
  v[10] = bound_calculators();
  v[11] = determinism();
  v[2] = {g_unintended == 0, std::to_string(g_unintended) + " unintended collisions over " + std::to_string(g_runs) +
                                 " runs (" + std::to_string(g_probes) + " probe slots)"};

  int failed = 0;
  for (int i = 1; i <= 11; ++i) {
    std::printf("[%s] %2d %s: %s\n", v[i].pass ? "PASS" : "FAIL", i, names[i], v[i].detail.c_str());
    failed += !v[i].pass;
  }
  std::printf("%d/11 criteria passed\n", 11 - failed);
  return failed;
}
