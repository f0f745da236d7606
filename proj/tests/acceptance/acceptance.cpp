// Acceptance run: one PASS/FAIL line per criterion. Criteria named with
// --known-failure still print FAIL but do not fail the process.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "robinson/robinson.hpp"

using namespace robinson;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome golden_gamma() {
  const auto t0 = Clock::now();
  const auto w = refine(tight_example(), 2);
  const auto g = gamma_exhaustive(w);
  const double secs = seconds_since(t0);
  const auto expected = IntervalSet::from_cells(8, {0, 1, 2, 5, 6, 7});
  IntervalSet mirrored(8);
  for (std::size_t i = 0; i < 8; ++i) mirrored.set(7 - i, g.witness.contains(i));
  const bool witness_ok = g.witness == expected || mirrored == expected;
  Outcome o;
  o.pass = std::abs(g.value - 5.0 / 512) <= 1e-12 && witness_ok && secs < 1;
  o.detail = "value " + fmt("%.17g", g.value) + " witness " + g.witness.to_string() + fmt(" %.3fs", secs);
  return o;
}

Outcome golden_certificate() {
  const auto t0 = Clock::now();
  const auto c = gamma_lower_certificate(tight_example(), 1);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = c.value == 1.0 / 128 && c.s_u == 0 && c.s_l == 1 && c.t_l == 2 && c.t_u == 3 && secs < 1;
  o.detail = "value " + fmt("%.17g", c.value) + " intervals " + std::to_string(c.s_u) + "," + std::to_string(c.s_l) +
             "," + std::to_string(c.t_l) + "," + std::to_string(c.t_u) + fmt(" %.3fs", secs);
  return o;
}

Outcome closed_form() {
  Rng rng(301);
  double worst = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = oracle::random_symmetric(6, rng);
    IntervalSet a(6);
    for (std::size_t i = 0; i < 6; ++i) a.set(i, coin(rng));
    worst = std::max(worst, std::abs(gamma_of_set(w, a) - oracle::gamma_quadrature(w, a, 402)));
  }
  return {worst <= 1e-4, "max |closed form - quadrature| " + fmt("%.3g", worst)};
}

Outcome robinson_zero() {
  double worst = 0;
  for (const GraphonSpec& spec : {GraphonSpec{Flat{0.5, 0.3}}, GraphonSpec{Steep{0.9, 0.8}}})
    for (std::size_t n : {8, 16, 32}) {
      const auto w = discretize(spec, n);
      if (n <= kGammaExhaustiveMax) worst = std::max(worst, gamma_exhaustive(w).value);
      worst = std::max(worst, gamma_localsearch(w, 20, 1).value);
      worst = std::max(worst, robinson_violation(w));
    }
  return {worst <= 1e-12, "max value " + fmt("%.3g", worst)};
}

Outcome lemma_bound() {
  const auto t0 = Clock::now();
  Rng rng(501);
  std::size_t violations = 0;
  double worst_ratio = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_robinson(210, rng);
    for (std::size_t coarse : {3, 5, 7, 10, 14, 21}) {
      const std::size_t f = 210 / coarse;
      const auto step = step_operator(u, coarse);
      const double d = l1_dist(u, refine(step, f));
      worst_ratio = std::max(worst_ratio, d * static_cast<double>(coarse) / 7.0);
      violations += d > 7.0 / static_cast<double>(coarse);
      const auto lo = refine(shift_minus(step), f), hi = refine(shift_plus(step), f);
      for (std::size_t i = 0; i < 210; ++i)
        for (std::size_t j = 0; j < 210; ++j) violations += lo(i, j) > u(i, j) + 1e-12 || u(i, j) > hi(i, j) + 1e-12;
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 10,
          std::to_string(violations) + " violations, max l1/(7/N') " + fmt("%.3f", worst_ratio) + fmt(" %.2fs", secs)};
}

Outcome approximation_corpus() {
  const auto t0 = Clock::now();
  Rng rng(601);
  const std::size_t sizes[] = {8, 10, 12, 16, 20};
  const double noise[] = {0.05, 0.1, 0.2};
  std::size_t violations = 0, unconverged = 0;
  double min_margin = 1e300;
  ApproxConfig cfg;
  cfg.gamma.max_resolution = 160;
  for (std::size_t k = 0; k < 30; ++k) {
    const auto w = perturbed(random_robinson(sizes[k % 5], rng), noise[k % 3], rng);
    const auto r = approx_report(w, cfg);
    violations += !r.pass || !r.distance_exact;
    unconverged += !r.gamma_converged;
    min_margin = std::min(min_margin, r.bound - r.distance);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && unconverged == 0 && secs < 300,
          std::to_string(violations) + " violations, " + std::to_string(unconverged) + " unconverged, min margin " +
              fmt("%.4f", min_margin) + fmt(" %.1fs", secs)};
}

struct DecayRuns {
  std::string flat_csv;
  ExperimentConfig flat_config;
};

Outcome decay_separation(DecayRuns& runs) {
  const auto t0 = Clock::now();
  ExperimentConfig flat;
  flat.spec = "flat:0.5,0.3";
  flat.n_grid = {256, 512, 1024, 2048, 4096};
  flat.replicates = 10;
  const auto fo = decay_experiment(flat);
  runs.flat_csv = to_csv(fo.records, false);
  runs.flat_config = flat;
  ExperimentConfig steep = flat;
  steep.spec = "steep:0.9,0.8";
  const auto so = decay_experiment(steep);
  const double secs = seconds_since(t0);

  const double flat_slope = fo.summary.at(0).lb_fit->slope;
  const double steep_ub_slope = so.summary.at(0).ub_fit->slope;
  std::size_t over = 0;
  for (const auto& r : so.records) over += r.gamma_lb > (14 / 0.8) * std::pow(static_cast<double>(r.n), -2.0 / 3.0);
  const bool a = flat_slope >= -0.65 && flat_slope <= -0.35;
  const bool b = over == 0;
  const bool c = steep_ub_slope <= -0.55;
  std::ostringstream os;
  os << "flat lb slope " << fmt("%.3f", flat_slope) << (a ? " ok" : " out of [-0.65,-0.35]") << "; steep lb over bound "
     << over << "/" << so.records.size() << "; steep ub slope " << fmt("%.3f", steep_ub_slope)
     << (c ? " ok" : " above -0.55") << "; steep lb slope "
     << fmt("%.3f", so.summary.at(0).lb_fit->slope) << fmt("; %.0fs", secs);
  return {a && b && c && secs < 1800, os.str()};
}

Outcome oracle_dominance() {
  Rng rng(801);
  std::size_t violations = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + uniform_index(rng, 13);
    const auto g = oracle::random_graph(n, uniform01(rng), rng);
    const auto ord = rep % 2 ? oracle::random_ordering(n, rng) : Ordering::natural(n);
    const double ex = gamma_star_exhaustive(g, ord).value;
    const double ls = gamma_star_localsearch(g, ord, search(8, static_cast<std::uint64_t>(rep))).value;
    const double ub = gamma_star_pair_ub(g, ord);
    violations += ls > ex || ex > ub;
  }
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + uniform_index(rng, 29);
    const auto g = oracle::random_graph(n, uniform01(rng), rng);
    const auto ord = oracle::random_ordering(n, rng);
    IntervalSet a(n);
    std::vector<bool> in(n);
    for (std::size_t i = 0; i < n; ++i) a.set(i, in[i] = coin(rng));
    worst = std::max(worst, std::abs(gamma_star_set(g, ord, a) - oracle::gamma_star(g, ord, in)));
  }
  return {violations == 0 && worst <= 1e-15,
          std::to_string(violations) + " chain violations, max |set - definition| " + fmt("%.3g", worst)};
}

Outcome cutnorm_agreement() {
  Rng rng(901);
  std::size_t equal = 0, exceed = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto k = oracle::random_symmetric(2 + uniform_index(rng, 15), rng, true);
    const double ex = cutnorm_exact(k).value;
    const double h = cutnorm_heuristic(k, 200, static_cast<std::uint64_t>(rep)).value;
    equal += std::abs(h - ex) <= 1e-12;
    exceed += h > ex + 1e-12;
  }
  return {equal >= 190 && exceed == 0, std::to_string(equal) + "/200 equal, " + std::to_string(exceed) + " exceed"};
}

Outcome region_structure() {
  Rng rng(1001);
  std::size_t bad = 0;
  for (int rep = 0; rep < 20; ++rep) {
    StepGraphon w = StepGraphon::constant(1, 0);
    switch (rep % 4) {
      case 0: w = perturbed(random_robinson(12, rng), 0.2, rng); break;
      case 1: w = oracle::random_symmetric(10, rng); break;
      case 2: w = refine(tight_example(), 2 + rep % 3); break;
      default: w = perturbed(discretize(Steep{0.9, 0.8}, 14), 0.1, rng); break;
    }
    const double g = gamma_exhaustive(w).value;
    const double alpha = std::clamp(std::pow(g, 2.0 / 7.0), 0.05, 0.45);
    const auto map = region_map(w, kDefaultLevels, alpha);
    const double N = static_cast<double>(map.n);
    for (std::size_t k = 0; k <= map.m; ++k) {
      for (std::size_t i = 0; i <= map.n; ++i) {
        for (std::size_t j = i; j <= map.n; ++j) {
          if (k < map.m && map.at(k + 1, i, j) == Region::kBlack && map.at(k, i, j) != Region::kBlack) ++bad;
          if (k < map.m && map.at(k + 1, i, j) == Region::kBlack && map.at(k, i, j) == Region::kWhite) ++bad;
          if (k > 0 && map.at(k, i, j) == Region::kBlack && map.at(k - 1, i, j) == Region::kWhite) ++bad;
        }
        if (map.f[k][i] > map.g[k][i]) ++bad;
        if (i > 0 && (map.f[k][i - 1] > map.f[k][i] || map.g[k][i - 1] > map.g[k][i])) ++bad;
      }
      if (static_cast<double>(largest_grey_square(map, k)) / N > alpha + 2.0 / N) ++bad;
    }
  }
  return {bad == 0, std::to_string(bad) + " violations over 20 maps"};
}

Outcome reproducibility(const DecayRuns& runs) {
  ExperimentConfig c = runs.flat_config;
  c.workers = 2;
  const std::string again = to_csv(decay_experiment(c).records, false);
  return {again == runs.flat_csv, "sha256 " + sha256_hex(runs.flat_csv).substr(0, 16) + " vs " +
                                      sha256_hex(again).substr(0, 16)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-failure") known.insert(std::stoi(argv[++i]));

  DecayRuns runs;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, golden_gamma},
      {2, golden_certificate},
      {3, closed_form},
      {4, robinson_zero},
      {5, lemma_bound},
      {6, approximation_corpus},
      {7, [&] { return decay_separation(runs); }},
      {8, oracle_dominance},
      {9, cutnorm_agreement},
      {10, region_structure},
      {11, [&] { return reproducibility(runs); }},
  };
  int unexpected = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d: %s%s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(),
                !o.pass && known.count(id) ? " [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass && !known.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
