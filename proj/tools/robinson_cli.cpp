// Command-line front end: one subcommand per library operation plus the
// three experiment drivers.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "robinson/robinson.hpp"

namespace fs = std::filesystem;
using namespace robinson;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::size_t workers = 1;
  std::string config;
};

struct GraphonInput {
  std::string spec;
  std::string matrix;
  std::size_t resolution = 8;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Base seed");
  app->add_option("--out", c.out, "Output file or directory");
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--config", c.config, "Config file or manifest");
}

void add_graphon(CLI::App* app, GraphonInput& g) {
  app->add_option("--spec", g.spec, "flat:P,D | steep:P,C | tight | constant:P");
  app->add_option("--matrix", g.matrix, "Step graphon matrix file");
  app->add_option("-N,--resolution", g.resolution, "Discretization resolution for --spec")->check(CLI::PositiveNumber);
}

StepGraphon load_graphon(const GraphonInput& in, ValueRange range = ValueRange::kGraphon) {
  if (!in.matrix.empty() == !in.spec.empty()) throw ConfigError("give exactly one of --spec or --matrix");
  if (!in.matrix.empty()) {
    std::ifstream f(in.matrix);
    if (!f) throw ConfigError("cannot open '" + in.matrix + "'");
    return read_matrix(f, range);
  }
  try {
    return discretize(parse_spec(in.spec), in.resolution);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
}

/// Writes to the --out file, or to stdout when none was given.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw ConfigError("cannot write '" + out + "'");
  f << text;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << text;
}

ExperimentConfig experiment_config(const Common& c, const std::string& kind, const CLI::App* app) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  cfg.experiment = kind;
  if (app->count("--seed")) cfg.seed = c.seed;
  if (app->count("--workers")) cfg.workers = c.workers;
  if (app->count("--out")) cfg.out = c.out;
  validate(cfg);
  return cfg;
}

void write_run(const ExperimentConfig& cfg, const ExperimentOutput& out, const std::string& title) {
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  const std::string csv = to_csv(out.records, cfg.timing);
  write_file(dir / "results.csv", csv);
  auto manifest = make_manifest(cfg, csv, out.summary, out.reference_exponent);
  if (!out.extra.empty()) manifest["extra"] = out.extra;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "plot.svg", render_svg(out.records, out.summary, out.reference_exponent, title));
  std::ostringstream timings;
  timings << "experiment,n,rep,ordering,runtime_ms\n";
  for (const auto& r : out.records)
    timings << r.experiment << ',' << r.n << ',' << r.rep << ',' << r.ordering << ',' << format_real(r.runtime_ms) << '\n';
  write_file(dir / "timings.csv", timings.str());
  for (const auto& s : out.summary) {
    std::cout << s.experiment << " [" << s.ordering << "]";
    if (s.lb_fit) std::cout << " lb slope " << s.lb_fit->slope;
    if (s.ub_fit) std::cout << " ub slope " << s.ub_fit->slope;
    std::cout << '\n';
  }
  std::cout << "wrote " << (dir / "results.csv").string() << " sha256 " << sha256_hex(csv) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robinson gauge toolkit"};
  app.require_subcommand(1);
  Common common;
  GraphonInput graphon;

  auto* sample = app.add_subcommand("sample", "Draw a w-random labeled graph");
  std::string sample_spec = "flat:0.5,0.3";
  std::size_t sample_n = 100;
  sample->add_option("--spec", sample_spec, "Graphon spec");
  sample->add_option("-n", sample_n, "Vertex count")->check(CLI::PositiveNumber);
  add_common(sample, common);

  auto* gamma = app.add_subcommand("gamma", "Gamma lower estimate of a step graphon");
  std::string method = "auto";
  std::size_t restarts = 50, cells = 1;
  add_graphon(gamma, graphon);
  gamma->add_option("--method", method, "auto | exhaustive | localsearch | certificate | converged")
      ->check(CLI::IsMember({"auto", "exhaustive", "localsearch", "certificate", "converged"}));
  gamma->add_option("--restarts", restarts, "Local-search restarts");
  gamma->add_option("--cells", cells, "Certificate interval length in cells");
  add_common(gamma, common);

  auto* gamma_graph = app.add_subcommand("gamma-graph", "Discrete gauge of a graph file");
  std::string graph_path, ordering = "natural";
  std::size_t band_grid = 16, max_evals = 0;
  gamma_graph->add_option("--graph", graph_path, "Graph file written by 'sample'")->required();
  gamma_graph->add_option("--ordering", ordering, "natural | spectral | both")
      ->check(CLI::IsMember({"natural", "spectral", "both"}));
  gamma_graph->add_option("--restarts", restarts, "Local-search restarts");
  gamma_graph->add_option("--band-grid", band_grid, "Label bands for structured seeds");
  gamma_graph->add_option("--max-evaluations", max_evals, "Evaluation budget (0 = unlimited)");
  add_common(gamma_graph, common);

  auto* cut = app.add_subcommand("cutnorm", "Cut-norm of a kernel, or of the difference of two graphons");
  std::string other;
  add_graphon(cut, graphon);
  cut->add_option("--minus", other, "Matrix file subtracted from the input");
  cut->add_option("--restarts", restarts, "Heuristic restarts when the resolution exceeds the exact limit");
  add_common(cut, common);

  auto* approx1 = app.add_subcommand("robinson-approx", "Robinson approximation and its cut-norm error");
  std::size_t max_res = 96;
  add_graphon(approx1, graphon);
  approx1->add_option("--max-resolution", max_res, "Refinement cap for the Gamma estimate");
  approx1->add_option("--matrix-out", other, "Write R_w in matrix format");
  add_common(approx1, common);

  auto* region = app.add_subcommand("region-map", "Black / white / grey region maps");
  std::size_t levels = kDefaultLevels;
  double alpha = 0;
  add_graphon(region, graphon);
  region->add_option("--levels", levels, "Number of levels m")->check(CLI::PositiveNumber);
  region->add_option("--alpha", alpha, "Cell mass (default: Gamma estimate^(2/7))");
  add_common(region, common);

  auto* decay = app.add_subcommand("decay", "Decay-rate experiment");
  add_common(decay, common);
  auto* approx = app.add_subcommand("approx", "Approximation-bound corpus experiment");
  add_common(approx, common);
  auto* recognize = app.add_subcommand("recognize", "Recognition experiment");
  add_common(recognize, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sample) {
      const auto g = sample_w_random(parse_spec(sample_spec), sample_n, common.seed);
      std::ostringstream os;
      write_graph(os, g);
      emit(common.out, os.str());
    } else if (*gamma) {
      const auto w = load_graphon(graphon);
      nlohmann::json j;
      if (method == "certificate") {
        const auto c = gamma_lower_certificate(w, cells);
        j = {{"value", c.value}, {"method", "certificate"}, {"resolution", c.resolution},
             {"intervals", {c.s_u, c.s_l, c.t_l, c.t_u}}, {"cells", c.cells}, {"alpha", c.alpha}};
      } else if (method == "converged") {
        ConvergenceOptions opt;
        opt.seed = common.seed;
        opt.restarts = restarts;
        const auto c = gamma_converged(w, opt);
        j = to_json(c.estimate);
        j["converged"] = c.converged;
        j["curve"] = nlohmann::json::array();
        for (auto [n, v] : c.curve) j["curve"].push_back({{"resolution", n}, {"value", v}});
      } else if (method == "exhaustive" || (method == "auto" && w.resolution() <= kGammaExhaustiveMax)) {
        j = to_json(gamma_exhaustive(w));
      } else {
        j = to_json(gamma_localsearch(w, restarts, common.seed));
      }
      emit(common.out, j.dump(2) + "\n");
    } else if (*gamma_graph) {
      std::ifstream f(graph_path);
      if (!f) throw ConfigError("cannot open '" + graph_path + "'");
      const auto g = read_graph(f);
      LocalSearchOptions opt;
      opt.restarts = restarts;
      opt.seed = common.seed;
      opt.band_grid = band_grid;
      opt.max_evaluations = max_evals;
      std::vector<Ordering> orders;
      if (ordering != "spectral") orders.push_back(Ordering::natural(g.size()));
      if (ordering != "natural") orders.push_back(spectral_ordering(g));
      nlohmann::json j = nlohmann::json::array();
      for (const auto& ord : orders) {
        const auto e = gamma_star_estimate(g, ord, opt);
        j.push_back({{"ordering", ord.tag}, {"lower", e.lower}, {"upper", e.upper}, {"exact", e.exact},
                     {"witness_bits", e.witness.to_string()}});
      }
      if (orders.size() > 1) {
        const auto m = gamma_star_min_estimate(g, orders, opt);
        j.push_back({{"ordering", "min"}, {"best", m.best.tag}, {"lower", m.value.lower}, {"upper", m.value.upper}});
      }
      emit(common.out, j.dump(2) + "\n");
    } else if (*cut) {
      StepGraphon k = load_graphon(graphon, ValueRange::kKernel);
      if (!other.empty()) {
        std::ifstream f(other);
        if (!f) throw ConfigError("cannot open '" + other + "'");
        k = difference(k, read_matrix(f, ValueRange::kKernel));
      }
      const auto r = cutnorm_auto(k, restarts, common.seed);
      emit(common.out, nlohmann::json{{"value", r.value}, {"exact", r.exact}, {"witness_s", r.witness_s.to_string()},
                                      {"witness_t", r.witness_t.to_string()}}.dump(2) + "\n");
    } else if (*approx1) {
      const auto w = load_graphon(graphon);
      ApproxConfig cfg;
      cfg.gamma.seed = common.seed;
      cfg.gamma.max_resolution = max_res;
      const auto rep = approx_report(w, cfg);
      if (!other.empty()) {
        std::ofstream f(other);
        write_matrix(f, rep.approximation);
      }
      emit(common.out, to_json(rep).dump(2) + "\n");
    } else if (*region) {
      const auto w = load_graphon(graphon);
      double a = alpha;
      if (a <= 0) {
        const double g = w.resolution() <= kGammaExhaustiveMax ? gamma_exhaustive(w).value
                                                               : gamma_localsearch(w, restarts, common.seed).value;
        if (g <= 0) throw ConfigError("graphon is Robinson; pass --alpha explicitly");
        a = std::pow(g, 2.0 / 7.0);
      }
      AveragerOptions opt;
      opt.seed = common.seed;
      const auto map = region_map(w, levels, a, opt);
      std::ostringstream os;
      write_region_map(os, map);
      emit(common.out, os.str());
    } else if (*decay) {
      const auto cfg = experiment_config(common, "decay", decay);
      write_run(cfg, decay_experiment(cfg), "decay " + cfg.spec);
    } else if (*recognize) {
      const auto cfg = experiment_config(common, "recognize", recognize);
      write_run(cfg, recognition_experiment(cfg), "recognition " + cfg.spec + " vs " + cfg.contrast);
    } else if (*approx) {
      const auto cfg = experiment_config(common, "approx", approx);
      const auto rows = approx_experiment(cfg);
      const fs::path dir(cfg.out);
      fs::create_directories(dir);
      const std::string csv = corpus_csv(rows);
      write_file(dir / "approx.csv", csv);
      nlohmann::json manifest = make_manifest(cfg, csv, {}, 1.0 / 7.0);
      std::size_t failures = 0;
      for (const auto& r : rows) failures += !r.report.pass;
      manifest["failures"] = failures;
      write_file(dir / "manifest.json", manifest.dump(2) + "\n");
      std::cout << rows.size() << " instances, " << failures << " bound violations\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
