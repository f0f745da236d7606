#pragma once

// Experiment orchestration: configuration, decay / approximation /
// recognition runs, statistics helpers, and CSV / JSON / SVG emission.

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "robinson/errors.hpp"
#include "robinson/graph.hpp"
#include "robinson/graph_gamma.hpp"
#include "robinson/graphon_spec.hpp"
#include "robinson/parallel.hpp"
#include "robinson/robinson_approx.hpp"

namespace robinson {

// ---------------------------------------------------------------------------
// Statistics.

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

/// Ordinary least squares of ln(value) on ln(n).
inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  std::set<double> distinct;
  for (auto [n, v] : points) {
    if (!(v > 0) || !(n > 0)) throw std::domain_error("slope_fit: n and values must be positive");
    distinct.insert(n);
  }
  if (distinct.size() < 2) throw std::invalid_argument("slope_fit: need at least two distinct n");
  const double k = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (auto [n, v] : points) {
    sx += std::log(n);
    sy += std::log(v);
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [n, v] : points) {
    const double dx = std::log(n) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

/// Smallest N >= 1 with 2 exp(-2 eps^2 N) <= delta. delta may reach up to 2,
/// where the bound is vacuous.
inline std::size_t hoeffding_reps(double epsilon, double delta) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 2))
    throw std::domain_error("hoeffding_reps: need epsilon in (0,1) and delta in (0,2)");
  const double exact = std::log(2.0 / delta) / (2.0 * epsilon * epsilon);
  // Guard against the ceiling of a value that is an integer up to rounding.
  const double r = std::round(exact);
  if (std::abs(exact - r) < 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(std::max(1.0, r));
  return static_cast<std::size_t>(std::ceil(exact));
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration: flat "key = value" lines, '#' comments.

struct ExperimentConfig {
  std::string experiment = "decay";      // decay | approx | recognize
  std::string spec = "flat:0.5,0.3";     // decay source; Robinson source of recognize
  std::string contrast = "tight";        // non-Robinson source of recognize
  std::vector<std::size_t> n_grid{256, 512, 1024, 2048, 4096};
  std::size_t replicates = 10;
  std::uint64_t seed = 20240601;
  std::string ordering = "natural";      // natural | spectral | both
  std::size_t restarts = 2;
  std::size_t band_grid = 16;
  std::size_t max_evaluations = 400;
  std::size_t max_n = 8192;
  std::size_t workers = 1;
  bool timing = false;                   // write measured wall time into the CSV
  std::string out = "out";
  // approx corpus
  std::size_t corpus_size = 30;
  std::vector<double> noise{0.05, 0.1, 0.2};
  std::vector<std::size_t> corpus_resolutions{8, 10, 12, 16};
  std::size_t gamma_max_resolution = 96;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  if (text.empty() || text[0] == '-' || !(is >> v) || !is.eof())
    throw ConfigError("config: bad value for '" + key + "': '" + text + "'");
  return v;
}

inline double parse_real(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  double v{};
  if (!(is >> v) || !is.eof()) throw ConfigError("config: bad value for '" + key + "': '" + text + "'");
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(trim(item)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  if (c.experiment != "decay" && c.experiment != "approx" && c.experiment != "recognize")
    throw ConfigError("config: experiment must be decay, approx or recognize");
  if (c.replicates < 1) throw ConfigError("config: replicates must be >= 1");
  if (c.n_grid.empty()) throw ConfigError("config: n_grid must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 2) throw ConfigError("config: n_grid entries must be >= 2");
    if (i && c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("config: n_grid must be strictly increasing");
    if (c.n_grid[i] > c.max_n) throw ConfigError("config: n_grid entry exceeds max_n");
  }
  if (c.max_n > GammaStarEvaluator::kMaxVertices) throw ConfigError("config: max_n exceeds 65535");
  if (c.ordering != "natural" && c.ordering != "spectral" && c.ordering != "both")
    throw ConfigError("config: ordering must be natural, spectral or both");
  if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (c.band_grid < 1) throw ConfigError("config: band_grid must be >= 1");
  try {
    parse_spec(c.spec);
    parse_spec(c.contrast);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (double e : c.noise)
    if (!(e >= 0 && e <= 1)) throw ConfigError("config: noise amplitudes must lie in [0,1]");
  for (std::size_t r : c.corpus_resolutions)
    if (r < 4 || r > kCutNormExactMax) throw ConfigError("config: corpus_resolutions must lie in [4,24]");
}

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  auto size = [&](const std::string& t) { return parse_number<std::size_t>(key, t); };
  if (key == "experiment") c.experiment = value;
  else if (key == "spec") c.spec = value;
  else if (key == "contrast") c.contrast = value;
  else if (key == "n_grid") c.n_grid = detail::parse_list<std::size_t>(value, size);
  else if (key == "replicates") c.replicates = size(value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "ordering") c.ordering = value;
  else if (key == "restarts") c.restarts = size(value);
  else if (key == "band_grid") c.band_grid = size(value);
  else if (key == "max_evaluations") c.max_evaluations = size(value);
  else if (key == "max_n") c.max_n = size(value);
  else if (key == "workers") c.workers = size(value);
  else if (key == "timing") {
    if (value != "true" && value != "false") throw ConfigError("config: timing must be true or false");
    c.timing = value == "true";
  } else if (key == "out") c.out = value;
  else if (key == "corpus_size") c.corpus_size = size(value);
  else if (key == "noise")
    c.noise = detail::parse_list<double>(value, [&](const std::string& t) { return detail::parse_real(key, t); });
  else if (key == "corpus_resolutions") c.corpus_resolutions = detail::parse_list<std::size_t>(value, size);
  else if (key == "gamma_max_resolution") c.gamma_max_resolution = size(value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  validate(base);
  return base;
}

inline std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "experiment = " << c.experiment << '\n'
     << "spec = " << c.spec << '\n'
     << "contrast = " << c.contrast << '\n'
     << "n_grid = " << detail::join(c.n_grid) << '\n'
     << "replicates = " << c.replicates << '\n'
     << "seed = " << c.seed << '\n'
     << "ordering = " << c.ordering << '\n'
     << "restarts = " << c.restarts << '\n'
     << "band_grid = " << c.band_grid << '\n'
     << "max_evaluations = " << c.max_evaluations << '\n'
     << "max_n = " << c.max_n << '\n'
     << "workers = " << c.workers << '\n'
     << "timing = " << (c.timing ? "true" : "false") << '\n'
     << "out = " << c.out << '\n'
     << "corpus_size = " << c.corpus_size << '\n'
     << "noise = " << detail::join(c.noise) << '\n'
     << "corpus_resolutions = " << detail::join(c.corpus_resolutions) << '\n'
     << "gamma_max_resolution = " << c.gamma_max_resolution << '\n';
  return os.str();
}

/// Loads a config file, or the config echoed inside a JSON manifest.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return parse_config(nlohmann::json::parse(text).at("config_text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: bad manifest: ") + e.what());
    }
  }
  return parse_config(text);
}

// ---------------------------------------------------------------------------
// Records and output.

struct ResultRecord {
  std::string experiment;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::string ordering;
  double gamma_lb = 0;
  double gamma_pair_ub = 0;
  double runtime_ms = 0;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void sort_records(std::vector<ResultRecord>& rs) {
  std::stable_sort(rs.begin(), rs.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.experiment, a.n, a.rep, a.ordering) < std::tie(b.experiment, b.n, b.rep, b.ordering);
  });
}

/// Measured runtimes only appear when `timing` is set; otherwise the column
/// holds 0 so that identical configurations give identical bytes.
inline std::string to_csv(const std::vector<ResultRecord>& rs, bool timing) {
  std::ostringstream os;
  os << "experiment,n,rep,seed,ordering,gamma_lb,gamma_pair_ub,runtime_ms\n";
  for (const auto& r : rs)
    os << r.experiment << ',' << r.n << ',' << r.rep << ',' << r.seed << ',' << r.ordering << ','
       << format_real(r.gamma_lb) << ',' << format_real(r.gamma_pair_ub) << ','
       << (timing ? format_real(r.runtime_ms) : std::string("0")) << '\n';
  return os.str();
}

inline std::vector<ResultRecord> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  if (detail::trim(line) != "experiment,n,rep,seed,ordering,gamma_lb,gamma_pair_ub,runtime_ms")
    throw std::invalid_argument("parse_csv: unexpected header");
  std::vector<ResultRecord> out;
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 8) throw std::invalid_argument("parse_csv: expected 8 fields");
    out.push_back({f[0], std::stoul(f[1]), std::stoul(f[2]), std::stoull(f[3]), f[4], std::stod(f[5]),
                   std::stod(f[6]), std::stod(f[7])});
  }
  return out;
}

struct SeriesSummary {
  std::string experiment, ordering;
  std::vector<std::pair<double, double>> lb_means, ub_means;  // (n, mean)
  std::optional<SlopeFit> lb_fit, ub_fit;
};

/// Per (experiment, ordering) series of means over replicates and their fits.
inline std::vector<SeriesSummary> summarize(const std::vector<ResultRecord>& rs) {
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::vector<const ResultRecord*>>> groups;
  for (const auto& r : rs) groups[{r.experiment, r.ordering}][r.n].push_back(&r);
  std::vector<SeriesSummary> out;
  for (const auto& [key, by_n] : groups) {
    SeriesSummary s;
    s.experiment = key.first;
    s.ordering = key.second;
    for (const auto& [n, recs] : by_n) {
      double lb = 0, ub = 0;
      for (const auto* r : recs) {
        lb += r->gamma_lb;
        ub += r->gamma_pair_ub;
      }
      lb /= static_cast<double>(recs.size());
      ub /= static_cast<double>(recs.size());
      s.lb_means.emplace_back(static_cast<double>(n), lb);
      s.ub_means.emplace_back(static_cast<double>(n), ub);
    }
    auto fit = [](const std::vector<std::pair<double, double>>& pts) -> std::optional<SlopeFit> {
      if (pts.size() < 2) return std::nullopt;
      for (auto [n, v] : pts)
        if (!(v > 0)) return std::nullopt;
      return slope_fit(pts);
    };
    s.lb_fit = fit(s.lb_means);
    s.ub_fit = fit(s.ub_means);
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json to_json(const SeriesSummary& s) {
  auto series = [](const std::vector<std::pair<double, double>>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (auto [n, v] : pts) a.push_back({{"n", n}, {"mean", v}});
    return a;
  };
  auto fit = [](const std::optional<SlopeFit>& f) -> nlohmann::json {
    if (!f) return nullptr;
    return {{"slope", f->slope}, {"intercept", f->intercept}, {"r2", f->r2}};
  };
  return {{"experiment", s.experiment}, {"ordering", s.ordering}, {"lb_means", series(s.lb_means)},
          {"ub_means", series(s.ub_means)}, {"lb_fit", fit(s.lb_fit)}, {"ub_fit", fit(s.ub_fit)}};
}

/// Minimal log-log scatter: replicate points, mean markers, fitted line and
/// a dashed guide of slope `reference` through the first mean.
inline std::string render_svg(const std::vector<ResultRecord>& rs, const std::vector<SeriesSummary>& sums,
                              double reference, const std::string& title) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& r : rs)
    for (double v : {r.gamma_lb, r.gamma_pair_ub})
      if (v > 0) {
        xmin = std::min(xmin, std::log10(static_cast<double>(r.n)));
        xmax = std::max(xmax, std::log10(static_cast<double>(r.n)));
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  if (xmin > xmax) {
    os << "</svg>\n";
    return os.str();
  }
  if (xmax - xmin < 1e-9) { xmin -= 0.5; xmax += 0.5; }
  if (ymax - ymin < 1e-9) { ymin -= 0.5; ymax += 0.5; }
  const double padY = 0.05 * (ymax - ymin);
  ymin -= padY;
  ymax += padY;
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 n</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">log10 gamma</text>\n";
  for (int t = static_cast<int>(std::ceil(xmin * 4)); t <= static_cast<int>(std::floor(xmax * 4)); ++t) {
    const double lx = t / 4.0;
    os << "<text x=\"" << px(lx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << lx << "</text>\n";
  }
  for (int t = static_cast<int>(std::ceil(ymin * 4)); t <= static_cast<int>(std::floor(ymax * 4)); ++t) {
    const double ly = t / 4.0;
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(ly) + 3 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << ly << "</text>\n";
  }
  for (const auto& r : rs) {
    const double lx = std::log10(static_cast<double>(r.n));
    if (r.gamma_lb > 0)
      os << "<circle cx=\"" << px(lx) << "\" cy=\"" << py(std::log10(r.gamma_lb)) << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n";
    if (r.gamma_pair_ub > 0)
      os << "<circle cx=\"" << px(lx) << "\" cy=\"" << py(std::log10(r.gamma_pair_ub)) << "\" r=\"2\" fill=\"#d62728\" fill-opacity=\"0.5\"/>\n";
  }
  auto line = [&](const std::optional<SlopeFit>& f, const char* colour) {
    if (!f) return;
    const double ln10 = std::log(10.0);
    auto ly = [&](double lx) { return (f->intercept + f->slope * lx * ln10) / ln10; };
    os << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(ly(xmin)) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(ly(xmax))
       << "\" stroke=\"" << colour << "\"/>\n";
  };
  for (const auto& s : sums) {
    line(s.lb_fit, "#1f77b4");
    line(s.ub_fit, "#d62728");
    if (!s.lb_means.empty() && s.lb_means.front().second > 0) {
      const double x0 = std::log10(s.lb_means.front().first), y0 = std::log10(s.lb_means.front().second);
      os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(y0) << "\" x2=\"" << px(xmax) << "\" y2=\""
         << py(y0 + reference * (xmax - x0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
  }
  os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 12 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
     << "blue: lower estimate, red: pair bound, dashed: slope " << reference << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Experiments.

inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t n, std::size_t rep) {
  return base + static_cast<std::uint64_t>(n) * 1000 + rep;
}

inline LocalSearchOptions search_options(const ExperimentConfig& c, std::uint64_t seed) {
  LocalSearchOptions o;
  o.restarts = c.restarts;
  o.seed = seed;
  o.band_grid = c.band_grid;
  o.max_evaluations = c.max_evaluations;
  return o;
}

inline std::string spec_kind(const std::string& spec) { return spec.substr(0, spec.find(':')); }

struct ExperimentOutput {
  std::vector<ResultRecord> records;  // sorted
  std::vector<SeriesSummary> summary;
  double reference_exponent = 0;
  nlohmann::json extra = nlohmann::json::object();
};

namespace detail {

struct Task {
  std::string experiment, spec;
  std::size_t n, rep;
  std::uint64_t seed;
};

inline std::vector<ResultRecord> run_tasks(const std::vector<Task>& tasks, const ExperimentConfig& c) {
  std::vector<std::vector<ResultRecord>> slots(tasks.size());
  parallel_for(tasks.size(), c.workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    const GraphonSpec spec = parse_spec(task.spec);
    const auto start = std::chrono::steady_clock::now();
    const LabeledGraph g = sample_w_random(spec, task.n, task.seed);
    std::vector<Ordering> orders;
    if (c.ordering != "spectral") orders.push_back(Ordering::natural(task.n));
    if (c.ordering != "natural") orders.push_back(spectral_ordering(g));
    for (const auto& ord : orders) {
      const auto t0 = std::chrono::steady_clock::now();
      const GammaStarInterval est = gamma_star_estimate(g, ord, search_options(c, task.seed));
      const auto t1 = std::chrono::steady_clock::now();
      const double ms = std::chrono::duration<double, std::milli>(t1 - (orders.size() == 1 ? start : t0)).count();
      slots[t].push_back({task.experiment, task.n, task.rep, task.seed, ord.tag, est.lower, est.upper, ms});
    }
  });
  std::vector<ResultRecord> out;
  for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  sort_records(out);
  return out;
}

}  // namespace detail

inline ExperimentOutput decay_experiment(const ExperimentConfig& c) {
  validate(c);
  const GraphonSpec spec = parse_spec(c.spec);
  ExperimentOutput out;
  if (std::holds_alternative<Flat>(spec)) out.reference_exponent = -0.5;
  else if (std::holds_alternative<Steep>(spec)) out.reference_exponent = -2.0 / 3.0;
  else throw ConfigError("decay: spec must be flat or steep");
  std::vector<detail::Task> tasks;
  for (std::size_t n : c.n_grid)
    for (std::size_t rep = 0; rep < c.replicates; ++rep)
      tasks.push_back({"decay-" + spec_kind(c.spec), c.spec, n, rep, replicate_seed(c.seed, n, rep)});
  out.records = detail::run_tasks(tasks, c);
  out.summary = summarize(out.records);
  return out;
}

inline ExperimentOutput recognition_experiment(const ExperimentConfig& c) {
  validate(c);
  const GraphonSpec robinson = parse_spec(c.spec);
  const GraphonSpec other = parse_spec(c.contrast);
  if (!std::holds_alternative<Flat>(robinson) && !std::holds_alternative<Steep>(robinson))
    throw ConfigError("recognize: spec must be flat or steep");
  if (!std::holds_alternative<TightExample>(other)) throw ConfigError("recognize: contrast must be tight");
  ExperimentConfig cc = c;
  if (cc.ordering == "natural") cc.ordering = "both";
  std::vector<detail::Task> tasks;
  for (const std::string& s : {c.spec, c.contrast})
    for (std::size_t n : c.n_grid)
      for (std::size_t rep = 0; rep < c.replicates; ++rep)
        tasks.push_back({"recognize-" + spec_kind(s), s, n, rep, replicate_seed(c.seed, n, rep)});
  ExperimentOutput out;
  out.records = detail::run_tasks(tasks, cc);
  out.summary = summarize(out.records);
  out.reference_exponent = -0.5;
  const auto cert = gamma_lower_certificate(tight_example(), 1);
  out.extra["tight_certificate"] = cert.value;
  return out;
}

struct CorpusRow {
  std::string instance;
  std::size_t resolution = 0;
  double noise = 0;
  ApproxReport report;
};

/// Built-in instances plus random Robinson step graphons, unperturbed and
/// perturbed by each configured noise level.
inline std::vector<std::pair<std::string, StepGraphon>> approx_corpus(const ExperimentConfig& c,
                                                                      std::vector<double>* noise_out = nullptr) {
  std::vector<std::pair<std::string, StepGraphon>> corpus;
  std::vector<double> noise;
  corpus.emplace_back("tight", refine(tight_example(), 2));
  noise.push_back(0);
  corpus.emplace_back("flat", discretize(Flat{0.5, 0.3}, 12));
  noise.push_back(0);
  corpus.emplace_back("steep", discretize(Steep{0.9, 0.8}, 12));
  noise.push_back(0);
  Rng rng(c.seed);
  for (std::size_t k = 0; k < c.corpus_size; ++k) {
    const std::size_t n = c.corpus_resolutions[k % c.corpus_resolutions.size()];
    const StepGraphon base = random_robinson(n, rng);
    if (k % (c.noise.size() + 1) == 0) {
      corpus.emplace_back("robinson-" + std::to_string(k), base);
      noise.push_back(0);
    } else {
      const double eps = c.noise[k % (c.noise.size() + 1) - 1];
      corpus.emplace_back("perturbed-" + std::to_string(k), perturbed(base, eps, rng));
      noise.push_back(eps);
    }
  }
  if (noise_out) *noise_out = noise;
  return corpus;
}

inline std::vector<CorpusRow> approx_experiment(const ExperimentConfig& c) {
  validate(c);
  std::vector<double> noise;
  const auto corpus = approx_corpus(c, &noise);
  std::vector<CorpusRow> rows(corpus.size());
  ApproxConfig ac;
  ac.gamma.seed = c.seed;
  ac.gamma.max_resolution = c.gamma_max_resolution;
  ac.gamma.restarts = c.restarts;
  parallel_for(corpus.size(), c.workers, [&](std::size_t i) {
    rows[i] = {corpus[i].first, corpus[i].second.resolution(), noise[i], approx_report(corpus[i].second, ac)};
  });
  return rows;
}

inline std::string corpus_csv(const std::vector<CorpusRow>& rows) {
  std::ostringstream os;
  os << "instance,N,noise,gamma_hat,gamma_converged,distance,distance_exact,bound,margin,pass\n";
  for (const auto& r : rows)
    os << r.instance << ',' << r.resolution << ',' << format_real(r.noise) << ',' << format_real(r.report.gamma_hat)
       << ',' << (r.report.gamma_converged ? 1 : 0) << ',' << format_real(r.report.distance) << ','
       << (r.report.distance_exact ? 1 : 0) << ',' << format_real(r.report.bound) << ','
       << format_real(r.report.bound - r.report.distance) << ',' << (r.report.pass ? 1 : 0) << '\n';
  return os.str();
}

/// Manifest: config echo (parsed and as text), CSV hash, series summary.
inline nlohmann::json make_manifest(const ExperimentConfig& c, const std::string& csv,
                                    const std::vector<SeriesSummary>& summary, double reference) {
  nlohmann::json cfg = nlohmann::json::object();
  std::istringstream is(to_text(c));
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    cfg[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  nlohmann::json series = nlohmann::json::array();
  for (const auto& s : summary) series.push_back(to_json(s));
  return {{"config", cfg},          {"config_text", to_text(c)}, {"csv_sha256", sha256_hex(csv)},
          {"series", series},       {"reference_exponent", reference}};
}

}  // namespace robinson
