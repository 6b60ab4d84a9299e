// arw: command-line front end. Every subcommand prints one JSON object (scan
// prints one JSON object per line) or a CSV table, and records its run under
// <cache-dir>/<hash>.json unless --no-cache is given.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "arw/arw.hpp"
#include "json.hpp"

#ifndef ARW_VERSION
#define ARW_VERSION "dev"
#endif

using json = nlohmann::ordered_json;
using namespace arw;

namespace {

struct Output {
  json payload;     // JSON form (for scan: array of lines)
  std::string csv;  // CSV form including header
  bool jsonl = false;
};

json count_json(Count c) {
  if (c <= std::numeric_limits<std::uint64_t>::max()) return static_cast<std::uint64_t>(c);
  return to_string(c);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_cache(const std::string& dir, const std::string& command, const json& params, std::uint64_t seed,
                 const json& outputs) {
  json key = {{"command", command}, {"parameters", params}, {"seed", seed}};
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json", static_cast<unsigned long long>(fnv1a(key.dump())));
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    const auto old = json::parse(in, nullptr, false);
    if (old.is_discarded() || old.value("command", "") != command || old.value("parameters", json{}) != params ||
        old.value("seed", std::uint64_t{0}) != seed)
      std::cerr << "warning: cache entry " << path.string() << " belongs to another run; overwriting\n";
  }
  json rec = {{"command", command}, {"parameters", params}, {"outputs", outputs}, {"seed", seed},
              {"timestamp", utc_now()}, {"code_version", ARW_VERSION}};
  std::ofstream(path) << rec.dump(2) << '\n';
}

json lattice_json(const LatticeSet& s) {
  json classes = json::array();
  for (const auto& p : s.classes) classes.push_back({p.x, p.y});
  const auto st = angular_stats(s);
  return {{"n", s.n}, {"N", s.size()}, {"classes", classes}, {"axis_points", s.axis_points.size()},
          {"Q", grid_number(s.n)}, {"nu4", st.nu4}, {"M4", st.m4}};
}

Output cmd_lattice(u64 n) {
  const auto s = enumerate_lattice_set(n);
  Output o;
  o.payload = lattice_json(s);
  const auto st = angular_stats(s);
  o.csv = "n,N,classes,Q,nu4,M4\n" +
          csv_row({std::to_string(n), std::to_string(s.size()), std::to_string(s.classes.size()),
                   std::to_string(grid_number(n)), fmt(st.nu4), fmt(st.m4)});
  return o;
}

Output cmd_semicorr(u64 n, int l, bool with_corr, const std::vector<double>& eps) {
  const auto s = enumerate_lattice_set(n);
  const auto r = correlation_report(s, l, with_corr, eps);
  Output o;
  o.payload = {{"n", n}, {"N", r.N}, {"l", l}, {"M_count", count_json(r.M_count)}, {"ratio_M", r.ratio_M}};
  if (r.R_count) o.payload["R_count"] = count_json(*r.R_count);
  if (r.D_count) o.payload["D_count"] = count_json(*r.D_count);
  json q = json::array();
  for (const auto& [e, c] : r.quasi_counts) q.push_back({{"eps", e}, {"count", count_json(c)}});
  o.payload["quasi"] = q;
  o.csv = "n,N,l,M_count,R_count,D_count,ratio\n" +
          csv_row({std::to_string(n), std::to_string(r.N), std::to_string(l), to_string(r.M_count),
                   r.R_count ? to_string(*r.R_count) : "", r.D_count ? to_string(*r.D_count) : "", fmt(r.ratio_M)});
  return o;
}

Output cmd_scan(u64 lo, u64 hi, int l, const std::vector<double>& thresholds, bool with_corr, unsigned threads) {
  const auto r = scan_semi_correlations(lo, hi, l, thresholds, with_corr, threads);
  Output o;
  o.jsonl = true;
  o.payload = json::array();
  for (const auto& row : r.rows) {
    json j = {{"n", row.n}, {"N", row.N}, {"l", row.l}, {"M_count", count_json(row.M_count)}, {"ratio", row.ratio}};
    if (row.R_count) j["R_count"] = count_json(*row.R_count);
    o.payload.push_back(j);
  }
  std::ostringstream csv;
  write_scan_csv(csv, r);
  o.csv = csv.str();
  json f = json::array();
  for (const auto& [c, frac] : r.fractions) f.push_back({{"C", c}, {"fraction", frac}});
  o.payload.push_back({{"summary", {{"rows", r.rows.size()}, {"fractions", f}}}});
  for (const auto& [c, frac] : r.fractions) std::cerr << "fraction with M <= " << c << " N^(l/2): " << frac << '\n';
  return o;
}

json kacrice_json(const KacRiceResult& r) {
  return {{"n", r.n}, {"N", r.N}, {"nu4", r.nu4}, {"Q", r.Q}, {"mq", r.mq}, {"integral", r.integral},
          {"integral_refined", std::isnan(r.integral_refined) ? json(nullptr) : json(r.integral_refined)},
          {"grid_term", r.grid_term}, {"total", r.total}, {"leading", r.leading}, {"correction_pred", r.correction_pred},
          {"convergence", r.convergence}, {"degenerate_cells", r.degenerate_cells}};
}

Output cmd_kacrice(u64 n, const Config& cfg) {
  const auto s = enumerate_lattice_set(n);
  const auto r = kac_rice_expected_length(s, {.mq = cfg.mq, .tolerance = cfg.kr_tolerance, .threads = cfg.threads});
  Output o;
  o.payload = kacrice_json(r);
  o.csv = "n,N,nu4,integral,grid_term,total,leading,correction_pred,convergence\n" +
          csv_row({std::to_string(n), std::to_string(r.N), fmt(r.nu4), fmt(r.integral), fmt(r.grid_term), fmt(r.total),
                   fmt(r.leading), fmt(r.correction_pred), fmt(r.convergence)});
  return o;
}

WaveKind parse_kind(const std::string& k) {
  if (k == "boundary_adapted" || k == "boundary") return WaveKind::BoundaryAdapted;
  if (k == "torus") return WaveKind::Torus;
  throw Error(ErrorCode::InvalidArgument, "unknown kind " + k);
}

json length_json(const LengthReport& r) {
  return {{"n", r.n}, {"kind", to_string(r.kind)}, {"trials", r.trials}, {"grid_M", r.grid_M}, {"mean", r.mean},
          {"stderr", r.stderr_}, {"variance", r.variance}, {"min", r.min}, {"seed0", r.seed0}, {"ppw", r.ppw}};
}

std::string length_csv(const LengthReport& r) {
  return "n,kind,trials,grid_M,mean,stderr,variance,seed0\n" +
         csv_row({std::to_string(r.n), std::string(to_string(r.kind)), std::to_string(r.trials), std::to_string(r.grid_M),
                  fmt(r.mean), fmt(r.stderr_), fmt(r.variance), std::to_string(r.seed0)});
}

Output cmd_montecarlo(u64 n, const std::string& kind, std::size_t trials, std::uint64_t seed, const Config& cfg) {
  const auto s = enumerate_lattice_set(n);
  const auto r = monte_carlo_expected_length(parse_kind(kind), s, trials, cfg.ppw, seed, cfg.threads);
  Output o;
  o.payload = length_json(r);
  if (r.kind == WaveKind::Torus) o.payload["torus_expected"] = std::numbers::pi / std::numbers::sqrt2 * std::sqrt(static_cast<double>(n));
  o.csv = length_csv(r);
  return o;
}

Output cmd_deficiency(u64 n, std::size_t trials, std::uint64_t seed, const Config& cfg) {
  const auto s = enumerate_lattice_set(n);
  const auto kr = kac_rice_expected_length(s, {.mq = cfg.mq, .tolerance = cfg.kr_tolerance, .threads = cfg.threads});
  Output o;
  const double measured = kr.total - kr.leading;
  o.payload = {{"n", n}, {"N", kr.N}, {"nu4", kr.nu4}, {"kac_rice_total", kr.total}, {"leading", kr.leading},
               {"correction_pred", kr.correction_pred}, {"correction_measured", measured},
               {"ratio", kr.correction_pred != 0.0 ? json(measured / kr.correction_pred) : json(nullptr)},
               {"convergence", kr.convergence}};
  std::string mc_mean, mc_se;
  if (trials > 0) {
    const auto mc = monte_carlo_expected_length(WaveKind::BoundaryAdapted, s, trials, cfg.ppw, seed, cfg.threads);
    o.payload["mc_mean"] = mc.mean;
    o.payload["mc_stderr"] = mc.stderr_;
    o.payload["mc_trials"] = trials;
    mc_mean = fmt(mc.mean);
    mc_se = fmt(mc.stderr_);
  }
  o.csv = "n,N,nu4,mc_mean,mc_stderr,kac_rice_total,leading,correction_pred,correction_measured,ratio\n" +
          csv_row({std::to_string(n), std::to_string(kr.N), fmt(kr.nu4), mc_mean, mc_se, fmt(kr.total), fmt(kr.leading),
                   fmt(kr.correction_pred), fmt(measured), fmt(measured / kr.correction_pred)});
  return o;
}

Output cmd_moments(u64 n, const Config& cfg) {
  const auto s = enumerate_lattice_set(n);
  const auto r = moment_integrals(s, {.c0 = cfg.c0, .eps0 = cfg.eps0, .probes = cfg.probes, .threads = cfg.threads});
  Output o;
  json items = json::array();
  o.csv = "n,N,name,value,value_nonsingular,prediction,residual,residual_times_N\n";
  for (const auto& it : r.items) {
    items.push_back({{"name", it.name}, {"value", it.value}, {"value_nonsingular", it.value_nonsingular},
                     {"prediction", it.prediction}, {"residual", it.residual}});
    o.csv += csv_row({std::to_string(n), std::to_string(r.N), it.name, fmt(it.value), fmt(it.value_nonsingular),
                      fmt(it.prediction), fmt(it.residual), fmt(it.residual * static_cast<double>(r.N))});
  }
  o.payload = {{"n", n}, {"N", r.N}, {"nu4", r.nu4}, {"M4", r.m4}, {"exact_grid", r.exact_grid},
               {"midpoint_grid", r.midpoint_grid}, {"singular_measure", r.singular_measure}, {"items", items}};
  return o;
}

Output cmd_target(double s, double tol, u64 n_max, std::size_t limit) {
  auto r = find_angular_target(s, tol, n_max);
  if (limit && r.size() > limit) r.resize(limit);
  Output o;
  o.payload = json::array();
  o.csv = "n,N,nu4\n";
  for (const auto& t : r) {
    o.payload.push_back({{"n", t.n}, {"N", t.N}, {"nu4", t.nu4}});
    o.csv += csv_row({std::to_string(t.n), std::to_string(t.N), fmt(t.nu4)});
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arithmetic random waves: lattice points, correlations, Kac-Rice and nodal length"};
  app.require_subcommand(1);
  Config cfg;
  try {
    cfg = config_from_env();
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  std::string format = "json";
  bool no_cache = false;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--no-cache", no_cache, "Do not write a run record");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  app.add_option("--cache-dir", cfg.cache_dir, "Run record directory");
  app.set_version_flag("--version", ARW_VERSION);

  u64 n = 0;
  int l = 4;
  bool with_corr = false;
  std::vector<double> quasi_eps, thresholds{1, 2, 4, 8, 16, 32};
  u64 lo = 2, hi = 2000;
  std::string kind = "boundary_adapted";
  std::size_t trials = 300;
  std::uint64_t seed = 1;
  double target = -1.0, tol = 0.05;
  u64 n_max = 10000;
  std::size_t limit = 0, grid_M = 0;
  std::string out_path;

  auto* lattice = app.add_subcommand("lattice", "Lattice set, grid number and angular statistics");
  lattice->add_option("n", n)->required();

  auto* semicorr = app.add_subcommand("semicorr", "Correlation counts for one n");
  semicorr->add_option("n", n)->required();
  semicorr->add_option("--l", l, "Tuple length");
  semicorr->add_flag("--with-corr", with_corr, "Also count correlations and diagonal tuples");
  semicorr->add_option("--with-quasi", quasi_eps, "Quasi-correlation exponents");

  auto* scan = app.add_subcommand("scan", "Semi-correlation counts over a range of n");
  scan->add_option("--min", lo);
  scan->add_option("--max", hi);
  scan->add_option("--l", l);
  scan->add_option("--thresholds", thresholds)->delimiter(',');
  scan->add_flag("--with-corr", with_corr);

  auto* kacrice = app.add_subcommand("kacrice", "Kac-Rice expected nodal length");
  kacrice->add_option("n", n)->required();
  kacrice->add_option("--mq", cfg.mq, "Quadrature cells per axis");
  kacrice->add_option("--tolerance", cfg.kr_tolerance, "Allowed relative change on grid doubling");
  kacrice->add_option("--eps0", cfg.eps0);
  kacrice->add_option("--c0", cfg.c0);

  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo nodal length");
  montecarlo->add_option("n", n)->required();
  montecarlo->add_option("--kind", kind)->check(CLI::IsMember({"boundary_adapted", "boundary", "torus"}));
  montecarlo->add_option("--trials", trials);
  montecarlo->add_option("--ppw", cfg.ppw, "Grid points per wavelength");
  montecarlo->add_option("--seed", seed);

  auto* deficiency = app.add_subcommand("deficiency", "Kac-Rice total against the two-term prediction");
  deficiency->add_option("n", n)->required();
  deficiency->add_option("--trials", trials, "Monte Carlo trials (0 skips Monte Carlo)")->default_val(100);
  deficiency->add_option("--ppw", cfg.ppw);
  deficiency->add_option("--mq", cfg.mq);
  deficiency->add_option("--tolerance", cfg.kr_tolerance);
  deficiency->add_option("--seed", seed);

  auto* moments = app.add_subcommand("moments", "Integrals of the expansion terms");
  moments->add_option("n", n)->required();
  moments->add_option("--eps0", cfg.eps0);
  moments->add_option("--c0", cfg.c0);

  auto* tgt = app.add_subcommand("target", "Search n by the fourth angular coefficient");
  tgt->add_option("s", target)->required();
  tgt->add_option("--tol", tol);
  tgt->add_option("--max", n_max);
  tgt->add_option("--limit", limit, "Keep at most this many rows");

  auto* dump = app.add_subcommand("sample", "Dump one sampled field on a grid");
  dump->add_option("n", n)->required();
  dump->add_option("--kind", kind)->check(CLI::IsMember({"boundary_adapted", "boundary", "torus"}));
  dump->add_option("--seed", seed);
  dump->add_option("--grid", grid_M, "Nodes per axis (default from --ppw)");
  dump->add_option("--ppw", cfg.ppw);
  dump->add_option("--out", out_path, "Binary output file; CSV to stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Output out;
    json params;
    std::uint64_t run_seed = 0;
    if (command == "lattice") {
      params = {{"n", n}};
      out = cmd_lattice(n);
    } else if (command == "semicorr") {
      params = {{"n", n}, {"l", l}, {"with_corr", with_corr}, {"quasi", quasi_eps}};
      out = cmd_semicorr(n, l, with_corr, quasi_eps);
    } else if (command == "scan") {
      params = {{"min", lo}, {"max", hi}, {"l", l}, {"thresholds", thresholds}, {"with_corr", with_corr}};
      out = cmd_scan(lo, hi, l, thresholds, with_corr, cfg.threads);
    } else if (command == "kacrice") {
      params = {{"n", n}, {"mq", cfg.mq}, {"tolerance", cfg.kr_tolerance}};
      out = cmd_kacrice(n, cfg);
    } else if (command == "montecarlo") {
      params = {{"n", n}, {"kind", kind}, {"trials", trials}, {"ppw", cfg.ppw}};
      run_seed = seed;
      out = cmd_montecarlo(n, kind, trials, seed, cfg);
    } else if (command == "deficiency") {
      params = {{"n", n}, {"trials", trials}, {"ppw", cfg.ppw}, {"mq", cfg.mq}, {"tolerance", cfg.kr_tolerance}};
      run_seed = seed;
      out = cmd_deficiency(n, trials, seed, cfg);
    } else if (command == "moments") {
      params = {{"n", n}, {"eps0", cfg.eps0}, {"c0", cfg.c0}};
      out = cmd_moments(n, cfg);
    } else if (command == "target") {
      params = {{"s", target}, {"tol", tol}, {"max", n_max}, {"limit", limit}};
      out = cmd_target(target, tol, n_max, limit);
    } else if (command == "sample") {
      const auto s = enumerate_lattice_set(n);
      const auto k = parse_kind(kind);
      const std::size_t M = grid_M ? grid_M : monte_carlo_grid(k, n, cfg.ppw);
      const auto g = evaluate_grid(sample(k, s, seed), M, cfg.threads);
      params = {{"n", n}, {"kind", kind}, {"grid", M}};
      run_seed = seed;
      if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::binary);
        write_grid_binary(f, g);
        out.payload = {{"n", n}, {"kind", kind}, {"grid", M}, {"file", out_path}};
        out.csv = "n,kind,grid,file\n" + csv_row({std::to_string(n), kind, std::to_string(M), out_path});
      } else {
        std::ostringstream os;
        write_grid_csv(os, g);
        out.payload = {{"n", n}, {"kind", kind}, {"grid", M}};
        out.csv = os.str();
        format = "csv";
      }
    }

    if (format == "csv") {
      std::cout << out.csv;
    } else if (out.jsonl) {
      for (const auto& line : out.payload) std::cout << line.dump() << '\n';
    } else {
      std::cout << out.payload.dump() << '\n';
    }
    if (!no_cache) write_cache(cfg.cache_dir, command, params, run_seed, out.payload);
  } catch (const Error& e) {
    std::cout << json{{"error", to_string(e.code())}, {"message", e.what()}, {"command", command}}.dump() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
