#include "trifactor/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "CLI11.hpp"
#include "trifactor/estimator.hpp"
#include "trifactor/io.hpp"
#include "trifactor/simulate.hpp"

namespace trifactor {

namespace {

namespace fs = std::filesystem;

// Raised for bad flags or malformed flag values; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_error(std::ostream& err, std::string_view kind, std::string_view message) {
  io::Json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

void emit_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) {
    io::Json j;
    j["warning"] = w;
    err << j.dump() << '\n';
  }
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError(std::string(what) + ": '" + std::string(text) + "' is not a non-negative integer");
  return v;
}

// "M,N,T;M,N,T" with optional spaces.
std::vector<Dims> parse_dims(const std::string& text) {
  std::vector<Dims> out;
  std::string cleaned;
  std::remove_copy_if(text.begin(), text.end(), std::back_inserter(cleaned),
                      [](unsigned char c) { return std::isspace(c) != 0; });
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    const std::size_t end = std::min(cleaned.find(';', start), cleaned.size());
    const std::string cell = cleaned.substr(start, end - start);
    start = end + 1;
    if (cell.empty()) continue;
    std::size_t v[3];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t comma = k < 2 ? cell.find(',', pos) : cell.size();
      if (comma == std::string::npos) throw UsageError("--dims: cell '" + cell + "' needs three values M,N,T");
      v[k] = parse_count(std::string_view(cell).substr(pos, comma - pos), "--dims");
      if (v[k] == 0) throw UsageError("--dims: dimensions must be positive in '" + cell + "'");
      pos = comma + 1;
    }
    if (pos <= cell.size()) throw UsageError("--dims: cell '" + cell + "' has more than three values");
    out.push_back(Dims{v[0], v[1], v[2]});
  }
  if (out.empty()) throw UsageError("--dims: no cells given");
  return out;
}

std::size_t resolve_threads(const std::optional<std::size_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TRIFACTOR_THREADS"); env && *env)
    return parse_count(env, "TRIFACTOR_THREADS");
  return 0;
}

void check_run_config(const RunConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

int run_decompose(const RunConfig& c, const fs::path& input, std::ostream& out, std::ostream& err) {
  const PanelTensor raw = io::load_long_csv(input, io::LoadOptions{c.allow_self_pairs});
  const PanelTensor panel = c.standardize ? standardize_series(raw) : raw;
  DecomposeConfig dc;
  dc.k_max = c.k_max;
  dc.omega_override = c.omega_override;
  dc.threads = c.threads;
  const Decomposition d = decompose(panel, dc);
  const std::vector<std::string> warnings =
      io::write_decomposition(c.output_dir, panel, d, io::DecomposeOutputOptions{c.confidence_level});
  emit_warnings(err, warnings);

  io::Json summary;
  summary["output_dir"] = c.output_dir.string();
  summary["M"] = d.M;
  summary["N"] = d.N;
  summary["T"] = d.T;
  summary["r_g"] = d.global.rank;
  out << summary.dump() << '\n';
  return 0;
}

int run_simulate(const RunConfig& c, int dgp, const std::string& dims, std::size_t reps,
                 std::ostream& out) {
  if (dgp != 1 && dgp != 2) throw UsageError("--dgp must be 1 or 2");
  if (reps == 0) throw UsageError("--reps must be at least 1");
  const std::vector<Dims> cells = parse_dims(dims);
  const std::uint64_t seed = c.seed.value_or(kDefaultSeed);
  const DgpTemplate tpl = dgp == 1 ? dgp1(seed) : dgp2(seed);
  const McReport report = run_monte_carlo(tpl, cells, reps, c.k_max, c.threads);
  io::write_atomic(c.output_dir / "mc_report.csv", io::mc_report_csv(report));
  io::write_atomic(c.output_dir / "mc_report.json", io::to_json(report).dump(2) + "\n");
  out << io::mc_report_csv(report);
  return 0;
}

int run_select(const RunConfig& c, const fs::path& input, std::ostream& out) {
  const PanelTensor raw = io::load_long_csv(input, io::LoadOptions{c.allow_self_pairs});
  const PanelTensor panel = c.standardize ? standardize_series(raw) : raw;
  const double w = c.omega_override ? *c.omega_override : omega(panel.M(), panel.N(), panel.T());
  const GlobalBlock g = estimate_global(panel, c.k_max, w);
  io::Json j;
  j["M"] = panel.M();
  j["N"] = panel.N();
  j["T"] = panel.T();
  j["k_max"] = c.k_max;
  j["r_g"] = g.rank;
  j["diagnostics"] = io::to_json(diagnostics(g));
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  if (k_max < 1) throw Error(ErrorKind::Config, "k_max must be at least 1");
  if (!(confidence_level > 0.0 && confidence_level < 1.0))
    throw Error(ErrorKind::Config, "confidence level must lie in (0, 1)");
  if (omega_override && !(*omega_override > 0.0 && std::isfinite(*omega_override)))
    throw Error(ErrorKind::Config, "omega must be a positive finite number");
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global, exporter and importer factors of a bilateral panel", "trifactor"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::optional<std::size_t> threads;
  std::optional<double> omega_flag;
  std::optional<std::uint64_t> seed_flag;
  std::string input, dims;
  int dgp = 0;
  std::size_t reps = 200;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--k-max", cfg.k_max, "Largest factor count considered")->capture_default_str();
    sub->add_option("--omega", omega_flag, "Override the eigenvalue threshold 1/ln(max(M,N,T))");
    sub->add_option("--threads", threads, "Worker threads, 0 = all cores (env TRIFACTOR_THREADS)");
  };
  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input", input, "Long CSV: exporter,importer,period,value")->required();
    sub->add_flag("--standardize", cfg.standardize, "Demean and scale each pair series to unit variance");
    sub->add_flag("--allow-self-pairs", cfg.allow_self_pairs, "Accept rows with exporter == importer");
  };

  CLI::App* dec = app.add_subcommand("decompose", "Estimate all factor blocks and write them to a directory");
  add_input(dec);
  add_common(dec);
  dec->add_option("--out", cfg.output_dir, "Output directory")->required();
  dec->add_option("--level", cfg.confidence_level, "Confidence level of the factor bands")->capture_default_str();

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo over the simulation designs");
  add_common(sim);
  sim->add_option("--dgp", dgp, "Design: 1 (i.i.d.) or 2 (AR(1), phi = 0.5)")->required();
  sim->add_option("--dims", dims, "Cells as \"M,N,T;M,N,T\"")->required();
  sim->add_option("--reps", reps, "Replications per cell")->capture_default_str();
  sim->add_option("--seed", seed_flag, "Master seed (default 12345)");
  sim->add_option("--out", cfg.output_dir, "Output directory")->capture_default_str();

  CLI::App* sel = app.add_subcommand("select", "Print the global eigenvalue ladder and selected rank");
  add_input(sel);
  add_common(sel);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    cfg.omega_override = omega_flag;
    cfg.seed = seed_flag;
    cfg.threads = resolve_threads(threads);
    check_run_config(cfg);

    if (dec->parsed()) return run_decompose(cfg, input, out, err);
    if (sim->parsed()) return run_simulate(cfg, dgp, dims, reps, out);
    return run_select(cfg, input, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return 2;
  } catch (const UsageError& e) {
    emit_error(err, "usage", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(err, to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return 1;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return cli_main(args, out, err);
}

}  // namespace trifactor
