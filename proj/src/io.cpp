#include "trifactor/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "trifactor/estimator.hpp"
#include "trifactor/inference.hpp"

namespace trifactor::io {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kHeader[] = {"exporter", "importer", "period", "value"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no,
                                      std::string_view source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw Error(ErrorKind::Data, std::string(source) + ": line " + std::to_string(line_no) +
                                     ": unterminated quoted field");
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

std::string quote_field(const std::string& s) {
  const bool needs = s.find_first_of(",\"\r\n") != std::string::npos ||
                     (!s.empty() && (s.front() == ' ' || s.back() == ' ' || s.front() == '\t' ||
                                     s.back() == '\t'));
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Row {
  std::string exporter, importer, period;
  double value;
  std::size_t line;
};

std::string triple(const std::string& e, const std::string& i, const std::string& p) {
  return "(" + e + ", " + i + ", " + p + ")";
}

Json vector_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
  return a;
}

std::string numbered(std::string_view prefix, std::size_t count, std::size_t from = 1) {
  std::string out;
  for (std::size_t k = 0; k < count; ++k) {
    out += ',';
    out += prefix;
    out += std::to_string(k + from);
  }
  return out;
}

// period,factor_k..,lower_k..,upper_k..
std::string factor_csv(const std::vector<std::string>& periods, const FactorBand& band) {
  const auto r = static_cast<std::size_t>(band.center.cols());
  std::string out = "period" + numbered("factor_", r) + numbered("lower_", r) +
                    numbered("upper_", r) + "\n";
  const Matrix lo = band.lower(), hi = band.upper();
  for (std::size_t t = 0; t < periods.size(); ++t) {
    out += quote_field(periods[t]);
    const auto tt = static_cast<Eigen::Index>(t);
    for (const Matrix* m : {&band.center, &lo, &hi})
      for (Eigen::Index k = 0; k < m->cols(); ++k) out += "," + format_real((*m)(tt, k));
    out += "\n";
  }
  return out;
}

// Rescales every column; warnings name the column.
Matrix rescale_columns(const Matrix& L, bool global, const std::string& what,
                       std::vector<std::string>& warnings) {
  Matrix out(L.rows(), L.cols());
  for (Eigen::Index k = 0; k < L.cols(); ++k) {
    Rescaled r = global ? rescale_global_loadings(L.col(k)) : rescale_country_loadings(L.col(k));
    if (r.warning) warnings.push_back(what + " loading column " + std::to_string(k + 1) + ": " + *r.warning);
    out.col(k) = r.values;
  }
  return out;
}

std::string country_loading_csv(const std::string& other_side, const std::vector<std::string>& labels,
                                const Matrix& L, const Matrix& rescaled) {
  const auto r = static_cast<std::size_t>(L.cols());
  std::string out = other_side + numbered("loading_", r) + numbered("rescaled_", r) + "\n";
  for (Eigen::Index row = 0; row < L.rows(); ++row) {
    out += quote_field(labels[static_cast<std::size_t>(row)]);
    for (Eigen::Index k = 0; k < L.cols(); ++k) out += "," + format_real(L(row, k));
    for (Eigen::Index k = 0; k < L.cols(); ++k) out += "," + format_real(rescaled(row, k));
    out += "\n";
  }
  return out;
}

}  // namespace

PanelTensor parse_long_csv(std::istream& in, const LoadOptions& options, std::string_view source) {
  const std::string src(source);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<Row> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split_record(line, line_no, src);
    if (!have_header) {
      bool ok = f.size() == 4;
      for (std::size_t k = 0; ok && k < 4; ++k) ok = f[k] == kHeader[k];
      if (!ok)
        throw Error(ErrorKind::Data, src + ": line " + std::to_string(line_no) +
                                         ": header must be exporter,importer,period,value");
      have_header = true;
      continue;
    }
    if (f.size() != 4)
      throw Error(ErrorKind::Data, src + ": line " + std::to_string(line_no) + ": expected 4 fields, found " +
                                       std::to_string(f.size()));
    for (std::size_t k = 0; k < 3; ++k)
      if (f[k].empty())
        throw Error(ErrorKind::Data, src + ": line " + std::to_string(line_no) + ": empty " +
                                         std::string(kHeader[k]) + " label");
    const std::optional<double> v = parse_real(f[3]);
    if (!v)
      throw Error(ErrorKind::Data, src + ": line " + std::to_string(line_no) + ": value '" + f[3] +
                                       "' is not a finite number");
    if (f[0] == f[1] && !options.allow_self_pairs)
      throw Error(ErrorKind::Data, src + ": line " + std::to_string(line_no) + ": self-pair " +
                                       triple(f[0], f[1], f[2]) + " is not allowed");
    rows.push_back(Row{std::move(f[0]), std::move(f[1]), std::move(f[2]), *v, line_no});
  }
  if (in.bad()) throw Error(ErrorKind::Io, src + ": read failed");
  if (!have_header) throw Error(ErrorKind::Data, src + ": empty file, header missing");
  if (rows.empty()) throw Error(ErrorKind::Data, src + ": no data rows");

  std::set<std::string> exp_set, imp_set;
  std::vector<std::string> periods;
  std::unordered_map<std::string, std::size_t> period_index;
  for (const Row& r : rows) {
    exp_set.insert(r.exporter);
    imp_set.insert(r.importer);
    if (period_index.emplace(r.period, periods.size()).second) periods.push_back(r.period);
  }
  std::vector<std::string> exporters(exp_set.begin(), exp_set.end());
  std::vector<std::string> importers(imp_set.begin(), imp_set.end());
  std::unordered_map<std::string, std::size_t> exp_index, imp_index;
  for (std::size_t k = 0; k < exporters.size(); ++k) exp_index[exporters[k]] = k;
  for (std::size_t k = 0; k < importers.size(); ++k) imp_index[importers[k]] = k;

  const std::size_t M = exporters.size(), N = importers.size(), T = periods.size();
  std::vector<double> values(M * N * T, 0.0);
  std::vector<std::size_t> seen_at(M * N * T, 0);  // line number, 0 = absent
  for (const Row& r : rows) {
    const std::size_t cell = exp_index[r.exporter] + M * (imp_index[r.importer] + N * period_index[r.period]);
    if (seen_at[cell] != 0)
      throw Error(ErrorKind::Data, src + ": line " + std::to_string(r.line) + ": duplicate row for " +
                                       triple(r.exporter, r.importer, r.period) + ", first given at line " +
                                       std::to_string(seen_at[cell]));
    seen_at[cell] = r.line;
    values[cell] = r.value;
  }

  std::size_t missing = 0;
  std::string listed;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t i = 0; i < M; ++i) {
        if (seen_at[i + M * (j + N * t)] != 0) continue;
        if (!options.allow_self_pairs && exporters[i] == importers[j]) continue;
        if (missing < 10) listed += (missing ? ", " : "") + triple(exporters[i], importers[j], periods[t]);
        ++missing;
      }
  if (missing > 0)
    throw Error(ErrorKind::Data, src + ": unbalanced panel, " + std::to_string(missing) +
                                     (missing == 1 ? " missing cell: " : " missing cells: ") + listed + (missing > 10 ? ", ..." : ""));

  return PanelTensor(M, N, T, std::move(values), std::move(exporters), std::move(importers),
                     std::move(periods));
}

PanelTensor load_long_csv(const fs::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_long_csv(in, options, path.string());
}

std::string format_real(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string panel_csv(const PanelTensor& p) {
  std::string out = "exporter,importer,period,value\n";
  for (std::size_t t = 0; t < p.T(); ++t)
    for (std::size_t j = 0; j < p.N(); ++j)
      for (std::size_t i = 0; i < p.M(); ++i) {
        const std::string& e = p.exporter_labels()[i];
        const std::string& m = p.importer_labels()[j];
        if (e == m && p(i, j, t) == 0.0) continue;
        out += quote_field(e) + "," + quote_field(m) + "," + quote_field(p.period_labels()[t]) + "," +
               format_real(p(i, j, t)) + "\n";
      }
  return out;
}

void write_panel(const fs::path& path, const PanelTensor& panel) {
  write_atomic(path, panel_csv(panel));
}

void write_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorKind::Io, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

Rescaled rescale_global_loadings(const Vector& column) {
  Rescaled out;
  if (column.size() == 0) return out;
  const double lo = column.minCoeff(), hi = column.maxCoeff();
  if (!(hi > lo)) {
    out.values = Vector::Constant(column.size(), 0.5);
    out.warning = "constant loadings, rescaled to 0.5";
    return out;
  }
  out.values = (column.array() - lo) / (hi - lo);
  return out;
}

Rescaled rescale_country_loadings(const Vector& column) {
  Rescaled out;
  out.values = column;
  if (column.size() == 0) return out;
  const double m = column.cwiseAbs().maxCoeff();
  if (m == 0.0) {
    out.warning = "all-zero loadings left unscaled";
    return out;
  }
  out.values = column / m;
  return out;
}

Json to_json(const SelectionDiagnostics& d) {
  Json j;
  j["chosen_k"] = d.chosen_k;
  j["omega"] = d.omega;
  j["mock"] = d.mock;
  j["eigenvalues"] = vector_json(d.eigenvalues);
  j["ratios"] = vector_json(d.ratios);
  j["criterion_values"] = vector_json(d.criterion_values);
  return j;
}

Json to_json(const McReport& report) {
  auto triple_json = [](const RateTriple& r) {
    Json j;
    j["correct"] = r.correct;
    j["under"] = r.under;
    j["over"] = r.over;
    return j;
  };
  Json j;
  j["seed"] = report.seed;
  j["k_max"] = report.k_max;
  j["cells"] = Json::array();
  for (const McCell& c : report.cells) {
    Json cell;
    cell["M"] = c.M;
    cell["N"] = c.N;
    cell["T"] = c.T;
    cell["replications"] = c.replications;
    cell["selection"]["global"] = triple_json(c.rates.global);
    cell["selection"]["exporter"] = triple_json(c.rates.exporter);
    cell["selection"]["importer"] = triple_json(c.rates.importer);
    cell["rmse"]["G"] = c.rmse.G;
    cell["rmse"]["E"] = c.rmse.E;
    cell["rmse"]["I"] = c.rmse.I;
    j["cells"].push_back(std::move(cell));
  }
  return j;
}

std::string mc_report_csv(const McReport& report) {
  std::string out =
      "M,N,T,P_gc,P_gu,P_go,P_Ec,P_Eu,P_Eo,P_Ic,P_Iu,P_Io,RMSE_G,RMSE_E,RMSE_I,replications\n";
  for (const McCell& c : report.cells) {
    out += std::to_string(c.M) + "," + std::to_string(c.N) + "," + std::to_string(c.T);
    for (const RateTriple* r : {&c.rates.global, &c.rates.exporter, &c.rates.importer})
      out += "," + format_real(r->correct) + "," + format_real(r->under) + "," + format_real(r->over);
    out += "," + format_real(c.rmse.G) + "," + format_real(c.rmse.E) + "," + format_real(c.rmse.I);
    out += "," + std::to_string(c.replications) + "\n";
  }
  return out;
}

std::vector<std::string> file_stems(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  std::set<std::string> used;
  for (const std::string& label : labels) {
    std::string s;
    for (unsigned char c : label)
      s += (std::isalnum(c) || c == '.' || c == '_' || c == '-') ? static_cast<char>(c) : '_';
    if (s.empty() || s == "." || s == "..") s = "_" + s;
    std::string candidate = s;
    for (std::size_t k = 2; used.count(candidate); ++k) candidate = s + "_" + std::to_string(k);
    used.insert(candidate);
    out.push_back(candidate);
  }
  return out;
}

Json ranks_json(const PanelTensor& panel, const Decomposition& d) {
  Json j;
  j["M"] = d.M;
  j["N"] = d.N;
  j["T"] = d.T;
  j["omega"] = d.global.omega;
  j["k_max"] = d.global.eigenvalues.size();
  j["global"]["rank"] = d.global.rank;
  j["global"]["diagnostics"] = to_json(diagnostics(d.global));
  j["exporters"] = Json::array();
  for (const CountryBlock& b : d.exporters) {
    Json e;
    e["label"] = panel.exporter_labels()[b.country];
    e["rank"] = b.rank;
    e["diagnostics"] = to_json(diagnostics(b, d.global.omega));
    j["exporters"].push_back(std::move(e));
  }
  j["importers"] = Json::array();
  for (const CountryBlock& b : d.importers) {
    Json e;
    e["label"] = panel.importer_labels()[b.country];
    e["rank"] = b.rank;
    e["diagnostics"] = to_json(diagnostics(b, d.global.omega));
    j["importers"].push_back(std::move(e));
  }
  j["warnings"] = d.warnings;
  return j;
}

Json residual_stats_json(const Decomposition& d) {
  double tss = 0.0, rss = 0.0, ss_g = 0.0, ss_e = 0.0, ss_i = 0.0, max_abs = 0.0;
  for (std::size_t t = 0; t < d.T; ++t)
    for (std::size_t j = 0; j < d.N; ++j)
      for (std::size_t i = 0; i < d.M; ++i) {
        const double g = d.global_part(i, j, t), e = d.exporter_part(i, j, t),
                     m = d.importer_part(i, j, t), u = d.residual(i, j, t);
        const double y = g + e + m + u;
        tss += y * y;
        rss += u * u;
        ss_g += g * g;
        ss_e += e * e;
        ss_i += m * m;
        max_abs = std::max(max_abs, std::abs(u));
      }
  const double n = static_cast<double>(d.M * d.N * d.T);
  auto share = [&](double ss) { return tss > 0.0 ? Json(ss / tss) : Json(nullptr); };
  Json j;
  j["observations"] = d.M * d.N * d.T;
  j["total_sum_of_squares"] = tss;
  j["residual_sum_of_squares"] = rss;
  j["r_squared"] = tss > 0.0 ? Json(1.0 - rss / tss) : Json(nullptr);
  j["residual_rms"] = std::sqrt(rss / n);
  j["residual_max_abs"] = max_abs;
  j["share"]["global"] = share(ss_g);
  j["share"]["exporter"] = share(ss_e);
  j["share"]["importer"] = share(ss_i);
  return j;
}

std::vector<std::string> write_decomposition(const fs::path& dir, const PanelTensor& panel,
                                             const Decomposition& d,
                                             const DecomposeOutputOptions& options) {
  if (panel.M() != d.M || panel.N() != d.N || panel.T() != d.T)
    throw Error(ErrorKind::Contract, "write_decomposition: panel and decomposition dimensions differ");
  normal_critical_value(options.level);
  std::vector<std::string> warnings = d.warnings;
  const auto& periods = panel.period_labels();
  const auto& exporters = panel.exporter_labels();
  const auto& importers = panel.importer_labels();

  write_atomic(dir / "global_factors.csv", factor_csv(periods, global_band(d, options.level)));

  {
    const Matrix& L = d.global.loadings;
    const Matrix R = rescale_columns(L, true, "global", warnings);
    const auto r = static_cast<std::size_t>(L.cols());
    std::string out = "exporter,importer" + numbered("loading_", r) + numbered("rescaled_", r) + "\n";
    for (std::size_t j = 0; j < d.N; ++j)
      for (std::size_t i = 0; i < d.M; ++i) {
        const auto row = static_cast<Eigen::Index>(stacked_row(i, j, d.M));
        out += quote_field(exporters[i]) + "," + quote_field(importers[j]);
        for (Eigen::Index k = 0; k < L.cols(); ++k) out += "," + format_real(L(row, k));
        for (Eigen::Index k = 0; k < L.cols(); ++k) out += "," + format_real(R(row, k));
        out += "\n";
      }
    write_atomic(dir / "global_loadings.csv", out);
  }

  const std::vector<std::string> exp_stems = file_stems(exporters);
  const std::vector<std::string> imp_stems = file_stems(importers);
  for (std::size_t i = 0; i < d.M; ++i) {
    const CountryBlock& b = d.exporters[i];
    const std::string stem = exp_stems[i] + ".csv";
    write_atomic(dir / "exporter_factors" / stem,
                 factor_csv(periods, country_band(d, Side::Exporter, i, options.level)));
    const Matrix R = rescale_columns(b.loadings, false, "exporter " + exporters[i], warnings);
    write_atomic(dir / "exporter_loadings" / stem, country_loading_csv("importer", importers, b.loadings, R));
  }
  for (std::size_t j = 0; j < d.N; ++j) {
    const CountryBlock& b = d.importers[j];
    const std::string stem = imp_stems[j] + ".csv";
    write_atomic(dir / "importer_factors" / stem,
                 factor_csv(periods, country_band(d, Side::Importer, j, options.level)));
    const Matrix R = rescale_columns(b.loadings, false, "importer " + importers[j], warnings);
    write_atomic(dir / "importer_loadings" / stem, country_loading_csv("exporter", exporters, b.loadings, R));
  }

  Json ranks = ranks_json(panel, d);
  ranks["warnings"] = warnings;
  write_atomic(dir / "ranks.json", ranks.dump(2) + "\n");
  write_atomic(dir / "residual_stats.json", residual_stats_json(d).dump(2) + "\n");
  return warnings;
}

}  // namespace trifactor::io
