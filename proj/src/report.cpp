#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ucn/csvio.hpp"
#include "ucn/kv.hpp"
#include "ucn/pipeline.hpp"

namespace ucn {

namespace fs = std::filesystem;

namespace {

std::string alpha_tag(double alpha) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", alpha);
  return buf;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct CellKey {
  std::string algorithm;
  double alpha;
  bool operator<(const CellKey& o) const {
    if (algorithm != o.algorithm) return algorithm < o.algorithm;
    return alpha < o.alpha;
  }
};

struct SchemeStats {
  int total = 0;
  int ok = 0;
  double reported_sum = 0.0;
  double validated_sum = 0.0;
  std::vector<int> iterations;
  const TrialRecord* best = nullptr;  // highest validated objective

  void add(const TrialRecord& r) {
    ++total;
    if (r.failed) return;
    ++ok;
    reported_sum += r.reported_objective;
    validated_sum += r.validated_objective;
    iterations.push_back(r.opt.iterations_to_converge);
    if (best == nullptr || r.validated_objective > best->validated_objective)
      best = &r;
  }
  double reported_mean() const { return ok ? reported_sum / ok : 0.0; }
  double validated_mean() const { return ok ? validated_sum / ok : 0.0; }
  double iters_median() const {
    if (iterations.empty()) return 0.0;
    std::vector<int> v = iterations;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
};

// Minimal SVG canvas; output depends only on the draw calls.
class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
          << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
          << "\">\n";
    body_ << "<rect width=\"" << w << "\" height=\"" << h
          << "\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* color,
            double width = 1.0, bool dashed = false) {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
          << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color
          << "\" stroke-width=\"" << fmt(width) << "\"";
    if (dashed) body_ << " stroke-dasharray=\"6 4\"";
    body_ << "/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* color, double width = 1.5) {
    body_ << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"" << fmt(width) << "\" points=\"";
    for (const auto& [x, y] : pts) body_ << fmt(x) << "," << fmt(y) << " ";
    body_ << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const char* stroke,
            const char* fill) {
    body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(w) << "\" height=\"" << fmt(h) << "\" stroke=\"" << stroke
          << "\" fill=\"" << fill << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const char* anchor = "start") {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
          << "\" font-family=\"sans-serif\" font-size=\"" << size
          << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }
  void save(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << body_.str() << "</svg>\n";
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

void plot_convergence(const CellKey& cell,
                      const std::map<std::string, std::vector<double>>& means,
                      const std::map<std::string, double>& validated,
                      const std::string& path) {
  const double W = 640, H = 420, L = 60, R = 20, T = 30, B = 45;
  std::size_t max_len = 1;
  double lo = 1e300, hi = -1e300;
  for (const auto& [_, m] : means) {
    max_len = std::max(max_len, m.size());
    for (double v : m) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  for (const auto& [_, v] : validated) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  auto sx = [&](double i) {
    return L + (W - L - R) * i / static_cast<double>(max_len - 1 ? max_len - 1 : 1);
  };
  auto sy = [&](double v) { return H - B - (H - T - B) * (v - lo) / (hi - lo); };

  Svg svg(W, H);
  svg.line(L, H - B, W - R, H - B, "black");
  svg.line(L, T, L, H - B, "black");
  svg.text(W / 2, H - 10, "iteration", 12, "middle");
  svg.text(15, T - 10, "objective (best so far)");
  svg.text(W / 2, 18, cell.algorithm + ", alpha_se = " + alpha_tag(cell.alpha),
           13, "middle");
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    svg.line(L - 4, sy(v), L, sy(v), "black");
    svg.text(L - 8, sy(v) + 4, fmt(v, "%.3g"), 10, "end");
  }
  const std::map<std::string, const char*> colors = {
      {"baseline", "#1f6fb4"}, {"ddoec", "#2c8a3d"}};
  double legend_y = T + 14;
  for (const auto& [scheme, m] : means) {
    const char* color =
        colors.count(scheme) ? colors.at(scheme) : "#888888";
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < m.size(); ++i) pts.push_back({sx(i), sy(m[i])});
    svg.polyline(pts, color);
    auto it = validated.find(scheme);
    if (it != validated.end())
      svg.line(L, sy(it->second), W - R, sy(it->second), color, 1.0, true);
    svg.line(L + 10, legend_y, L + 34, legend_y, color, 2.0);
    svg.text(L + 40, legend_y + 4, scheme + " (dashed: simulator-validated)",
             11);
    legend_y += 16;
  }
  svg.save(path);
}

void plot_iterations(const std::string& algorithm,
                     const std::map<std::pair<std::string, std::string>,
                                    std::vector<int>>& groups,
                     const std::string& path) {
  const double W = 640, H = 420, L = 60, R = 20, T = 30, B = 70;
  double hi = 1.0;
  for (const auto& [_, v] : groups)
    for (int it : v) hi = std::max(hi, static_cast<double>(it));
  hi *= 1.08;

  auto sy = [&](double v) { return H - B - (H - T - B) * v / hi; };
  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] * (1 - frac) + v[i + 1] * frac : v[i];
  };

  Svg svg(W, H);
  svg.line(L, H - B, W - R, H - B, "black");
  svg.line(L, T, L, H - B, "black");
  svg.text(W / 2, 18, algorithm + ": iterations to converge", 13, "middle");
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = hi * tick / 4.0;
    svg.line(L - 4, sy(v), L, sy(v), "black");
    svg.text(L - 8, sy(v) + 4, fmt(v, "%.0f"), 10, "end");
  }
  const double slot = (W - L - R) / std::max<std::size_t>(groups.size(), 1);
  double x = L + slot / 2;
  for (const auto& [key, ints] : groups) {
    if (!ints.empty()) {
      std::vector<double> v(ints.begin(), ints.end());
      const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5),
                   q3 = quantile(v, 0.75);
      const double vmin = *std::min_element(v.begin(), v.end());
      const double vmax = *std::max_element(v.begin(), v.end());
      const double bw = std::min(40.0, slot * 0.5);
      svg.line(x, sy(vmin), x, sy(vmax), "black");
      svg.rect(x - bw / 2, sy(q3), bw, sy(q1) - sy(q3), "black", "#cfe3f5");
      svg.line(x - bw / 2, sy(q2), x + bw / 2, sy(q2), "black", 2.0);
    }
    svg.text(x, H - B + 16, key.first, 10, "middle");
    svg.text(x, H - B + 30, "a=" + key.second, 10, "middle");
    x += slot;
  }
  svg.save(path);
}

}  // namespace

void emit_report(const std::vector<TrialRecord>& records,
                 const std::string& out_dir) {
  if (records.empty())
    throw std::invalid_argument("emit_report: no trial records");
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "traces");
  fs::create_directories(fs::path(out_dir) / "plots");

  // records.csv
  {
    CsvWriter w({"algorithm", "scheme", "alpha_se", "trial", "trial_seed",
                 "best_lambda_dbs", "best_r_sz_m", "best_p_tx_dbm",
                 "reported_objective", "validated_objective",
                 "validated_ase_norm", "validated_ee_norm",
                 "iterations_to_converge", "total_iterations", "status",
                 "error"});
    for (const auto& r : records) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      w.add_row({r.algorithm, r.scheme, format_double(r.alpha_se),
                 std::to_string(r.trial_index), std::to_string(r.trial_seed),
                 format_double(r.opt.best_cop.lambda_dbs),
                 format_double(r.opt.best_cop.r_sz),
                 format_double(r.opt.best_cop.p_tx_dbm),
                 format_double(r.reported_objective),
                 format_double(r.validated_objective),
                 format_double(r.validated_ase_norm),
                 format_double(r.validated_ee_norm),
                 std::to_string(r.opt.iterations_to_converge),
                 std::to_string(r.opt.trace.empty()
                                    ? 0
                                    : r.opt.trace.size() - 1),
                 r.failed ? "failed" : "ok", err});
    }
    w.save((fs::path(out_dir) / "records.csv").string());
  }

  // iterations.csv
  {
    CsvWriter w({"algorithm", "scheme", "alpha_se", "trial",
                 "iterations_to_converge", "total_iterations"});
    for (const auto& r : records) {
      if (r.failed) continue;
      w.add_row({r.algorithm, r.scheme, format_double(r.alpha_se),
                 std::to_string(r.trial_index),
                 std::to_string(r.opt.iterations_to_converge),
                 std::to_string(r.opt.trace.empty()
                                    ? 0
                                    : r.opt.trace.size() - 1)});
    }
    w.save((fs::path(out_dir) / "iterations.csv").string());
  }

  // traces/<algo>_<scheme>_<alpha>.csv, one column per trial padded with the
  // final best value.
  {
    std::map<std::tuple<std::string, std::string, double>,
             std::vector<const TrialRecord*>> cells;
    for (const auto& r : records)
      if (!r.failed)
        cells[{r.algorithm, r.scheme, r.alpha_se}].push_back(&r);
    for (auto& [key, cell] : cells) {
      std::sort(cell.begin(), cell.end(),
                [](const TrialRecord* a, const TrialRecord* b) {
                  return a->trial_index < b->trial_index;
                });
      std::size_t max_len = 0;
      for (const auto* r : cell) max_len = std::max(max_len, r->opt.trace.size());
      std::vector<std::string> header = {"iter"};
      for (const auto* r : cell)
        header.push_back("trial_" + std::to_string(r->trial_index));
      CsvWriter w(header);
      for (std::size_t i = 0; i < max_len; ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (const auto* r : cell) {
          const auto& tr = r->opt.trace;
          const double v = i < tr.size() ? tr[i] : tr.back();
          row.push_back(format_double(v));
        }
        w.add_row(std::move(row));
      }
      const std::string name = std::get<0>(key) + "_" + std::get<1>(key) +
                               "_" + alpha_tag(std::get<2>(key)) + ".csv";
      w.save((fs::path(out_dir) / "traces" / name).string());
    }
  }

  // summary.csv: one row per (algorithm, weight case).
  {
    std::map<CellKey, std::map<std::string, SchemeStats>> cells;
    for (const auto& r : records)
      cells[{r.algorithm, r.alpha_se}][r.scheme].add(r);

    CsvWriter w({"algorithm", "alpha_se",
                 "baseline_reported_mean", "baseline_validated_mean",
                 "baseline_best_lambda_dbs", "baseline_best_r_sz_m",
                 "baseline_best_p_tx_dbm", "baseline_iters_median",
                 "baseline_trials_ok",
                 "ddoec_reported_mean", "ddoec_validated_mean",
                 "ddoec_best_lambda_dbs", "ddoec_best_r_sz_m",
                 "ddoec_best_p_tx_dbm", "ddoec_iters_median",
                 "ddoec_trials_ok", "relative_gain", "status"});
    for (const auto& [key, schemes] : cells) {
      auto stats_for = [&](const char* name) -> const SchemeStats* {
        auto it = schemes.find(name);
        return it == schemes.end() ? nullptr : &it->second;
      };
      const SchemeStats* base = stats_for("baseline");
      const SchemeStats* ddoec = stats_for("ddoec");
      auto cop_fields = [](const SchemeStats* s) {
        std::vector<std::string> f = {"", "", ""};
        if (s && s->best) {
          f[0] = format_double(s->best->opt.best_cop.lambda_dbs);
          f[1] = format_double(s->best->opt.best_cop.r_sz);
          f[2] = format_double(s->best->opt.best_cop.p_tx_dbm);
        }
        return f;
      };
      auto scheme_cols = [&](const SchemeStats* s) {
        std::vector<std::string> f;
        f.push_back(s ? format_double(s->reported_mean()) : "");
        f.push_back(s ? format_double(s->validated_mean()) : "");
        const auto cop = cop_fields(s);
        f.insert(f.end(), cop.begin(), cop.end());
        f.push_back(s ? format_double(s->iters_median()) : "");
        f.push_back(s ? std::to_string(s->ok) + "/" + std::to_string(s->total)
                      : "");
        return f;
      };
      std::vector<std::string> row = {key.algorithm, format_double(key.alpha)};
      auto b = scheme_cols(base);
      auto d = scheme_cols(ddoec);
      row.insert(row.end(), b.begin(), b.end());
      row.insert(row.end(), d.begin(), d.end());
      const bool complete = base && ddoec && base->ok == base->total &&
                            ddoec->ok == ddoec->total && base->ok > 0;
      const double gain =
          (base && ddoec && base->validated_mean() > 0.0)
              ? (ddoec->validated_mean() - base->validated_mean()) /
                    base->validated_mean()
              : 0.0;
      row.push_back(format_double(gain));
      row.push_back(complete ? "complete" : "incomplete");
      w.add_row(std::move(row));
    }
    w.save((fs::path(out_dir) / "summary.csv").string());
  }

  // Plots.
  {
    std::map<CellKey, std::map<std::string, std::vector<double>>> mean_traces;
    std::map<CellKey, std::map<std::string, double>> validated_means;
    std::map<CellKey, std::map<std::string, int>> counts;
    for (const auto& r : records) {
      if (r.failed) continue;
      const CellKey key{r.algorithm, r.alpha_se};
      auto& acc = mean_traces[key][r.scheme];
      const auto& tr = r.opt.trace;
      if (acc.size() < tr.size()) {
        // Extend, carrying previous trials' final values forward.
        acc.resize(tr.size(), acc.empty() ? 0.0 : acc.back());
      }
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += (i < tr.size() ? tr[i] : tr.back());
      validated_means[key][r.scheme] += r.validated_objective;
      counts[key][r.scheme] += 1;
    }
    for (auto& [key, schemes] : mean_traces) {
      for (auto& [scheme, acc] : schemes) {
        const int n = counts[key][scheme];
        for (auto& v : acc) v /= n;
        validated_means[key][scheme] /= n;
      }
      const std::string name = "convergence_" + key.algorithm + "_" +
                               alpha_tag(key.alpha) + ".svg";
      plot_convergence(key, schemes, validated_means[key],
                       (fs::path(out_dir) / "plots" / name).string());
    }

    std::map<std::string,
             std::map<std::pair<std::string, std::string>, std::vector<int>>>
        iter_groups;
    for (const auto& r : records)
      if (!r.failed)
        iter_groups[r.algorithm][{r.scheme, alpha_tag(r.alpha_se)}].push_back(
            r.opt.iterations_to_converge);
    for (const auto& [algo, groups] : iter_groups)
      plot_iterations(algo, groups,
                      (fs::path(out_dir) / "plots" /
                       ("iterations_" + algo + ".svg"))
                          .string());
  }
}

std::vector<TrialRecord> load_records(const std::string& experiment_dir) {
  const fs::path dir(experiment_dir);
  const CsvTable t = read_csv((dir / "records.csv").string());
  const std::size_t c_algo = t.column("algorithm");
  const std::size_t c_scheme = t.column("scheme");
  const std::size_t c_alpha = t.column("alpha_se");
  const std::size_t c_trial = t.column("trial");
  const std::size_t c_seed = t.column("trial_seed");
  const std::size_t c_bl = t.column("best_lambda_dbs");
  const std::size_t c_br = t.column("best_r_sz_m");
  const std::size_t c_bp = t.column("best_p_tx_dbm");
  const std::size_t c_rep = t.column("reported_objective");
  const std::size_t c_val = t.column("validated_objective");
  const std::size_t c_van = t.column("validated_ase_norm");
  const std::size_t c_ven = t.column("validated_ee_norm");
  const std::size_t c_iter = t.column("iterations_to_converge");
  const std::size_t c_total = t.column("total_iterations");
  const std::size_t c_status = t.column("status");
  const std::size_t c_error = t.column("error");

  std::vector<TrialRecord> records;
  for (const auto& row : t.rows) {
    TrialRecord r;
    r.algorithm = row[c_algo];
    r.scheme = row[c_scheme];
    r.alpha_se = parse_double(row[c_alpha], "records.csv alpha_se");
    r.trial_index = static_cast<int>(
        parse_double(row[c_trial], "records.csv trial"));
    r.trial_seed = std::stoull(row[c_seed]);
    r.opt.best_cop.lambda_dbs = parse_double(row[c_bl], "records.csv cop");
    r.opt.best_cop.r_sz = parse_double(row[c_br], "records.csv cop");
    r.opt.best_cop.p_tx_dbm = parse_double(row[c_bp], "records.csv cop");
    r.reported_objective = parse_double(row[c_rep], "records.csv reported");
    r.validated_objective = parse_double(row[c_val], "records.csv validated");
    r.validated_ase_norm = parse_double(row[c_van], "records.csv ase_norm");
    r.validated_ee_norm = parse_double(row[c_ven], "records.csv ee_norm");
    r.opt.iterations_to_converge =
        static_cast<int>(parse_double(row[c_iter], "records.csv iterations"));
    r.failed = row[c_status] != "ok";
    r.error = row[c_error];
    r.opt.best_value = r.reported_objective;
    records.push_back(std::move(r));
  }

  // Re-attach traces where available, dropping the padding added by
  // emit_report so a re-emit reproduces the original files byte for byte.
  std::size_t rec_index = 0;
  for (auto& r : records) {
    const std::size_t total = static_cast<std::size_t>(parse_double(
        t.rows[rec_index++][c_total], "records.csv total_iterations"));
    if (r.failed) continue;
    const std::string name =
        r.algorithm + "_" + r.scheme + "_" + alpha_tag(r.alpha_se) + ".csv";
    const fs::path tp = dir / "traces" / name;
    if (!fs::exists(tp)) continue;
    const CsvTable tt = read_csv(tp.string());
    const std::string col = "trial_" + std::to_string(r.trial_index);
    std::size_t ci;
    try {
      ci = tt.column(col);
    } catch (const std::exception&) {
      continue;
    }
    r.opt.trace.clear();
    for (const auto& row : tt.rows)
      r.opt.trace.push_back(parse_double(row[ci], "trace value"));
    if (r.opt.trace.size() > total + 1) r.opt.trace.resize(total + 1);
  }
  return records;
}

}  // namespace ucn
