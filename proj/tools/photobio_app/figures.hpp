#pragma once

// CSV bundles for re-plotting the neutral-curve, basic-state, time-series and
// frequency figures, plus a schema check used by the acceptance suite.

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "photobio_app/commands.hpp"

namespace photobio::app {

struct BundleFile {
  std::filesystem::path path;
  std::vector<std::string> columns;
};

namespace figure_params {

inline Params shallow(double R_T = 0.0) {
  Params p;
  p.hbar = 0.5;
  p.U_s = 10.0;
  p.set_Gc(0.68);
  p.R_T = R_T;
  return p;
}

inline Params deep(double Gc, double R_T = 0.0) {
  Params p;
  p.hbar = 0.5;
  p.U_s = 15.0;
  p.set_Gc(Gc);
  p.R_T = R_T;
  return p;
}

inline Params thick(double R_T = -500.0) {
  Params p;
  p.hbar = 1.0;
  p.U_s = 15.0;
  p.set_chi(-0.485);
  p.R_T = R_T;
  return p;
}

inline const std::vector<double> kRT{0.0, -250.0, -500.0, -1000.0};

}  // namespace figure_params

namespace detail {

inline RunConfig config_for(const Params& p, const std::string& dir) {
  RunConfig c;
  c.params = p;
  c.Gc_given = true;
  c.output_dir = dir;
  return c;
}

inline BundleFile write_csv(const std::filesystem::path& dir, const std::string& stem, const RunConfig& c,
                            const std::string& command, const std::string& schema,
                            const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows,
                            KeyValues extra = {}) {
  const auto path = dir / (stem + ".csv");
  CsvWriter w(path, make_metadata(command, c, std::move(extra)), schema, columns);
  for (const auto& r : rows) w.row(r);
  return {path, columns};
}

/// Neutral curves over the R_T list plus the critical point per R_T.
inline void neutral_family(std::vector<BundleFile>& out, Workbench& wb, const std::filesystem::path& dir,
                           const std::string& stem, const std::function<Params(double)>& make) {
  std::vector<std::vector<std::string>> curves, crit;
  for (double rt : figure_params::kRT) {
    const Params p = make(rt);
    const auto an = wb.neutral(p);
    const auto r = neutral_rows(*an, p);
    curves.insert(curves.end(), r.begin(), r.end());
    if (an->critical) {
      const auto& cp = *an->critical;
      const auto per = cp.period();
      crit.push_back({fmt12(rt), fmt12(cp.a), fmt12(cp.Ra), fmt12(cp.omega), to_string(cp.kind),
                      per ? fmt12(*per) : "nan", ""});
    }
  }
  const RunConfig c = config_for(make(0.0), dir.string());
  out.push_back(write_csv(dir, stem + "_neutral", c, "repro", schema::neutral, kNeutralColumns, curves,
                          {{"varied", "R_T"}}));
  out.push_back(write_csv(dir, stem + "_critical", c, "repro", schema::sweep, kSweepColumns, crit,
                          {{"varied", "R_T"}}));
}

inline void basic_profile(std::vector<BundleFile>& out, Workbench& wb, const std::filesystem::path& dir,
                          const std::string& stem, const Params& p) {
  const auto b = wb.basic(p);
  std::vector<std::vector<std::string>> rows;
  const auto temp = b->temperature();
  for (std::size_t i = 0; i < b->x().size(); i += 4) {
    rows.push_back({fmt12(b->x()[i]), fmt12(b->n()[i]), fmt12(b->intensity()[i]), fmt12(b->taxis_values()[i]),
                    fmt12(temp[i])});
  }
  out.push_back(write_csv(dir, stem + "_basic", config_for(p, dir.string()), "repro", schema::basic_state,
                          kBasicColumns, rows));
}

}  // namespace detail

/// Writes every bundle into `dir` and returns the files written.
inline std::vector<BundleFile> write_figure_bundles(const std::filesystem::path& dir, Workbench& wb) {
  namespace fp = figure_params;
  prepare_dir(dir.string());
  std::vector<BundleFile> out;

  detail::neutral_family(out, wb, dir, "fig02", [](double rt) { return fp::shallow(rt); });
  const std::pair<int, double> deep_cases[] = {{5, 0.8}, {6, 0.68}, {7, 0.65}, {8, 0.63}};
  for (const auto& [fig, gc] : deep_cases) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "fig%02d", fig);
    detail::basic_profile(out, wb, dir, stem, fp::deep(gc));
    detail::neutral_family(out, wb, dir, stem, [gc = gc](double rt) { return fp::deep(gc, rt); });
  }
  detail::neutral_family(out, wb, dir, "fig09", [](double rt) { return fp::thick(rt); });

  // Time series and phase portrait at the oscillatory critical point.
  const Params p = fp::thick(-500.0);
  const auto an = wb.neutral(p);
  const auto b = wb.basic(p);
  const StabilityProblem sp(p, *b);
  RunConfig c = detail::config_for(p, dir.string());
  if (an->critical) {
    const auto& cp = *an->critical;
    const Eigenmode m = extract_eigenmode(sp, {cp.a, cp.Ra, cplx{0.0, cp.omega}});
    out.push_back(detail::write_csv(dir, "fig11_timeseries", c, "repro", schema::phase, kPhaseColumns,
                                    phase_rows(0, m, c), {{"probe", "x1 = lambda/4, x3 = 0.5"}}));
  }

  // Frequency along the oscillatory branch, and damped orbits of a few
  // wavenumbers on it held at the critical Ra.
  std::vector<std::vector<std::string>> freq;
  for (const auto& br : an->oscillatory) {
    for (const auto& s : br.samples) freq.push_back({fmt12(s.a), fmt12(s.Ra), fmt12(s.omega)});
  }
  out.push_back(detail::write_csv(dir, "fig12_frequency", c, "repro", schema::neutral, {"a", "Ra", "omega"}, freq));
  if (an->critical) {
    std::vector<std::vector<std::string>> orbits;
    int pair = 0;
    for (double a : {2.5, 3.5, 4.5}) {
      const auto g = leading_growth_rate(sp, *b, a, an->critical->Ra);
      if (!g) continue;
      const auto r = phase_rows(pair++, extract_eigenmode(sp, {a, an->critical->Ra, *g}), c);
      orbits.insert(orbits.end(), r.begin(), r.end());
    }
    out.push_back(detail::write_csv(dir, "fig12_orbits", c, "repro", schema::phase, kPhaseColumns, orbits,
                                    {{"orbits", "a = 2.5, 3.5, 4.5 at the critical Ra"}}));
  }
  return out;
}

/// Header matches, at least one row, uniform width, numeric cells parse.
inline std::string validate_bundle_file(const BundleFile& f) {
  static const std::set<std::string> text{"branch", "kind", "error"};
  std::ifstream in(f.path);
  if (!in) return "missing " + f.path.filename().string();
  std::string line;
  bool header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> raw;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) raw.push_back(cell);
    if (line.back() == ',') raw.emplace_back();
    if (!header) {
      if (raw != f.columns) return f.path.filename().string() + ": header mismatch";
      header = true;
      continue;
    }
    if (raw.size() != f.columns.size()) return f.path.filename().string() + ": ragged row";
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (text.count(f.columns[i])) continue;
      char* end = nullptr;
      std::strtod(raw[i].c_str(), &end);
      if (raw[i].empty() || *end != '\0') return f.path.filename().string() + ": bad number '" + raw[i] + "'";
    }
    ++rows;
  }
  if (!header) return f.path.filename().string() + ": no header";
  if (rows == 0) return f.path.filename().string() + ": no data rows";
  return {};
}

}  // namespace photobio::app
