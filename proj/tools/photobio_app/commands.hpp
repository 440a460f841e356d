#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "photobio_app/config.hpp"
#include "photobio_app/output.hpp"
#include "photobio_app/workbench.hpp"

namespace photobio::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitAcceptance = 4;

namespace schema {
inline constexpr const char* taxis = "photobio.taxis/1";
inline constexpr const char* taxis_table = "photobio.taxis_table/1";
inline constexpr const char* basic_state = "photobio.basic_state/1";
inline constexpr const char* basic_summary = "photobio.basic_summary/1";
inline constexpr const char* dispersion = "photobio.dispersion/1";
inline constexpr const char* spectrum = "photobio.spectrum/1";
inline constexpr const char* neutral = "photobio.neutral/1";
inline constexpr const char* neutral_summary = "photobio.neutral_summary/1";
inline constexpr const char* critical = "photobio.critical/1";
inline constexpr const char* sweep = "photobio.sweep/1";
inline constexpr const char* field = "photobio.field/1";
inline constexpr const char* fields_manifest = "photobio.fields_manifest/1";
inline constexpr const char* phase = "photobio.phase/1";
}  // namespace schema

inline const std::vector<std::string> kNeutralColumns{"R_T", "Le", "branch", "kind", "a", "Ra", "omega"};
inline const std::vector<std::string> kSweepColumns{"value", "a_c", "Ra_c", "omega_c", "kind", "period", "error"};
inline const std::vector<std::string> kPhaseColumns{"pair", "a", "Ra", "gamma_re", "gamma_im", "t", "T", "dTdt"};
inline const std::vector<std::string> kBasicColumns{"x3", "n_b", "G_b", "T_b", "temp_b"};

/// Thrown after partial results have been written; carries the failure.
class PartialFailure : public std::runtime_error {
 public:
  PartialFailure(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void warn_chi_range(const RunConfig& c) {
  if (!c.params.taxis().in_calibrated_range()) {
    spdlog::warn("chi = {} lies outside the calibrated range [-1.1, 1.1]", c.params.chi);
  }
}

inline json critical_json(const CriticalPoint& cp) {
  const auto period = cp.period();
  return json{{"a_c", num(cp.a)},
              {"Ra_c", num(cp.Ra)},
              {"omega_c", num(cp.omega)},
              {"kind", to_string(cp.kind)},
              {"period", period ? num(*period) : json(nullptr)}};
}

// ---------------------------------------------------------------------------

inline int cmd_taxis(const RunConfig& c, Workbench&) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const Metadata meta = make_metadata("taxis", c);
  const TaxisFn f = c.params.taxis();
  json summary{{"chi", num(f.chi)},
               {"G_c", num(c.params.Gc)},
               {"in_calibrated_range", f.in_calibrated_range()},
               {"dTdG_at_G_c", num(f.derivative(c.params.Gc))}};
  write_json(dir / "taxis.json", meta, schema::taxis, summary);
  if (c.table) {
    std::vector<std::vector<std::string>> rows;
    for (double G : numeric::linspace(c.G_lo, c.G_hi, c.G_points)) {
      rows.push_back({fmt12(G), fmt12(f.value(G)), fmt12(f.derivative(G))});
    }
    write_table(dir, "taxis_table", c, meta, schema::taxis_table, {"G", "T", "dTdG"}, rows);
  }
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

inline int cmd_basic_state(const RunConfig& c, Workbench& wb) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const auto b = wb.basic(c.params, c.basic_intervals);
  const Metadata meta = make_metadata("basic-state", c);
  std::vector<std::vector<std::string>> rows;
  const auto temp = b->temperature();
  for (std::size_t i = 0; i < b->x().size(); ++i) {
    rows.push_back({fmt12(b->x()[i]), fmt12(b->n()[i]), fmt12(b->intensity()[i]), fmt12(b->taxis_values()[i]),
                    fmt12(temp[i])});
  }
  write_table(dir, "basic_state", c, meta, schema::basic_state, kBasicColumns, rows);
  const auto s = sublayer_location(*b);
  json summary{{"x3_max", num(s.x3)},
               {"n_b_max", num(s.n_max)},
               {"n_top", num(b->top_concentration())},
               {"mean", num(concentration_integral(*b))}};
  write_json(dir / "basic_state_summary.json", meta, schema::basic_summary, summary);
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

inline int cmd_dispersion(const RunConfig& c, Workbench& wb) {
  const auto dir = prepare_dir(c.output_dir);
  const auto b = wb.basic(c.params, c.basic_intervals);
  const StabilityProblem sp(c.params, *b, c.shooting());
  const auto d = sp.determinant({c.a, c.params.Ra, cplx{c.gamma_re, c.gamma_im}});
  const Metadata meta = make_metadata("dispersion", c);
  const std::vector<std::string> cols{"a", "Ra", "gamma_re", "gamma_im", "det_re", "det_im", "log_scale", "condition"};
  const std::vector<double> vals{c.a, c.params.Ra, c.gamma_re, c.gamma_im, d.mantissa.real(), d.mantissa.imag(),
                                 d.log_scale, d.condition};
  std::vector<std::string> row;
  for (double v : vals) row.push_back(fmt12(v));
  write_table(dir, "dispersion", c, meta, schema::dispersion, cols, {row});
  json out = json::object();
  for (std::size_t i = 0; i < cols.size(); ++i) out[cols[i]] = num(vals[i]);
  std::cout << out.dump() << "\n";
  return kExitOk;
}

inline int cmd_spectrum(const RunConfig& c, Workbench& wb) {
  const auto dir = prepare_dir(c.output_dir);
  const auto b = wb.basic(c.params, c.basic_intervals);
  const auto ev = spectrum(build_operator(c.a, c.params.Ra, c.params, *b, c.oracle_nodes), c.k);
  json list = json::array();
  for (const cplx& g : ev) list.push_back({{"re", num(g.real())}, {"im", num(g.imag())}});
  json data{{"a", num(c.a)}, {"Ra", num(c.params.Ra)}, {"nodes", c.oracle_nodes}, {"eigenvalues", list}};
  write_json(dir / "spectrum.json", make_metadata("spectrum", c), schema::spectrum, data);
  std::cout << data.dump() << "\n";
  return kExitOk;
}

inline std::vector<std::vector<std::string>> neutral_rows(const NeutralAnalysis& an, const Params& p) {
  std::vector<std::vector<std::string>> rows;
  const auto branches = an.all_branches();
  int osc = 0;
  for (const auto& br : branches) {
    const std::string name =
        br.kind == BranchKind::stationary ? "stationary" : "oscillatory_" + std::to_string(++osc);
    for (const auto& s : br.samples) {
      rows.push_back({fmt12(p.R_T), fmt12(p.Le), name, to_string(br.kind), fmt12(s.a), fmt12(s.Ra), fmt12(s.omega)});
    }
  }
  return rows;
}

inline json neutral_summary(const NeutralAnalysis& an, const Params& p) {
  json osc = json::array();
  for (const auto& br : an.oscillatory) {
    osc.push_back({{"a_min", num(br.samples.front().a)},
                   {"a_max", num(br.samples.back().a)},
                   {"merge_a", br.merge_a ? num(*br.merge_a) : json(nullptr)},
                   {"merge_Ra", br.merge_Ra ? num(*br.merge_Ra) : json(nullptr)},
                   {"samples", br.samples.size()},
                   {"diagnostic", br.diagnostic}});
  }
  json missing = json::array();
  for (double a : an.stationary.missing) missing.push_back(num(a));
  return json{{"R_T", num(p.R_T)},
              {"Le", num(p.Le)},
              {"critical", an.critical ? critical_json(*an.critical) : json(nullptr)},
              {"stationary_samples", an.stationary.samples.size()},
              {"stationary_missing", missing},
              {"oscillatory", osc},
              {"diagnostic", an.diagnostic}};
}

inline std::vector<Params> varied_params(const RunConfig& c) {
  std::vector<Params> out;
  if (c.vary == "R_T") {
    for (double v : c.RT_list) out.push_back(c.params), out.back().R_T = v;
  } else if (c.vary == "Le") {
    for (double v : c.Le_list) out.push_back(c.params), out.back().Le = v;
  } else {
    out.push_back(c.params);
  }
  return out;
}

inline int cmd_neutral(const RunConfig& c, Workbench& wb) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const Metadata meta = make_metadata("neutral", c);
  std::vector<std::vector<std::string>> rows;
  json summaries = json::array();
  std::string failure;
  for (const Params& p : varied_params(c)) {
    const auto an = wb.neutral(p, c.neutral(), c.basic_intervals);
    const auto r = neutral_rows(*an, p);
    rows.insert(rows.end(), r.begin(), r.end());
    summaries.push_back(neutral_summary(*an, p));
    if (!an->critical) failure += (failure.empty() ? "" : "; ") + ("R_T=" + fmt12(p.R_T) + ": " + an->diagnostic);
  }
  write_table(dir, "neutral", c, meta, schema::neutral, kNeutralColumns, rows);
  write_json(dir / "neutral_summary.json", meta, schema::neutral_summary, summaries);
  if (!failure.empty()) throw PartialFailure(ErrorKind::no_root, failure);
  return kExitOk;
}

inline int cmd_critical(const RunConfig& c, Workbench& wb) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const auto an = wb.neutral(c.params, c.neutral(), c.basic_intervals);
  if (!an->critical) fail(ErrorKind::no_root, "no neutral point in the wavenumber range");
  const json data = critical_json(*an->critical);
  write_json(dir / "critical.json", make_metadata("critical", c), schema::critical, data);
  std::cout << data.dump() << "\n";
  return kExitOk;
}

inline int run_sweep(const RunConfig& c, Workbench& wb, bool over_RT) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const auto b = wb.basic(c.params, c.basic_intervals);
  const SweepResult r = over_RT ? sweep_RT(c.RT_list, c.params, *b, c.neutral(), c.workers)
                                : sweep_Le(c.Le_list, c.params, *b, c.neutral(), c.workers);
  const std::string name = over_RT ? "sweep-rt" : "sweep-le";
  const Metadata meta = make_metadata(name, c, {{"swept", over_RT ? "R_T" : "Le"}});
  std::vector<std::vector<std::string>> rows;
  std::string failure;
  for (const auto& e : r.entries) {
    if (e.critical) {
      const auto per = e.critical->period();
      rows.push_back({fmt12(e.value), fmt12(e.critical->a), fmt12(e.critical->Ra), fmt12(e.critical->omega),
                      to_string(e.critical->kind), per ? fmt12(*per) : "nan", ""});
    } else {
      rows.push_back({fmt12(e.value), "nan", "nan", "nan", "", "nan", e.error});
      failure += (failure.empty() ? "" : "; ") + fmt12(e.value) + ": " + e.error;
    }
  }
  write_table(dir, over_RT ? "sweep_rt" : "sweep_le", c, meta, schema::sweep, kSweepColumns, rows);
  json summary{{"monotone", r.monotone}, {"entries", r.entries.size()}};
  write_json(dir / (over_RT ? "sweep_rt_summary.json" : "sweep_le_summary.json"), meta, schema::sweep, summary);
  std::cout << summary.dump() << "\n";
  if (!failure.empty()) throw PartialFailure(ErrorKind::non_convergence, failure);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Eigenmode selection shared by `fields` and `phase`
// ---------------------------------------------------------------------------

struct SelectedMode {
  Eigenmode mode;
  KeyValues assumptions;
};

inline SelectedMode select_mode(const RunConfig& c, Workbench& wb) {
  const auto b = wb.basic(c.params, c.basic_intervals);
  const StabilityProblem sp(c.params, *b, c.shooting());
  if (c.mode == "critical") {
    const auto an = wb.neutral(c.params, c.neutral(), c.basic_intervals);
    if (!an->critical) fail(ErrorKind::no_root, "no critical point in the wavenumber range");
    const auto& cp = *an->critical;
    return {extract_eigenmode(sp, {cp.a, cp.Ra, cplx{0.0, cp.omega}}), {{"mode", "critical point"}}};
  }
  if (c.mode == "fastest") {
    const auto best = most_unstable_wavenumber(sp, *b, c.params.Ra, c.a_lo, c.a_hi);
    return {extract_eigenmode(sp, {best.a, c.params.Ra, best.gamma}),
            {{"mode", "fastest-growing wavenumber at Ra"}, {"wavelength", "2pi/a_fastest"},
             {"fastest_unstable", best.unstable ? "true" : "false"}}};
  }
  const double a = c.a;
  if (c.growth == "neutral") {
    if (c.gamma_im > 0.0) {
      const auto r = find_oscillatory(sp, a, c.params.Ra, c.gamma_im);
      if (r.outcome != OscillatoryOutcome::converged) fail(ErrorKind::non_convergence, "oscillatory mode merged");
      return {extract_eigenmode(sp, {a, r.Ra, cplx{0.0, r.omega}}), {{"mode", "neutral oscillatory at a"}}};
    }
    const auto ra = find_stationary_Ra(sp, a, c.params.Ra);
    if (!ra) fail(ErrorKind::no_root, "no stationary neutral Ra at a = " + fmt12(a));
    return {extract_eigenmode(sp, {a, *ra, cplx{0.0, 0.0}}), {{"mode", "neutral stationary at a"}}};
  }
  const auto g = leading_growth_rate(sp, *b, a, c.params.Ra);
  if (!g) fail(ErrorKind::non_convergence, "growth-rate Newton failed at a = " + fmt12(a));
  return {extract_eigenmode(sp, {a, c.params.Ra, *g}), {{"mode", "leading growth rate at (a, Ra)"}}};
}

inline int cmd_fields(const RunConfig& c, Workbench& wb) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  const auto sel = select_mode(c, wb);
  const Eigenmode& m = sel.mode;
  const Metadata meta = make_metadata("fields", c, sel.assumptions);
  json files = json::array();
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    const auto f = render_frame(m, c.times[k], c.nx, c.nz);
    const std::pair<const char*, const Eigen::MatrixXd*> fields[] = {{"psi", &f.psi}, {"w", &f.w}, {"n", &f.n}, {"T", &f.T}};
    for (const auto& [name, mat] : fields) {
      std::vector<std::vector<std::string>> rows;
      for (int j = 0; j < c.nz; ++j) {
        for (int i = 0; i < c.nx; ++i) rows.push_back({fmt12(f.x1(i)), fmt12(f.x3(j)), fmt12((*mat)(j, i))});
      }
      const auto path = write_table(dir, std::string("field_") + name + "_" + std::to_string(k), c, meta,
                                    schema::field, {"x1", "x3", name}, rows);
      files.push_back({{"field", name}, {"t", num(c.times[k])}, {"file", path.filename().string()}});
    }
  }
  json times = json::array();
  for (double t : c.times) times.push_back(num(t));
  json data{{"a", num(m.a)},
            {"Ra", num(m.Ra)},
            {"gamma_re", num(m.gamma.real())},
            {"gamma_im", num(m.gamma.imag())},
            {"lambda", num(m.wavelength())},
            {"singular_ratio", num(m.singular_ratio)},
            {"times", times},
            {"files", files}};
  write_json(dir / "fields.json", meta, schema::fields_manifest, data);
  std::cout << json{{"a", data["a"]}, {"Ra", data["Ra"]}, {"lambda", data["lambda"]}}.dump() << "\n";
  return kExitOk;
}

inline std::vector<double> time_grid(double t_end, double dt) {
  const int n = static_cast<int>(std::floor(t_end / dt + 1e-9));
  std::vector<double> ts;
  for (int i = 0; i <= n; ++i) ts.push_back(i * dt);
  return ts;
}

inline std::vector<std::vector<std::string>> phase_rows(int pair, const Eigenmode& m, const RunConfig& c) {
  const double x1 = c.probe_x1 ? *c.probe_x1 : default_probe(m).first;
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : time_series(m, x1, c.probe_x3, time_grid(c.t_end, c.dt))) {
    rows.push_back({std::to_string(pair), fmt12(m.a), fmt12(m.Ra), fmt12(m.gamma.real()), fmt12(m.gamma.imag()),
                    fmt12(s.t), fmt12(s.T), fmt12(s.dTdt)});
  }
  return rows;
}

inline int cmd_phase(const RunConfig& c, Workbench& wb) {
  warn_chi_range(c);
  const auto dir = prepare_dir(c.output_dir);
  std::vector<std::vector<std::string>> rows;
  KeyValues extra{{"probe", "x1 = lambda/4 unless probe_x1 is set"}};
  std::string failure;
  if (c.pairs.empty()) {
    const auto sel = select_mode(c, wb);
    extra.insert(extra.end(), sel.assumptions.begin(), sel.assumptions.end());
    rows = phase_rows(0, sel.mode, c);
  } else {
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      RunConfig one = c;
      one.mode = "given";
      one.a = c.pairs[i].first;
      one.params.Ra = c.pairs[i].second;
      try {
        const auto r = phase_rows(static_cast<int>(i), select_mode(one, wb).mode, c);
        rows.insert(rows.end(), r.begin(), r.end());
      } catch (const Error& e) {
        failure += (failure.empty() ? "" : "; ") + ("pair " + std::to_string(i) + ": " + e.what());
      }
    }
    extra.emplace_back("growth", c.growth);
  }
  write_table(dir, "phase", c, make_metadata("phase", c, extra), schema::phase, kPhaseColumns, rows);
  if (!failure.empty()) throw PartialFailure(ErrorKind::non_convergence, failure);
  return kExitOk;
}

}  // namespace photobio::app
