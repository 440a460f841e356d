#pragma once

// The acceptance fixture set. Each check returns pass/fail with a one-line
// account of the numbers behind it; `repro` and the acceptance test binary
// both run these.

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "photobio_app/figures.hpp"

namespace photobio::app {

struct CriterionResult {
  int id = 0;
  bool passed = false;
  std::string detail;
};

namespace acceptance_detail {

inline bool within_rel(double x, double ref, double tol) { return std::abs(x - ref) <= tol * std::abs(ref); }
inline bool within_abs(double x, double ref, double tol) { return std::abs(x - ref) <= tol; }

inline std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Oscillatory merge of the branch that reaches the lowest Ra.
inline std::optional<double> primary_merge(const NeutralAnalysis& an) {
  const NeutralBranch* best = nullptr;
  double low = std::numeric_limits<double>::infinity();
  for (const auto& br : an.oscillatory) {
    if (!br.merge_a) continue;
    for (const auto& s : br.samples) {
      if (s.Ra < low) low = s.Ra, best = &br;
    }
  }
  if (!best) return std::nullopt;
  return best->merge_a;
}

inline CriterionResult critical_check(int id, Workbench& wb, const Params& p, double a_ref, double Ra_ref,
                                      double w_ref, double period_ref) {
  const auto an = wb.neutral(p);
  if (!an->critical) return {id, false, "no critical point: " + an->diagnostic};
  const auto& c = *an->critical;
  const double period = c.omega > 0 ? 2.0 * std::numbers::pi / c.omega : 0.0;
  const bool ok = c.kind == BranchKind::oscillatory && within_abs(c.a, a_ref, 0.1) && within_rel(c.Ra, Ra_ref, 0.02) &&
                  within_rel(c.omega, w_ref, 0.05) && within_rel(period, period_ref, 0.05);
  std::ostringstream os;
  os << to_string(c.kind) << " a_c=" << f4(c.a) << " (" << a_ref << "+-0.1) Ra_c=" << f4(c.Ra) << " (" << Ra_ref
     << "+-2%) omega=" << f4(c.omega) << " (" << w_ref << "+-5%) period=" << f4(period) << " (" << period_ref
     << "+-5%)";
  return {id, ok, os.str()};
}

/// Sign of the 4x4 top determinant of the stationary (w, N) system with the
/// thermal block removed. Real RK4, QR every 40 steps.
inline double reduced_stationary_sign(const Params& p, const BasicState& b, double a, double Ra, int steps = 2000) {
  using Vec = Eigen::Matrix<double, 7, 1>;
  using Mat = Eigen::Matrix<double, 7, 4>;
  const double a2 = a * a;
  auto f = [&](double x, const Mat& y) {
    const auto c = b.profiles_at(x);
    Mat d;
    for (int j = 0; j < 4; ++j) {
      const Vec v = y.col(j);
      Vec r;
      r << v(1), v(2), v(3), 2 * a2 * v(2) - a2 * a2 * v(0) + a2 * Ra * v(5), v(5), v(6),
          p.U_s * c.taxis * v(6) + (a2 + 2 * p.hbar * p.U_s * c.lambda) * v(5) + p.hbar * p.U_s * c.dlambda * v(4) -
              p.Le * c.dn * v(0);
      d.col(j) = r;
    }
    return d;
  };
  const auto c0 = b.profiles_at(0.0);
  Mat y = Mat::Zero();
  y(2, 0) = 1;
  y(3, 1) = 1;
  y(4, 2) = 1;
  y(6, 2) = p.hbar * p.U_s * c0.lambda;
  y(5, 3) = 1;
  y(6, 3) = p.U_s * c0.taxis;
  double sign = 1.0;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const double x = s * h;
    const Mat k1 = f(x, y);
    const Mat k2 = f(x + h / 2, y + h / 2 * k1);
    const Mat k3 = f(x + h / 2, y + h / 2 * k2);
    const Mat k4 = f(x + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if ((s + 1) % 40 == 0) {
      Eigen::HouseholderQR<Mat> qr(y);
      for (int i = 0; i < 4; ++i) sign *= qr.matrixQR()(i, i) > 0 ? 1.0 : -1.0;
      y = qr.householderQ() * Mat::Identity();
    }
  }
  const auto c1 = b.profiles_at(1.0);
  Eigen::Matrix4d m;
  m.row(0) = y.row(0);
  m.row(1) = y.row(2);
  m.row(2) = y.row(4);
  m.row(3) = p.U_s * c1.taxis * y.row(5) - y.row(6);
  return sign * (m.determinant() > 0 ? 1.0 : -1.0);
}

}  // namespace acceptance_detail

// ---------------------------------------------------------------------------

inline CriterionResult criterion_1(Workbench& wb) {
  return acceptance_detail::critical_check(1, wb, figure_params::thick(-500.0), 1.9, 79.78, 12.98, 0.48);
}

inline CriterionResult criterion_2(Workbench& wb) {
  return acceptance_detail::critical_check(2, wb, figure_params::deep(0.65, 0.0), 2.1, 90.54, 6.81, 0.92);
}

inline CriterionResult criterion_3(Workbench& wb) {
  using namespace acceptance_detail;
  struct Ref {
    double Gc, n, x;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Ref r : {Ref{0.8, 8.61, 1.00}, Ref{0.68, 3.37, 0.90}, Ref{0.65, 2.54, 0.76}, Ref{0.63, 2.24, 0.52}}) {
    const auto s = sublayer_location(*wb.basic(figure_params::deep(r.Gc)));
    const bool hit = within_rel(s.n_max, r.n, 0.02) && within_abs(s.x3, r.x, 0.02);
    ok = ok && hit;
    os << "G_c=" << r.Gc << ": n_max=" << f4(s.n_max) << "@" << f4(s.x3) << " (" << r.n << "@" << r.x << ")"
       << (hit ? "" : " MISS") << "; ";
  }
  return {3, ok, os.str()};
}

inline CriterionResult criterion_4(Workbench& wb) {
  using namespace acceptance_detail;
  struct Case {
    const char* name;
    Params p;
    double ref;
  };
  const Case cases[] = {{"G_c=0.68 R_T=0", figure_params::deep(0.68, 0.0), 2.4},
                        {"G_c=0.65 R_T=0", figure_params::deep(0.65, 0.0), 3.1},
                        {"hbar=1 R_T=0", figure_params::thick(0.0), 3.9},
                        {"hbar=1 R_T=-500", figure_params::thick(-500.0), 5.1}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& c : cases) {
    const auto m = primary_merge(*wb.neutral(c.p));
    const bool hit = m && within_abs(*m, c.ref, 0.2);
    ok = ok && hit;
    os << c.name << ": " << (m ? f4(*m) : std::string("none")) << " (" << c.ref << "+-0.2)" << (hit ? "" : " MISS")
       << "; ";
  }
  return {4, ok, os.str()};
}

inline CriterionResult criterion_5(Workbench& wb) {
  using namespace acceptance_detail;
  std::vector<double> lambda;
  for (double rt : {0.0, -500.0, -1000.0}) {
    const Params p = figure_params::shallow(rt);
    const auto b = wb.basic(p);
    const StabilityProblem sp(p, *b);
    lambda.push_back(most_unstable_wavenumber(sp, *b, 70.0, 0.3, 8.0).wavelength());
  }
  const bool exact = within_rel(lambda[0], 1.86, 0.05) && within_rel(lambda[2], 6.15, 0.10);
  const bool monotone = lambda[0] < lambda[1] && lambda[1] < lambda[2];
  std::ostringstream os;
  os << "lambda(R_T=0)=" << f4(lambda[0]) << " (1.86+-5%), lambda(-500)=" << f4(lambda[1])
     << ", lambda(-1000)=" << f4(lambda[2]) << " (6.15+-10%); assumption wavelength=2pi/a_fastest";
  if (!exact) os << "; reference values not matched, fallback: monotone increase " << (monotone ? "holds" : "FAILS");
  return {5, exact || monotone, os.str()};
}

inline CriterionResult criterion_6(Workbench& wb) {
  using namespace acceptance_detail;
  bool ok = true;
  std::ostringstream os;
  auto rt_family = [&](const char* name, const std::function<Params(double)>& make) {
    std::vector<double> ra;
    for (double rt : figure_params::kRT) {
      const auto an = wb.neutral(make(rt));
      ra.push_back(an->critical ? an->critical->Ra : std::numeric_limits<double>::quiet_NaN());
    }
    bool mono = true;
    for (std::size_t i = 1; i < ra.size(); ++i) mono = mono && ra[i] > ra[i - 1];
    ok = ok && mono;
    os << name << " Ra_c(R_T=0,-250,-500,-1000)=";
    for (double r : ra) os << f4(r) << " ";
    os << (mono ? "up" : "NOT MONOTONE") << "; ";
  };
  rt_family("shallow", [](double rt) { return figure_params::shallow(rt); });
  for (double gc : {0.8, 0.68, 0.65, 0.63}) {
    const std::string name = "G_c=" + f4(gc);
    rt_family(name.c_str(), [gc](double rt) { return figure_params::deep(gc, rt); });
  }
  for (double rt : {0.0, -1000.0}) {
    std::vector<double> ra;
    for (double le : {1.0, 4.0, 10.0, 40.0}) {
      Params p = figure_params::shallow(rt);
      p.Le = le;
      const auto an = wb.neutral(p);
      ra.push_back(an->critical ? an->critical->Ra : std::numeric_limits<double>::quiet_NaN());
    }
    bool mono = true;
    for (std::size_t i = 1; i < ra.size(); ++i) mono = mono && ra[i] < ra[i - 1];
    ok = ok && mono;
    os << "R_T=" << rt << " Ra_c(Le=1,4,10,40)=";
    for (double r : ra) os << f4(r) << " ";
    os << (mono ? "down" : "NOT MONOTONE") << "; ";
  }
  return {6, ok, os.str()};
}

inline CriterionResult criterion_7(Workbench& wb) {
  bool ok = true;
  std::ostringstream os;
  const std::pair<double, BranchKind> cases[] = {
      {0.8, BranchKind::stationary}, {0.63, BranchKind::stationary}, {0.65, BranchKind::oscillatory}};
  for (const auto& [gc, want] : cases) {
    os << "G_c=" << gc << ":";
    for (double rt : figure_params::kRT) {
      const auto an = wb.neutral(figure_params::deep(gc, rt));
      const bool hit = an->critical && an->critical->kind == want;
      ok = ok && hit;
      os << " " << rt << "=" << (an->critical ? to_string(an->critical->kind) : "none");
    }
    os << " (want " << to_string(want) << "); ";
  }
  return {7, ok, os.str()};
}

inline CriterionResult criterion_8(Workbench& wb) {
  using namespace acceptance_detail;
  bool ok = true;
  std::ostringstream os;
  double worst = 0.0;
  for (double rt : {0.0, -500.0, -1000.0}) {
    const Params p = figure_params::shallow(rt);
    const auto b = wb.basic(p);
    for (double a : {1.5, 2.5, 3.5}) {
      const double shoot = solve_stationary_Ra(a, p, *b);
      const auto col = stationary_rayleigh_numbers(build_operator(a, 0.0, p, *b));
      const double err = col.empty() ? 1.0 : std::abs(col.front() - shoot) / shoot;
      worst = std::max(worst, err);
    }
  }
  ok = worst < 5e-3;
  os << "3x3 grid max rel diff " << f4(worst) << " (<0.5%); ";
  for (const Params& p : {figure_params::thick(-500.0), figure_params::deep(0.65, 0.0)}) {
    const auto an = wb.neutral(p);
    if (!an->critical) {
      ok = false;
      os << "no critical point; ";
      continue;
    }
    const auto& c = *an->critical;
    const auto ev = full_spectrum(build_operator(c.a, c.Ra, p, *wb.basic(p)));
    const cplx target{0.0, c.omega};
    const cplx near = *std::min_element(ev.begin(), ev.end(), [&](const cplx& x, const cplx& y) {
      return std::abs(x - target) < std::abs(y - target);
    });
    const bool hit = std::abs(near.real()) < 1e-3 && std::abs(std::abs(near.imag()) - c.omega) < 1e-3;
    ok = ok && hit;
    os << "critical a=" << f4(c.a) << ": oracle gamma=" << f4(near.real()) << (near.imag() < 0 ? "" : "+")
       << f4(near.imag()) << "i vs omega=" << f4(c.omega) << (hit ? "" : " MISS") << "; ";
  }
  return {8, ok, os.str()};
}

inline CriterionResult criterion_9(Workbench& wb) {
  using namespace acceptance_detail;
  bool ok = true;
  std::ostringstream os;

  double norm = 0.0;
  for (const Params& p : {figure_params::deep(0.8), figure_params::deep(0.63), figure_params::thick(),
                          figure_params::shallow()}) {
    norm = std::max(norm, std::abs(concentration_integral(*wb.basic(p)) - 1.0));
  }
  ok = ok && norm < 1e-8;
  os << "normalisation " << f4(norm) << "; ";

  const Params sh = figure_params::shallow();
  const auto bs = wb.basic(sh);
  double pr_spread = 0.0, ref = 0.0;
  for (double pr : {1.0, 5.0, 50.0}) {
    Params q = sh;
    q.Pr = pr;
    const double r = solve_stationary_Ra(2.0, q, *bs);
    if (ref == 0.0) ref = r;
    pr_spread = std::max(pr_spread, std::abs(r - ref) / ref);
  }
  ok = ok && pr_spread <= 1e-8;
  os << "Pr spread " << f4(pr_spread) << "; ";

  const Params th = figure_params::thick();
  const StabilityProblem sp(th, *wb.basic(th));
  double conj = 0.0;
  for (const ModeProblem m : {ModeProblem{1.9, 80.0, {0.3, 12.0}}, ModeProblem{3.0, 150.0, {-1.0, 4.0}},
                              ModeProblem{0.7, 300.0, {2.0, 0.5}}}) {
    const auto d1 = sp.determinant(m);
    const auto d2 = sp.determinant({m.a, m.Ra, std::conj(m.gamma)});
    conj = std::max(conj, std::abs(d2.mantissa - std::conj(d1.mantissa)) / std::abs(d1.mantissa));
  }
  ok = ok && conj < 1e-10;
  os << "conjugation " << f4(conj) << "; ";

  const double full = solve_stationary_Ra(2.0, sh, *bs, std::nullopt, {}, {1e-12});
  const bool flips = reduced_stationary_sign(sh, *bs, 2.0, full * (1 - 1e-8)) !=
                     reduced_stationary_sign(sh, *bs, 2.0, full * (1 + 1e-8));
  ok = ok && flips;
  os << "R_T=0 reduced system changes sign within 1e-8 of Ra=" << f4(full) << (flips ? "" : " MISS") << "; ";

  NeutralOptions fine;
  fine.shooting.steps = 4000;
  const auto base = wb.neutral(th);
  const auto half = wb.neutral(th, fine, 4000);
  if (base->critical && half->critical) {
    const auto& c0 = *base->critical;
    const auto& c1 = *half->critical;
    const double change = std::max({std::abs(c1.a - c0.a) / c0.a, std::abs(c1.Ra - c0.Ra) / c0.Ra,
                                    std::abs(c1.omega - c0.omega) / std::max(c0.omega, 1e-300)});
    ok = ok && change < 1e-3;
    os << "step halving " << f4(change);
  } else {
    ok = false;
    os << "step halving: no critical point";
  }
  return {9, ok, os.str()};
}

inline CriterionResult criterion_10(Workbench& wb, const std::filesystem::path& dir) {
  const auto files = write_figure_bundles(dir, wb);
  std::string problems;
  for (const auto& f : files) {
    const auto e = validate_bundle_file(f);
    if (!e.empty()) problems += e + "; ";
  }
  std::ostringstream os;
  os << files.size() << " files in " << dir.string();
  if (!problems.empty()) os << ": " << problems;
  return {10, problems.empty() && files.size() == 19, os.str()};
}

inline std::vector<std::function<CriterionResult(Workbench&, const std::filesystem::path&)>> all_criteria() {
  auto wrap = [](CriterionResult (*f)(Workbench&)) {
    return [f](Workbench& wb, const std::filesystem::path&) { return f(wb); };
  };
  return {wrap(criterion_1), wrap(criterion_2), wrap(criterion_3), wrap(criterion_4), wrap(criterion_5),
          wrap(criterion_6), wrap(criterion_7), wrap(criterion_8), wrap(criterion_9), criterion_10};
}

inline std::string format_result(const CriterionResult& r) {
  return "criterion " + std::to_string(r.id) + (r.passed ? " PASS: " : " FAIL: ") + r.detail;
}

}  // namespace photobio::app
