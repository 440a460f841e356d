#pragma once

// Neutral curves Ra(a): the stationary branch (gamma = 0) by natural
// continuation in a, oscillatory branches (gamma = i omega) by
// pseudo-arclength continuation in (a, Ra, omega), and the critical point
// (global minimum of Ra over all branches).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <limits>
#include <numbers>
#include <vector>

#include "photobio/basic_state.hpp"
#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/oracle.hpp"
#include "photobio/params.hpp"
#include "photobio/stability.hpp"

namespace photobio {

enum class BranchKind { stationary, oscillatory };

inline const char* to_string(BranchKind k) { return k == BranchKind::stationary ? "stationary" : "oscillatory"; }

struct NeutralSample {
  double a = 0.0;
  double Ra = 0.0;
  double omega = 0.0;
};

struct NeutralBranch {
  BranchKind kind = BranchKind::stationary;
  std::vector<NeutralSample> samples;   // sorted by a
  std::vector<double> missing;          // wavenumbers where no root was found
  std::optional<double> merge_a;        // oscillatory branch end where omega -> 0
  std::optional<double> merge_Ra;
  std::string diagnostic;

  bool empty() const { return samples.empty(); }
};

struct CriticalPoint {
  double a = 0.0;
  double Ra = 0.0;
  double omega = 0.0;
  BranchKind kind = BranchKind::stationary;

  std::optional<double> period() const {
    if (kind == BranchKind::oscillatory && omega > 0.0) return 2.0 * std::numbers::pi / omega;
    return std::nullopt;
  }
};

struct NeutralOptions {
  double a_lo = 0.1;
  double a_hi = 10.0;
  int points = 60;
  ShootingOptions shooting{};
  int seed_scan_points = 8;     // wavenumbers probed for oscillatory seeds
  int seed_ra_points = 12;      // Ra samples per probe
  int seed_oracle_nodes = 48;
  int max_continuation_steps = 400;
};

// ---------------------------------------------------------------------------
// Stationary branch
// ---------------------------------------------------------------------------

inline NeutralBranch trace_stationary(const StabilityProblem& sp, double a_lo, double a_hi, int n_pts) {
  if (!(a_lo > 0.0 && a_hi > a_lo) || n_pts < 2) {
    fail(ErrorKind::invalid_parameter, "trace_stationary: need 0 < a_lo < a_hi and at least 2 points");
  }
  NeutralBranch br;
  br.kind = BranchKind::stationary;
  std::optional<double> guess;
  for (double a : numeric::geomspace(a_lo, a_hi, n_pts)) {
    auto r = find_stationary_Ra(sp, a, guess);
    if (r && guess) {
      // Continuation can follow a higher root; keep the smallest one.
      StationaryOptions below;
      below.ra_max = *r * (1.0 - 1e-6);
      below.points_per_decade = 6;
      if (below.ra_max > 0.1) {
        if (const auto lower = find_stationary_Ra(sp, a, std::nullopt, below)) r = lower;
      }
    }
    if (r) {
      br.samples.push_back({a, *r, 0.0});
      guess = r;
    } else {
      br.missing.push_back(a);
      guess.reset();
    }
  }
  if (br.samples.empty()) br.diagnostic = "no stationary neutral Ra in range";
  return br;
}

inline NeutralBranch trace_stationary(double a_lo, double a_hi, int n_pts, const Params& p, const BasicState& b,
                                      ShootingOptions opt = {}) {
  return trace_stationary(StabilityProblem(p, b, opt), a_lo, a_hi, n_pts);
}

// ---------------------------------------------------------------------------
// Oscillatory branch continuation
// ---------------------------------------------------------------------------

namespace detail {

/// Residual used for continuation: (Re D, Im D / omega). Dividing by omega
/// removes the trivial zero of Im D on omega = 0, so the branch passes
/// smoothly through its merge with the stationary curve.
struct OscResidual {
  const StabilityProblem* sp;
  double ra_scale;
  double w_scale;

  // X = (a, Ra / ra_scale, omega / w_scale)
  Eigen::Vector2d operator()(const Eigen::Vector3d& X) const {
    const double a = X(0);
    const double Ra = X(1) * ra_scale;
    const double w = X(2) * w_scale;
    if (!(a > 0.0)) return {std::nan(""), std::nan("")};
    const cplx m = sp->determinant({a, Ra, cplx{0.0, w}}).mantissa;
    double im_scaled;
    if (std::abs(w) > 1e-8 * w_scale) {
      im_scaled = m.imag() / X(2);
    } else {
      // Im D is odd in omega; use the derivative at omega = 0.
      const double h = 1e-6;
      const cplx mp = sp->determinant({a, Ra, cplx{0.0, h * w_scale}}).mantissa;
      im_scaled = mp.imag() / h;
    }
    return {m.real(), im_scaled};
  }
};

inline Eigen::Matrix<double, 2, 3> jacobian(const OscResidual& F, const Eigen::Vector3d& X,
                                            const Eigen::Vector2d& FX) {
  Eigen::Matrix<double, 2, 3> J;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d Xh = X;
    const double h = 1e-7 * std::max(1.0, std::abs(X(k)));
    Xh(k) += h;
    J.col(k) = (F(Xh) - FX) / h;
  }
  return J;
}

inline Eigen::Vector3d tangent(const Eigen::Matrix<double, 2, 3>& J) {
  Eigen::Vector3d t = J.row(0).transpose().cross(J.row(1).transpose());
  const double nrm = t.norm();
  if (!(nrm > 0.0)) fail(ErrorKind::non_convergence, "degenerate tangent in oscillatory continuation");
  return t / nrm;
}

/// Newton corrector on {F(X) = 0, t . (X - Xp) = 0}.
inline std::optional<Eigen::Vector3d> correct(const OscResidual& F, const Eigen::Vector3d& Xp,
                                             const Eigen::Vector3d& t, int max_iter = 12) {
  Eigen::Vector3d X = Xp;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::Vector2d FX = F(X);
    if (!FX.allFinite()) return std::nullopt;
    const auto J = jacobian(F, X, FX);
    Eigen::Matrix3d M;
    M.topRows<2>() = J;
    M.row(2) = t.transpose();
    Eigen::Vector3d rhs;
    rhs << -FX, -t.dot(X - Xp);
    const Eigen::Vector3d dX = M.fullPivLu().solve(rhs);
    if (!dX.allFinite()) return std::nullopt;
    X += dX;
    if (dX.norm() < 1e-9 * std::max(1.0, X.norm())) return X;
  }
  return std::nullopt;
}

}  // namespace detail

/// Pseudo-arclength continuation from a neutral oscillatory seed, in both
/// directions of a. A direction stops at the interval ends or where omega
/// passes through zero (merge with the stationary curve, recorded).
inline NeutralBranch trace_oscillatory(const StabilityProblem& sp, double a_lo, double a_hi, int n_pts,
                                       NeutralSample seed, int max_steps = 400) {
  if (!(seed.omega > 0.0)) fail(ErrorKind::invalid_parameter, "oscillatory seed needs omega > 0");
  NeutralBranch br;
  br.kind = BranchKind::oscillatory;

  const auto first = find_oscillatory(sp, seed.a, seed.Ra, seed.omega);
  if (first.outcome != OscillatoryOutcome::converged || !(first.omega > 0.0)) {
    br.diagnostic = "seed collapsed onto the stationary branch";
    return br;
  }
  const detail::OscResidual F{&sp, first.Ra / seed.a, std::max(first.omega, 1.0) / seed.a};
  auto to_sample = [&](const Eigen::Vector3d& X) {
    return NeutralSample{X(0), X(1) * F.ra_scale, X(2) * F.w_scale};
  };
  const Eigen::Vector3d X0(seed.a, first.Ra / F.ra_scale, first.omega / F.w_scale);
  br.samples.push_back(to_sample(X0));

  const double ds_max = (a_hi - a_lo) / std::max(n_pts, 2);
  const double ds_min = ds_max * 1e-4;

  for (int dir : {-1, +1}) {
    Eigen::Vector3d X = X0;
    Eigen::Vector3d t = detail::tangent(detail::jacobian(F, X, F(X)));
    if (t(0) * dir < 0) t = -t;
    double ds = 0.5 * ds_max;
    for (int step = 0; step < max_steps; ++step) {
      // Land exactly on the interval end instead of stepping past it.
      double ds_eff = ds;
      bool at_end = false;
      if (X(0) + ds * t(0) < a_lo && t(0) < 0) ds_eff = (a_lo - X(0)) / t(0), at_end = true;
      if (X(0) + ds * t(0) > a_hi && t(0) > 0) ds_eff = (a_hi - X(0)) / t(0), at_end = true;
      if (ds_eff <= 1e-12) break;
      const Eigen::Vector3d Xp = X + ds_eff * t;
      const auto Xc = detail::correct(F, Xp, t);
      if (!Xc || (*Xc - X).norm() > 3.0 * ds_eff) {
        ds = 0.5 * ds_eff;
        if (ds < ds_min) {
          br.diagnostic += (br.diagnostic.empty() ? "" : "; ") + std::string("continuation stalled at a = ") +
                           std::to_string(X(0));
          break;
        }
        continue;
      }
      const Eigen::Vector3d Xn = *Xc;
      if (Xn(2) <= 0.0) {
        // omega crossed zero: pin the merge point on omega = 0, starting
        // from linear interpolation.
        const double s = X(2) / (X(2) - Xn(2));
        Eigen::Vector3d Xm = X + s * (Xn - X);
        Xm(2) = 0.0;
        const auto pinned = detail::correct(F, Xm, Eigen::Vector3d::UnitZ());
        if (pinned) Xm = *pinned;
        br.merge_a = Xm(0);
        br.merge_Ra = Xm(1) * F.ra_scale;
        break;
      }
      if (Xn(0) < a_lo * (1 - 1e-9) || Xn(0) > a_hi * (1 + 1e-9)) break;
      Eigen::Vector3d tn = detail::tangent(detail::jacobian(F, Xn, F(Xn)));
      if (tn.dot(t) < 0) tn = -tn;
      t = tn;
      X = Xn;
      br.samples.push_back(to_sample(X));
      if (at_end) break;
      ds = std::min(ds_eff * 1.5, ds_max);
    }
  }
  std::sort(br.samples.begin(), br.samples.end(),
            [](const NeutralSample& x, const NeutralSample& y) { return x.a < y.a; });
  return br;
}

// ---------------------------------------------------------------------------
// Oscillatory seeds from the collocation spectrum
// ---------------------------------------------------------------------------

/// Interpolated stationary threshold at `a`, if the branch covers it.
inline std::optional<double> interpolate_branch(const NeutralBranch& br, double a) {
  const auto& s = br.samples;
  if (s.empty() || a < s.front().a || a > s.back().a) return std::nullopt;
  auto it = std::lower_bound(s.begin(), s.end(), a, [](const NeutralSample& x, double v) { return x.a < v; });
  if (it == s.begin()) return it->Ra;
  const auto prev = std::prev(it);
  const double w = (a - prev->a) / (it->a - prev->a);
  return prev->Ra + w * (it->Ra - prev->Ra);
}

/// Looks for an oscillatory neutral point at wavenumber `a` below the
/// stationary threshold by scanning the collocation spectrum in Ra for a
/// conjugate pair crossing the imaginary axis, then polishing by shooting.
inline std::optional<NeutralSample> oscillatory_seed_at(const StabilityProblem& sp, const BasicState& b, double a,
                                                        std::optional<double> ra_stationary, int oracle_nodes,
                                                        int scan_points) {
  const double ra_top = ra_stationary ? *ra_stationary : 1e4;
  const auto hit =
      oracle_oscillatory_neutral(a, sp.params(), b, ra_top / 50.0, ra_top, oracle_nodes, scan_points, 1e-3);
  if (!hit) return std::nullopt;
  try {
    const auto pol = find_oscillatory(sp, a, hit->Ra, hit->omega);
    if (pol.outcome == OscillatoryOutcome::converged && pol.omega > 0.0) return NeutralSample{a, pol.Ra, pol.omega};
  } catch (const Error&) {
    // Unpolishable; the caller moves on to the next wavenumber.
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Critical point
// ---------------------------------------------------------------------------

/// Global minimum over all branch samples, refined on a with full re-solves.
inline CriticalPoint critical_point(const StabilityProblem& sp, const std::vector<NeutralBranch>& branches) {
  const NeutralBranch* owner = nullptr;
  std::size_t best = 0;
  for (const auto& br : branches) {
    for (std::size_t i = 0; i < br.samples.size(); ++i) {
      if (!owner || br.samples[i].Ra < owner->samples[best].Ra) {
        owner = &br;
        best = i;
      }
    }
  }
  if (!owner) fail(ErrorKind::no_root, "critical_point: every branch is empty");

  const auto& s = owner->samples;
  CriticalPoint cp{s[best].a, s[best].Ra, s[best].omega, owner->kind};
  if (s.size() < 3 || best == 0 || best + 1 == s.size()) return cp;

  const double lo = s[best - 1].a;
  const double hi = s[best + 1].a;
  if (owner->kind == BranchKind::stationary) {
    auto ra_of = [&](double a) {
      const auto r = find_stationary_Ra(sp, a, cp.Ra);
      return r ? *r : std::numeric_limits<double>::infinity();
    };
    const auto m = numeric::minimize(ra_of, lo, hi, 24);
    if (m.fx < cp.Ra) cp = {m.x, m.fx, 0.0, BranchKind::stationary};
    else cp = {s[best].a, ra_of(s[best].a), 0.0, BranchKind::stationary};
  } else {
    double last_w = cp.omega;
    auto ra_of = [&](double a) {
      try {
        const auto r = find_oscillatory(sp, a, cp.Ra, cp.omega);
        if (r.outcome != OscillatoryOutcome::converged) return std::numeric_limits<double>::infinity();
        last_w = r.omega;
        return r.Ra;
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const auto m = numeric::minimize(ra_of, lo, hi, 24);
    if (std::isfinite(m.fx)) {
      // Re-solve at the minimiser to report the matching frequency.
      const auto r = find_oscillatory(sp, m.x, m.fx, last_w);
      cp = {m.x, r.Ra, r.omega, BranchKind::oscillatory};
    }
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct NeutralAnalysis {
  NeutralBranch stationary;
  std::vector<NeutralBranch> oscillatory;
  std::optional<CriticalPoint> critical;
  std::string diagnostic;

  std::vector<NeutralBranch> all_branches() const {
    std::vector<NeutralBranch> out{stationary};
    out.insert(out.end(), oscillatory.begin(), oscillatory.end());
    return out;
  }
};

inline NeutralAnalysis analyze_neutral(const Params& p, const BasicState& b, const NeutralOptions& opt = {}) {
  const StabilityProblem sp(p, b, opt.shooting);
  NeutralAnalysis out;
  out.stationary = trace_stationary(sp, opt.a_lo, opt.a_hi, opt.points);

  for (double a : numeric::geomspace(opt.a_lo, opt.a_hi, opt.seed_scan_points)) {
    const bool covered = std::any_of(out.oscillatory.begin(), out.oscillatory.end(), [&](const NeutralBranch& br) {
      const double hi = br.merge_a ? std::max(*br.merge_a, br.samples.back().a) : br.samples.back().a;
      return a >= br.samples.front().a * 0.999 && a <= hi * 1.001;
    });
    if (covered) continue;
    const auto seed = oscillatory_seed_at(sp, b, a, interpolate_branch(out.stationary, a), opt.seed_oracle_nodes,
                                          opt.seed_ra_points);
    if (!seed) continue;
    auto br = trace_oscillatory(sp, opt.a_lo, opt.a_hi, opt.points, *seed, opt.max_continuation_steps);
    if (!br.empty()) out.oscillatory.push_back(std::move(br));
  }

  const auto branches = out.all_branches();
  const bool any = std::any_of(branches.begin(), branches.end(), [](const auto& br) { return !br.empty(); });
  if (any) out.critical = critical_point(sp, branches);
  else out.diagnostic = "no neutral point in the wavenumber range";
  return out;
}

inline CriticalPoint critical_point(const Params& p, const BasicState& b, const NeutralOptions& opt = {}) {
  const auto an = analyze_neutral(p, b, opt);
  if (!an.critical) fail(ErrorKind::no_root, "critical_point: " + an.diagnostic);
  return *an.critical;
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

struct SweepEntry {
  double value = 0.0;  // the swept parameter (R_T or Le)
  std::optional<CriticalPoint> critical;
  std::string error;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  bool monotone = false;  // see sweep_RT / sweep_Le for the direction checked
};

namespace detail {

template <typename Apply>
std::vector<SweepEntry> run_sweep(const std::vector<double>& values, const Params& p, const BasicState& b,
                                  const NeutralOptions& opt, int workers, Apply&& apply) {
  if (values.empty()) fail(ErrorKind::invalid_parameter, "sweep list must be nonempty");
  std::vector<SweepEntry> out(values.size());
  auto job = [&](std::size_t i) {
    SweepEntry e;
    e.value = values[i];
    try {
      Params q = p;
      apply(q, values[i]);
      e.critical = critical_point(q, b, opt);
    } catch (const Error& err) {
      e.error = err.what();
    }
    return e;
  };
  const std::size_t pool = static_cast<std::size_t>(std::max(1, workers));
  for (std::size_t start = 0; start < values.size(); start += pool) {
    std::vector<std::future<SweepEntry>> batch;
    for (std::size_t i = start; i < std::min(values.size(), start + pool); ++i) {
      batch.push_back(std::async(pool == 1 ? std::launch::deferred : std::launch::async, job, i));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) out[start + k] = batch[k].get();
  }
  return out;
}

}  // namespace detail

/// Critical point for each R_T. `monotone` reports whether Ra_c strictly
/// increases as R_T decreases.
inline SweepResult sweep_RT(const std::vector<double>& RT_list, const Params& p, const BasicState& b,
                            const NeutralOptions& opt = {}, int workers = 1) {
  SweepResult r;
  r.entries = detail::run_sweep(RT_list, p, b, opt, workers, [](Params& q, double v) { q.R_T = v; });
  auto sorted = r.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.value > y.value; });
  r.monotone = std::all_of(sorted.begin(), sorted.end(), [](const auto& e) { return e.critical.has_value(); });
  for (std::size_t i = 1; r.monotone && i < sorted.size(); ++i) {
    r.monotone = sorted[i].critical->Ra > sorted[i - 1].critical->Ra;
  }
  return r;
}

/// Critical point for each Le (the basic state does not depend on Le).
/// `monotone` reports whether Ra_c strictly decreases as Le increases.
inline SweepResult sweep_Le(const std::vector<double>& Le_list, const Params& p, const BasicState& b,
                            const NeutralOptions& opt = {}, int workers = 1) {
  SweepResult r;
  r.entries = detail::run_sweep(Le_list, p, b, opt, workers, [](Params& q, double v) { q.Le = v; });
  auto sorted = r.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.value < y.value; });
  r.monotone = std::all_of(sorted.begin(), sorted.end(), [](const auto& e) { return e.critical.has_value(); });
  for (std::size_t i = 1; r.monotone && i < sorted.size(); ++i) {
    r.monotone = sorted[i].critical->Ra < sorted[i - 1].critical->Ra;
  }
  return r;
}

}  // namespace photobio
