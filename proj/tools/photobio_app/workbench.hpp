#pragma once

// Memoised basic states and neutral analyses, shared by the subcommands, the
// figure bundles and the acceptance checks.

#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <spdlog/spdlog.h>

#include "photobio/photobio.hpp"

namespace photobio::app {

class Workbench {
 public:
  std::shared_ptr<const BasicState> basic(const Params& p, int M = 2000) {
    const std::string key = basic_key(p, M);
    {
      std::lock_guard lock(mu_);
      if (auto it = basic_.find(key); it != basic_.end()) return it->second;
    }
    spdlog::debug("basic state: hbar={} U_s={} chi={} M={}", p.hbar, p.U_s, p.chi, M);
    auto b = std::make_shared<const BasicState>(solve_basic_state(p, M));
    std::lock_guard lock(mu_);
    return basic_.emplace(key, std::move(b)).first->second;
  }

  std::shared_ptr<const NeutralAnalysis> neutral(const Params& p, const NeutralOptions& o = {}, int M = 2000) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%.17g|%d|%.17g|%.17g|%d|%d|%d|%d|%d|%d|%d", p.R_T, p.Le, p.Pr,
                  static_cast<int>(p.cell_rate), o.a_lo, o.a_hi, o.points, o.shooting.steps,
                  o.shooting.reorthonormalize, o.seed_scan_points, o.seed_ra_points, o.seed_oracle_nodes,
                  o.max_continuation_steps);
    const std::string key = basic_key(p, M) + buf;
    {
      std::lock_guard lock(mu_);
      if (auto it = neutral_.find(key); it != neutral_.end()) return it->second;
    }
    const auto b = basic(p, M);
    spdlog::info("neutral curves: hbar={} U_s={} G_c={:.4f} R_T={} Le={}", p.hbar, p.U_s, p.Gc, p.R_T, p.Le);
    auto an = std::make_shared<const NeutralAnalysis>(analyze_neutral(p, *b, o));
    if (an->critical) {
      spdlog::info("  critical: a={:.4f} Ra={:.4f} omega={:.4f} ({})", an->critical->a, an->critical->Ra,
                   an->critical->omega, to_string(an->critical->kind));
    }
    std::lock_guard lock(mu_);
    return neutral_.emplace(key, std::move(an)).first->second;
  }

 private:
  static std::string basic_key(const Params& p, int M) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%d", p.hbar, p.U_s, p.I0, p.chi, M);
    return buf;
  }

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const BasicState>> basic_;
  std::map<std::string, std::shared_ptr<const NeutralAnalysis>> neutral_;
};

}  // namespace photobio::app
