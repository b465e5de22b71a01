#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace stamp {

/// Selects one random-effects structure plus its prior scales. The four
/// core flags generate the 16 core candidates; the four extended
/// (team-level slope) flags require the ta+jump+step base and, combined
/// with use_ts, generate the 32 extended candidates.
struct ModelConfig {
  bool use_ta = false;
  bool use_ts = false;
  bool use_jump = false;
  bool use_step = false;

  bool use_lay = false;
  bool use_float = false;
  bool use_rim = false;
  bool use_fade = false;

  double u_sd = 1.5;        // PC scale for sigma_team, sigma_area, sigma_ta, sigma_ts
  double u_slope = 1.0;     // PC scale for the shot-type slope sigmas
  double alpha_prec = 0.05;
  double v_cor = 0.7;
  double alpha_cor = 0.7;
  double fixed_effect_sd = 100.0;
  double ridge_sd = 31.622776601683793; // ridge precision 1e-3 on fixed effects

  // Stricter alternative to the single global sum-to-zero on w: one
  // constraint per (area, season) across teams.
  bool strict_w_constraints = false;

  bool any_extended() const { return use_lay || use_float || use_rim || use_fade; }

  /// Throws InvalidConfig when extended flags are set without the
  /// ta+jump+step base, or scales are nonpositive.
  void validate() const;

  std::string to_kv() const;
  static ModelConfig from_kv(const std::string& text);
  static ModelConfig from_kv_file(const std::string& path);
  void write_kv_file(const std::string& path) const;

  /// Compact flag string like "ta=1 ts=0 jump=1 step=1".
  std::string flag_summary() const;

  bool operator==(const ModelConfig&) const = default;
};

/// The 16 core candidates, ordered lexicographically over
/// (use_ta, use_ts, use_jump, use_step) with 0 before 1.
std::vector<ModelConfig> enumerate_core_configs(double u_sd, double u_slope);

/// The 32 extended candidates: use_ta=use_jump=use_step=1 fixed, ordered
/// lexicographically over (use_ts, use_lay, use_float, use_rim, use_fade).
std::vector<ModelConfig> enumerate_extended_configs(double u_sd, double u_slope);

} // namespace stamp
