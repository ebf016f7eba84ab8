#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cutfem/forms.hpp"
#include "cutfem/geometry.hpp"
#include "cutfem/spacetime.hpp"

namespace cutfem {

/// Parameters of a convergence study. Unset Nitsche parameters and
/// quadrature degrees (value 0) follow the velocity degree r:
/// gamma1 = 20 r^2, gamma2 = 2 r^2, q_vol = q_surf = 2 r + 2.
struct StudyConfig {
  int k = 1;
  int r = 2;
  std::vector<int> levels{0, 1, 2, 3};
  double nu = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gv = 0.05;
  double gp = 0.05;
  double radius_multiplier = 2.0;
  RigidDisk disk;
  double tau0 = 1.0;
  double final_time = 1.0;
  int q_vol = 0;
  int q_surf = 0;
  NewtonSettings newton;
  bool convection = true;
  OuterBoundary outer = OuterBoundary::Strong;
  JumpDomain jump = JumpDomain::Full;
  int jobs = 1;
  std::string output;    // CSV error table
  std::string run_log;   // CSV per-slab log
  std::string snapshot;  // CSV field snapshot at the final time
  int snapshot_points = 101;

  void validate() const;
  int volume_degree() const { return q_vol > 0 ? q_vol : 2 * r + 2; }
  int surface_degree() const { return q_surf > 0 ? q_surf : 2 * r + 2; }
  FormsConfig forms() const;
  /// Number of slabs at a level: T / (tau0 / 2^level).
  int slabs(int level) const;
  /// Canonical "key = value" listing; the config hash is computed from it.
  std::string canonical() const;
  std::string hash() const;
};

/// "0..3" (inclusive range) or "0,1,2".
std::vector<int> parse_levels(const std::string& text);

/// Sets one key from its textual value. Keys match the command-line flag
/// names without the leading dashes. Throws std::invalid_argument.
void apply_setting(StudyConfig& config, const std::string& key, const std::string& value);

/// Reads flat "key = value" lines; '#' starts a comment.
void read_config(std::istream& is, StudyConfig& config);
void read_config_file(const std::string& path, StudyConfig& config);

/// Names of all recognised keys.
const std::vector<std::string>& config_keys();

}  // namespace cutfem
