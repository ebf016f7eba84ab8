#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "cutfem/config.hpp"
#include "cutfem/fe_space.hpp"
#include "cutfem/geometry.hpp"
#include "cutfem/manufactured.hpp"
#include "cutfem/spacetime.hpp"

namespace cutfem {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

struct ErrorNorms {
  double velocity = 0.0;
  double pressure = 0.0;
};

using SpaceTimeScalar = std::function<double(const Point&, double)>;

/// L2(0,T; L2(fluid)) errors of a trajectory against reference fields.
/// Each slab is integrated with a (k + 3)-point Gauss rule in time and the
/// volume rules of `error_geometry` in space. The pressure error is taken
/// after removing the fluid mean of the pressure difference at each time
/// point.
ErrorNorms compute_l2l2_error(const TaylorHoodSpace& space, const CutGeometry& error_geometry,
                              const TemporalBasis& basis, const Trajectory& trajectory,
                              const SpaceTimeVector& velocity, const SpaceTimeScalar& pressure);

/// EOC_l = log2(e_{l-1} / e_l); the first entry and entries involving a
/// nonpositive or non-finite error are kUndefined.
std::vector<double> compute_eoc(const std::vector<double>& errors);

struct SlabLogEntry {
  int slab = 0;
  int newton_iterations = 0;
  double residual = 0.0;
  double linear_residual = 0.0;
  double seconds = 0.0;
};

struct LevelResult {
  int level = 0;
  double tau = 0.0;
  double h = 0.0;
  double ev = kUndefined;
  double ep = kUndefined;
  double eoc_v = kUndefined;
  double eoc_p = kUndefined;
  bool ok = false;
  std::string failure;
  int dofs = 0;
  int slabs = 0;
  int max_newton_iterations = 0;
  double max_linear_residual = 0.0;
  double seconds = 0.0;
  std::vector<SlabLogEntry> log;
};

struct ErrorReport {
  int k = 0;
  int r = 0;
  double radius_multiplier = 0.0;
  double nu = 0.0;
  std::string config_hash;
  double wall_seconds = 0.0;
  std::vector<LevelResult> levels;

  bool all_ok() const;
  std::vector<double> velocity_errors() const;
  std::vector<double> pressure_errors() const;
};

/// Everything needed to solve one level; owns mesh, geometry and spaces.
class LevelSetup {
 public:
  LevelSetup(const StudyConfig& config, int level);
  LevelSetup(const LevelSetup&) = delete;
  LevelSetup& operator=(const LevelSetup&) = delete;

  const BackgroundMesh& mesh() const { return mesh_; }
  const CutGeometry& geometry() const { return geometry_; }
  const CutGeometry& error_geometry() const { return error_geometry_; }
  const StabilizationSubmesh& submesh() const { return submesh_; }
  const TaylorHoodSpace& space() const { return space_; }
  const DofActivity& activity() const { return activity_; }
  const FormAssembler& forms() const { return forms_; }
  const SlabSystem& system() const { return system_; }
  const ExactSolution& exact() const { return exact_; }

  FlowData data() const;
  /// Taylor-Hood interpolant of the exact solution at time t.
  Eigen::VectorXd interpolant(double t) const;

 private:
  BackgroundMesh mesh_;
  CutGeometry geometry_;
  CutGeometry error_geometry_;
  StabilizationSubmesh submesh_;
  TaylorHoodSpace space_;
  DofActivity activity_;
  FormAssembler forms_;
  SlabSystem system_;
  ExactSolution exact_;
};

/// Space-time interpolant of the exact solution: the spatial interpolant
/// at each temporal Lagrange node of every slab.
Trajectory interpolate_trajectory(const LevelSetup& setup, const StudyConfig& config, int slabs);

/// Solves one level and measures its errors. Failures are recorded in the
/// result rather than thrown. When `trajectory` is given it receives the
/// computed solution.
LevelResult run_level(const StudyConfig& config, int level, Trajectory* trajectory = nullptr);

/// Runs all configured levels (in parallel when config.jobs > 1), computes
/// EOCs and writes the configured CSV outputs.
ErrorReport run_study(const StudyConfig& config, std::ostream* log = nullptr);

/// Columns: tau,h,ev,eoc_v,ep,eoc_p,k,r,radius_multiplier,nu.
void write_csv(std::ostream& os, const ErrorReport& report);
ErrorReport read_csv(std::istream& is);

/// Columns: level,slab,newton_iters,residual,linear_residual,solve_time.
void write_run_log(std::ostream& os, const ErrorReport& report);

/// Point values on a uniform grid at the end of the trajectory. Columns
/// x,y,fluid,vx,vy,p; values inside the disk are the extension.
void write_snapshot(std::ostream& os, const LevelSetup& setup, const Trajectory& trajectory, int points);

struct SweepEntry {
  Point shift{0.0, 0.0};
  bool ok = false;
  std::string failure;
  double ev = kUndefined;
  double ep = kUndefined;
  int max_newton_iterations = 0;
  double max_linear_residual = 0.0;
  int cut_cells = 0;
  double min_cut_fraction = 0.0;  // smallest fluid area fraction over cut cells
};

struct SweepReport {
  int level = 0;
  std::vector<SweepEntry> entries;
  /// max / min velocity error over successful runs (kUndefined if none).
  double error_factor() const;
  bool all_ok() const;
};

/// Runs one level per disk-center shift. Solver failures are recorded.
SweepReport cut_robustness_sweep(const StudyConfig& config, int level, const std::vector<Point>& shifts);

}  // namespace cutfem
