#pragma once

#include <iosfwd>
#include <vector>

#include "cutfem/mesh.hpp"

namespace cutfem {

/// Circular rigid body embedded in the background mesh. The fluid domain is
/// the unit square minus the closed disk.
struct RigidDisk {
  Point center{0.5, 0.5};
  double radius = 0.1;

  /// Positive in the fluid, negative inside the disk.
  double signed_distance(const Point& p) const { return (p - center).norm() - radius; }
};

enum class CellClass { Fluid, Solid, Cut };

const char* to_string(CellClass c);

struct VolumeRule {
  std::vector<Point> points;
  std::vector<double> weights;
  /// Set when the cell is cut but its fluid part is below the sliver threshold.
  bool sliver = false;

  double measure() const;
};

/// Quadrature on the arc of the circle inside a cut cell. Normals point out
/// of the fluid, i.e. towards the disk center.
struct SurfaceRule {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<Point> normals;

  double measure() const;
};

/// Fluid part of a cut cell with area below this is treated as empty.
inline constexpr double kSliverArea = 1e-14;
/// Containment tolerance on the signed distance.
inline constexpr double kGeometryTolerance = 1e-12;

CellClass classify_cell(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell);

/// Rule for the fluid part of a Fluid or Cut cell, exact for polynomials of
/// degree `q_vol` on full cells. Cut cells are integrated in polar
/// coordinates about the disk center so that the circular boundary is
/// represented exactly; the radial direction is exact for degree `q_vol`
/// and the angular direction is resolved with a subdivided Gauss rule.
/// Throws std::invalid_argument for Solid cells.
VolumeRule volume_rule(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell, int q_vol);

/// Rule on the circular arc inside a Cut cell. Throws for non-cut cells.
SurfaceRule surface_rule(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell, int q_surf);

/// Cells intersecting the stabilization disk (radius = multiplier * disk
/// radius, same center) and the interior faces shared by two such cells.
struct StabilizationSubmesh {
  double radius = 0.0;
  std::vector<char> contains;  // per cell
  std::vector<CellId> cells;
  std::vector<FaceId> faces;

  bool in_submesh(CellId c) const { return contains[c.value] != 0; }
};

StabilizationSubmesh build_stabilization_submesh(const BackgroundMesh& mesh, const RigidDisk& disk,
                                                 double radius_multiplier);

/// Classification plus cached volume/surface rules for every cell of a mesh.
/// Immutable after construction.
class CutGeometry {
 public:
  CutGeometry(const BackgroundMesh& mesh, const RigidDisk& disk, int q_vol, int q_surf);

  const BackgroundMesh& mesh() const { return *mesh_; }
  const RigidDisk& disk() const { return disk_; }
  int volume_degree() const { return q_vol_; }
  int surface_degree() const { return q_surf_; }

  CellClass cell_class(CellId c) const { return classes_[c.value]; }
  /// Empty for Solid cells.
  const VolumeRule& volume(CellId c) const { return volume_[c.value]; }
  /// Empty for non-cut cells.
  const SurfaceRule& surface(CellId c) const { return surface_[c.value]; }
  bool has_fluid(CellId c) const { return classes_[c.value] != CellClass::Solid; }

  double fluid_area() const;
  double interface_length() const;
  int count(CellClass c) const;

  /// CSV dump "cell_i,cell_j,x,y,w,kind" with kind in {volume, surface}.
  void dump_quadrature(std::ostream& os) const;

 private:
  const BackgroundMesh* mesh_;
  RigidDisk disk_;
  int q_vol_;
  int q_surf_;
  std::vector<CellClass> classes_;
  std::vector<VolumeRule> volume_;
  std::vector<SurfaceRule> surface_;
};

}  // namespace cutfem
