#pragma once

#include <compare>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace cutfem {

using Point = Eigen::Vector2d;

struct CellId {
  int value = -1;
  auto operator<=>(const CellId&) const = default;
};

struct FaceId {
  int value = -1;
  auto operator<=>(const FaceId&) const = default;
};

/// Interior face shared by two cells. `left` is the cell with the smaller
/// x (vertical faces) or smaller y (horizontal faces).
struct Face {
  CellId left;
  CellId right;
  Point a;  // segment endpoints
  Point b;
  bool vertical = false;
};

/// Boundary face on the outer boundary of the unit square.
struct BoundaryFace {
  CellId cell;
  Point a;
  Point b;
  Point normal;  // outward w.r.t. the unit square
};

/// Uniform Cartesian decomposition of (0,1)^2 into N x N squares with
/// N = 4 * 2^level. The cell diameter h = sqrt(2)/N equals h0 / 2^level
/// with h0 = 1/(2 sqrt(2)).
///
/// Cell (i, j) has lower-left corner (i s, j s), with id i + j N.
/// Interior faces are numbered vertical ones first (between (i,j) and
/// (i+1,j), id i + j (N-1)), then horizontal ones (between (i,j) and
/// (i,j+1), offset N (N-1), id i + j N).
class BackgroundMesh {
 public:
  static constexpr int kMaxLevel = 10;

  explicit BackgroundMesh(int level);

  int level() const { return level_; }
  int cells_per_axis() const { return n_; }
  int num_cells() const { return n_ * n_; }
  double cell_size() const { return size_; }
  /// Cell diameter (diagonal length).
  double diameter() const;

  CellId cell(int i, int j) const;
  bool valid(CellId c) const { return c.value >= 0 && c.value < num_cells(); }
  std::pair<int, int> grid(CellId c) const;
  Point lower_left(CellId c) const;
  Point upper_right(CellId c) const;
  /// Cell containing point p (points on shared faces go to the upper/right cell).
  CellId locate(const Point& p) const;

  const std::vector<Face>& interior_faces() const { return faces_; }
  const Face& face(FaceId f) const;
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  /// Interior faces of `c` paired with the opposite cell; boundary faces are
  /// not reported.
  std::vector<std::pair<FaceId, CellId>> neighbors(CellId c) const;

  /// Writes one line "i j x_min y_min size" per cell.
  void dump(std::ostream& os) const;

 private:
  int level_;
  int n_;
  double size_;
  std::vector<Face> faces_;
  std::vector<BoundaryFace> boundary_;
};

BackgroundMesh build_mesh(int level);

}  // namespace cutfem
