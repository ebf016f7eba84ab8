#include "cutfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "cutfem/quadrature.hpp"

namespace cutfem {

namespace {

constexpr double kPi = std::numbers::pi;
// Angular sub-intervals are at most this wide.
constexpr double kMaxArc = kPi / 16.0;

int angular_points(int q) { return std::max(10, q + 6); }

struct Box {
  Point lo;
  Point hi;
};

Box cell_box(const BackgroundMesh& mesh, CellId c) { return {mesh.lower_left(c), mesh.upper_right(c)}; }

double distance_to_box(const Point& p, const Box& b) {
  const double dx = std::max({b.lo.x() - p.x(), 0.0, p.x() - b.hi.x()});
  const double dy = std::max({b.lo.y() - p.y(), 0.0, p.y() - b.hi.y()});
  return std::hypot(dx, dy);
}

double farthest_corner(const Point& p, const Box& b) {
  const double dx = std::max(std::abs(b.lo.x() - p.x()), std::abs(b.hi.x() - p.x()));
  const double dy = std::max(std::abs(b.lo.y() - p.y()), std::abs(b.hi.y() - p.y()));
  return std::hypot(dx, dy);
}

// Parameter range [t0, t1] (t >= 0) of the ray origin + t dir inside the box.
bool clip_ray(const Point& origin, const Point& dir, const Box& box, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    if (std::abs(dir[k]) < 1e-300) {
      if (origin[k] < box.lo[k] || origin[k] > box.hi[k]) return false;
      continue;
    }
    double a = (box.lo[k] - origin[k]) / dir[k];
    double b = (box.hi[k] - origin[k]) / dir[k];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  return t1 > t0;
}

// Angles (about the disk center) of the points where the circle meets the
// box edges.
void circle_edge_angles(const RigidDisk& disk, const Box& box, std::vector<double>& out) {
  const Point& c = disk.center;
  const double r = disk.radius;
  for (int k = 0; k < 2; ++k) {
    const int other = 1 - k;
    for (double edge : {box.lo[k], box.hi[k]}) {
      const double d = edge - c[k];
      if (std::abs(d) > r) continue;
      const double w = std::sqrt(std::max(r * r - d * d, 0.0));
      for (double s : {-w, w}) {
        const double along = c[other] + s;
        if (along < box.lo[other] || along > box.hi[other]) continue;
        Point rel;
        rel[k] = d;
        rel[other] = s;
        out.push_back(std::atan2(rel.y(), rel.x()));
      }
    }
  }
}

// Sorted breakpoints in [-pi, pi] splitting the angle range into pieces on
// which the polar description of (box minus disk) and of the arc is smooth.
std::vector<double> angular_breakpoints(const RigidDisk& disk, const Box& box) {
  std::vector<double> br{-kPi, kPi};
  const Point& c = disk.center;
  for (const Point& corner : {box.lo, box.hi, Point(box.lo.x(), box.hi.y()), Point(box.hi.x(), box.lo.y())}) {
    const Point rel = corner - c;
    if (rel.norm() > 1e-15) br.push_back(std::atan2(rel.y(), rel.x()));
  }
  circle_edge_angles(disk, box, br);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
           br.end());
  return br;
}

template <class Fn>
void for_each_angular_piece(const std::vector<double>& breaks, Fn&& fn) {
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    if (b - a < 1e-15) continue;
    const int pieces = static_cast<int>(std::ceil((b - a) / kMaxArc));
    const double width = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) fn(a + p * width, a + (p + 1) * width);
  }
}

VolumeRule tensor_rule(const Box& box, int q) {
  const Rule1D g = gauss_legendre(gauss_points_for_degree(q));
  const Point ext = box.hi - box.lo;
  VolumeRule rule;
  rule.points.reserve(g.size() * g.size());
  rule.weights.reserve(g.size() * g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      rule.points.emplace_back(box.lo.x() + ext.x() * g.points[i], box.lo.y() + ext.y() * g.points[j]);
      rule.weights.push_back(ext.x() * ext.y() * g.weights[i] * g.weights[j]);
    }
  }
  return rule;
}

VolumeRule polar_cut_rule(const RigidDisk& disk, const Box& box, int q) {
  const Rule1D gt = gauss_legendre(angular_points(q));
  // integrand in polar form is a polynomial of degree q + 1 in the radius
  const Rule1D gr = gauss_legendre(gauss_points_for_degree(q + 1));
  const Point& c = disk.center;
  const double r = disk.radius;
  const double scale = (box.hi - box.lo).norm();

  VolumeRule rule;
  for_each_angular_piece(angular_breakpoints(disk, box), [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    double t0 = 0.0, t1 = 0.0;
    if (!clip_ray(c, Point(std::cos(mid), std::sin(mid)), box, t0, t1)) return;
    if (t1 - std::max(t0, r) <= 1e-14 * scale) return;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double theta = a + (b - a) * gt.points[i];
      const Point dir(std::cos(theta), std::sin(theta));
      if (!clip_ray(c, dir, box, t0, t1)) continue;
      const double lo = std::max(t0, r);
      const double hi = t1;
      if (hi <= lo) continue;
      for (std::size_t j = 0; j < gr.size(); ++j) {
        const double rho = lo + (hi - lo) * gr.points[j];
        rule.points.push_back(c + rho * dir);
        rule.weights.push_back((b - a) * gt.weights[i] * (hi - lo) * gr.weights[j] * rho);
      }
    }
  });
  return rule;
}

}  // namespace

const char* to_string(CellClass c) {
  switch (c) {
    case CellClass::Fluid: return "fluid";
    case CellClass::Solid: return "solid";
    case CellClass::Cut: return "cut";
  }
  return "?";
}

double VolumeRule::measure() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double SurfaceRule::measure() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

CellClass classify_cell(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell) {
  const Box box = cell_box(mesh, cell);
  if (distance_to_box(disk.center, box) >= disk.radius) return CellClass::Fluid;
  if (farthest_corner(disk.center, box) <= disk.radius) return CellClass::Solid;
  return CellClass::Cut;
}

VolumeRule volume_rule(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell, int q_vol) {
  if (q_vol < 1) throw std::invalid_argument("volume_rule: q_vol must be >= 1");
  const Box box = cell_box(mesh, cell);
  switch (classify_cell(mesh, disk, cell)) {
    case CellClass::Solid:
      throw std::invalid_argument("volume_rule: no fluid measure in solid cell " + std::to_string(cell.value));
    case CellClass::Fluid:
      return tensor_rule(box, q_vol);
    case CellClass::Cut:
      break;
  }
  VolumeRule rule = polar_cut_rule(disk, box, q_vol);
  if (rule.measure() < kSliverArea) {
    rule = VolumeRule{};
    rule.sliver = true;
  }
  return rule;
}

SurfaceRule surface_rule(const BackgroundMesh& mesh, const RigidDisk& disk, CellId cell, int q_surf) {
  if (classify_cell(mesh, disk, cell) != CellClass::Cut) {
    throw std::invalid_argument("surface_rule: cell " + std::to_string(cell.value) + " is not cut");
  }
  const Box box = cell_box(mesh, cell);
  const Rule1D gt = gauss_legendre(angular_points(q_surf));
  const Point& c = disk.center;
  const double r = disk.radius;

  std::vector<double> breaks{-kPi, kPi};
  circle_edge_angles(disk, box, breaks);
  std::sort(breaks.begin(), breaks.end());

  SurfaceRule rule;
  for_each_angular_piece(breaks, [&](double a, double b) {
    const double mid = 0.5 * (a + b);
    const Point pm = c + r * Point(std::cos(mid), std::sin(mid));
    if (pm.x() < box.lo.x() || pm.x() > box.hi.x() || pm.y() < box.lo.y() || pm.y() > box.hi.y()) return;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double theta = a + (b - a) * gt.points[i];
      const Point dir(std::cos(theta), std::sin(theta));
      rule.points.push_back(c + r * dir);
      rule.weights.push_back(r * (b - a) * gt.weights[i]);
      rule.normals.push_back(-dir);
    }
  });
  return rule;
}

StabilizationSubmesh build_stabilization_submesh(const BackgroundMesh& mesh, const RigidDisk& disk,
                                                 double radius_multiplier) {
  if (!(radius_multiplier >= 1.0)) {
    throw std::invalid_argument("stabilization radius multiplier must be >= 1");
  }
  StabilizationSubmesh sub;
  sub.radius = radius_multiplier * disk.radius;
  sub.contains.assign(mesh.num_cells(), 0);
  for (int id = 0; id < mesh.num_cells(); ++id) {
    const CellId c{id};
    if (distance_to_box(disk.center, cell_box(mesh, c)) < sub.radius) {
      sub.contains[id] = 1;
      sub.cells.push_back(c);
    }
  }
  const auto& faces = mesh.interior_faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (sub.in_submesh(faces[f].left) && sub.in_submesh(faces[f].right)) {
      sub.faces.push_back(FaceId{static_cast<int>(f)});
    }
  }
  return sub;
}

CutGeometry::CutGeometry(const BackgroundMesh& mesh, const RigidDisk& disk, int q_vol, int q_surf)
    : mesh_(&mesh), disk_(disk), q_vol_(q_vol), q_surf_(q_surf) {
  if (!(disk.radius > 0.0)) throw std::invalid_argument("disk radius must be positive");
  if (disk.center.x() - disk.radius <= 0.0 || disk.center.x() + disk.radius >= 1.0 ||
      disk.center.y() - disk.radius <= 0.0 || disk.center.y() + disk.radius >= 1.0) {
    throw std::invalid_argument("disk must lie strictly inside the unit square");
  }
  const int n = mesh.num_cells();
  classes_.resize(n);
  volume_.resize(n);
  surface_.resize(n);
  for (int id = 0; id < n; ++id) {
    const CellId c{id};
    classes_[id] = classify_cell(mesh, disk, c);
    if (classes_[id] != CellClass::Solid) volume_[id] = volume_rule(mesh, disk, c, q_vol);
    if (classes_[id] == CellClass::Cut) surface_[id] = surface_rule(mesh, disk, c, q_surf);
  }
}

double CutGeometry::fluid_area() const {
  double sum = 0.0;
  for (const auto& r : volume_) sum += r.measure();
  return sum;
}

double CutGeometry::interface_length() const {
  double sum = 0.0;
  for (const auto& r : surface_) sum += r.measure();
  return sum;
}

int CutGeometry::count(CellClass c) const {
  return static_cast<int>(std::count(classes_.begin(), classes_.end(), c));
}

void CutGeometry::dump_quadrature(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "cell_i,cell_j,x,y,w,kind\n";
  for (int id = 0; id < mesh_->num_cells(); ++id) {
    const auto [i, j] = mesh_->grid(CellId{id});
    const auto& v = volume_[id];
    for (std::size_t q = 0; q < v.points.size(); ++q) {
      os << i << ',' << j << ',' << v.points[q].x() << ',' << v.points[q].y() << ',' << v.weights[q]
         << ",volume\n";
    }
    const auto& s = surface_[id];
    for (std::size_t q = 0; q < s.points.size(); ++q) {
      os << i << ',' << j << ',' << s.points[q].x() << ',' << s.points[q].y() << ',' << s.weights[q]
         << ",surface\n";
    }
  }
  os.precision(old);
}

}  // namespace cutfem
