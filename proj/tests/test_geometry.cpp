#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "cutfem/geometry.hpp"
#include "oracles.hpp"

using namespace cutfem;

namespace {
constexpr double kPi = oracle::kPi;
}

TEST(Geometry, Classification) {
  const BackgroundMesh m(2);
  const RigidDisk disk;
  EXPECT_EQ(classify_cell(m, disk, m.cell(0, 0)), CellClass::Fluid);
  EXPECT_EQ(classify_cell(m, disk, m.cell(7, 7)), CellClass::Solid);  // [0.4375, 0.5]^2
  EXPECT_EQ(classify_cell(m, disk, m.cell(9, 7)), CellClass::Cut);    // corner distances straddle r
  // counts consistent with areas: cut cells exist on every level
  for (int level = 0; level <= 3; ++level) {
    const BackgroundMesh mm(level);
    const CutGeometry g(mm, disk, 6, 6);
    EXPECT_GT(g.count(CellClass::Cut), 0);
    EXPECT_EQ(g.count(CellClass::Cut) + g.count(CellClass::Fluid) + g.count(CellClass::Solid), mm.num_cells());
  }
}

TEST(Geometry, SolidCellHasNoRule) {
  const BackgroundMesh m(2);
  EXPECT_THROW(volume_rule(m, RigidDisk{}, m.cell(7, 7), 6), std::invalid_argument);
  EXPECT_THROW(surface_rule(m, RigidDisk{}, m.cell(0, 0), 6), std::invalid_argument);
}

TEST(Geometry, AreaAndLength) {
  const RigidDisk disk;
  for (int level = 0; level <= 4; ++level) {
    const BackgroundMesh m(level);
    const CutGeometry g(m, disk, 6, 6);
    EXPECT_NEAR(g.fluid_area(), 1.0 - 0.01 * kPi, 1e-9) << "level " << level;
    EXPECT_NEAR(g.interface_length(), 0.2 * kPi, 1e-10) << "level " << level;
  }
}

TEST(Geometry, PolynomialMomentsMatchAnalyticDisk) {
  const RigidDisk disk{{0.47, 0.53}, 0.13};
  const BackgroundMesh m(1);
  const int q = 6;
  const CutGeometry g(m, disk, q, q);
  for (int a = 0; a <= q; ++a) {
    for (int b = 0; a + b <= q; ++b) {
      double sum = 0.0;
      for (int id = 0; id < m.num_cells(); ++id) {
        const VolumeRule& r = g.volume(CellId{id});
        for (std::size_t i = 0; i < r.points.size(); ++i) {
          sum += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
        }
      }
      EXPECT_NEAR(sum, oracle::fluid_moment(a, b, disk.center, disk.radius), 1e-12) << a << " " << b;
    }
  }
}

TEST(Geometry, SurfacePointsAndNormals) {
  const RigidDisk disk;
  const BackgroundMesh m(2);
  const CutGeometry g(m, disk, 6, 6);
  double second_moment = 0.0;
  for (int id = 0; id < m.num_cells(); ++id) {
    const SurfaceRule& s = g.surface(CellId{id});
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      EXPECT_NEAR((s.points[i] - disk.center).norm(), disk.radius, 1e-12);
      const Point expected = (disk.center - s.points[i]) / disk.radius;
      EXPECT_NEAR((s.normals[i] - expected).norm(), 0.0, 1e-12);
      second_moment += s.weights[i] * s.points[i].x() * s.points[i].x();
    }
  }
  // \int_circle x^2 ds = 2 pi R (cx^2 + R^2 / 2)
  const double r = disk.radius;
  EXPECT_NEAR(second_moment, 2.0 * kPi * r * (0.25 + r * r / 2.0), 1e-12);
}

TEST(Geometry, SliverCutGivesEmptyFlaggedRule) {
  const BackgroundMesh m(0);
  // the circle passes within 1e-9 of the far corner (0.25, 0.25) of cell (1, 1)
  const RigidDisk disk{{0.5, 0.5}, std::sqrt(2.0) * 0.25 - 1e-9};
  ASSERT_EQ(classify_cell(m, disk, m.cell(1, 1)), CellClass::Cut);
  const VolumeRule r = volume_rule(m, disk, m.cell(1, 1), 6);
  EXPECT_TRUE(r.sliver);
  EXPECT_TRUE(r.points.empty());
}

TEST(Geometry, DiskMustLieInsideTheSquare) {
  const BackgroundMesh m(0);
  EXPECT_THROW(CutGeometry(m, RigidDisk{{0.05, 0.5}, 0.1}, 6, 6), std::invalid_argument);
}

TEST(Geometry, StabilizationSubmesh) {
  const RigidDisk disk;
  for (int level = 0; level <= 3; ++level) {
    const BackgroundMesh m(level);
    const CutGeometry g(m, disk, 4, 4);
    const auto s1 = build_stabilization_submesh(m, disk, 1.0);
    const auto s2 = build_stabilization_submesh(m, disk, 2.0);
    for (int id = 0; id < m.num_cells(); ++id) {
      const CellId c{id};
      if (g.cell_class(c) != CellClass::Fluid) { EXPECT_TRUE(s1.in_submesh(c)); }
      if (s1.in_submesh(c)) { EXPECT_TRUE(s2.in_submesh(c)); }
    }
    for (FaceId f : s2.faces) {
      EXPECT_TRUE(s2.in_submesh(m.face(f).left));
      EXPECT_TRUE(s2.in_submesh(m.face(f).right));
    }
  }
  EXPECT_THROW(build_stabilization_submesh(BackgroundMesh(0), disk, 0.5), std::invalid_argument);
}

TEST(Geometry, SubmeshCountByEnumeration) {
  const BackgroundMesh m(2);
  const RigidDisk disk;
  const auto s = build_stabilization_submesh(m, disk, 2.0);
  // dense point sampling of each cell against the radius-0.2 disk
  int expected = 0;
  int faces = 0;
  std::vector<char> hit(m.num_cells(), 0);
  const int samples = 200;
  for (int id = 0; id < m.num_cells(); ++id) {
    const Point lo = m.lower_left(CellId{id});
    bool inside = false;
    for (int a = 0; a <= samples && !inside; ++a) {
      for (int b = 0; b <= samples && !inside; ++b) {
        const Point p = lo + m.cell_size() * Point(a, b) / samples;
        inside = (p - disk.center).norm() < 0.2;
      }
    }
    hit[id] = inside;
    expected += inside;
  }
  for (const Face& f : m.interior_faces()) faces += hit[f.left.value] && hit[f.right.value];
  EXPECT_EQ(static_cast<int>(s.cells.size()), expected);
  EXPECT_EQ(static_cast<int>(s.faces.size()), faces);
}

TEST(Geometry, QuadratureDump) {
  const BackgroundMesh m(0);
  const CutGeometry g(m, RigidDisk{}, 4, 4);
  std::ostringstream os;
  g.dump_quadrature(os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("cell_i,cell_j,x,y,w,kind", 0), 0u);
  EXPECT_NE(s.find(",surface"), std::string::npos);
  EXPECT_NE(s.find(",volume"), std::string::npos);
}

TEST(Geometry, CellHoldingTheCenterIsSolid) {
  const RigidDisk disk;
  for (int level = 2; level <= 5; ++level) {
    const BackgroundMesh m(level);
    EXPECT_EQ(classify_cell(m, disk, m.locate(disk.center)), CellClass::Solid) << "level " << level;
  }
}

TEST(Geometry, FirstMomentOfFluid) {
  const BackgroundMesh m(2);
  const CutGeometry g(m, RigidDisk{}, 6, 6);
  double sum = 0.0;
  for (int id = 0; id < m.num_cells(); ++id) {
    const VolumeRule& r = g.volume(CellId{id});
    for (std::size_t i = 0; i < r.points.size(); ++i) sum += r.weights[i] * r.points[i].x();
  }
  EXPECT_NEAR(sum, 0.5 * (1.0 - 0.01 * kPi), 1e-12);
}
