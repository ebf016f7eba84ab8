#include "cutfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cutfem {

BackgroundMesh::BackgroundMesh(int level) : level_(level) {
  if (level < 0 || level > kMaxLevel) {
    throw std::invalid_argument("mesh level must be in [0, " + std::to_string(kMaxLevel) +
                                "], got " + std::to_string(level));
  }
  n_ = 4 << level;
  size_ = 1.0 / n_;

  faces_.reserve(2 * n_ * (n_ - 1));
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i + 1 < n_; ++i) {
      const double x = (i + 1) * size_;
      faces_.push_back({cell(i, j), cell(i + 1, j), Point(x, j * size_), Point(x, (j + 1) * size_), true});
    }
  }
  for (int j = 0; j + 1 < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const double y = (j + 1) * size_;
      faces_.push_back({cell(i, j), cell(i, j + 1), Point(i * size_, y), Point((i + 1) * size_, y), false});
    }
  }

  boundary_.reserve(4 * n_);
  for (int i = 0; i < n_; ++i) {
    const double x0 = i * size_, x1 = (i + 1) * size_;
    boundary_.push_back({cell(i, 0), Point(x0, 0.0), Point(x1, 0.0), Point(0.0, -1.0)});
    boundary_.push_back({cell(i, n_ - 1), Point(x0, 1.0), Point(x1, 1.0), Point(0.0, 1.0)});
    boundary_.push_back({cell(0, i), Point(0.0, x0), Point(0.0, x1), Point(-1.0, 0.0)});
    boundary_.push_back({cell(n_ - 1, i), Point(1.0, x0), Point(1.0, x1), Point(1.0, 0.0)});
  }
}

double BackgroundMesh::diameter() const { return std::sqrt(2.0) * size_; }

CellId BackgroundMesh::cell(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw std::out_of_range("cell index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside grid");
  }
  return CellId{i + j * n_};
}

std::pair<int, int> BackgroundMesh::grid(CellId c) const {
  if (!valid(c)) throw std::out_of_range("invalid cell id " + std::to_string(c.value));
  return {c.value % n_, c.value / n_};
}

Point BackgroundMesh::lower_left(CellId c) const {
  const auto [i, j] = grid(c);
  return Point(i * size_, j * size_);
}

Point BackgroundMesh::upper_right(CellId c) const {
  const auto [i, j] = grid(c);
  return Point((i + 1) * size_, (j + 1) * size_);
}

CellId BackgroundMesh::locate(const Point& p) const {
  const int i = std::clamp(static_cast<int>(std::floor(p.x() * n_)), 0, n_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y() * n_)), 0, n_ - 1);
  return cell(i, j);
}

const Face& BackgroundMesh::face(FaceId f) const {
  if (f.value < 0 || f.value >= static_cast<int>(faces_.size())) {
    throw std::out_of_range("invalid face id " + std::to_string(f.value));
  }
  return faces_[f.value];
}

std::vector<std::pair<FaceId, CellId>> BackgroundMesh::neighbors(CellId c) const {
  const auto [i, j] = grid(c);
  const int horizontal_offset = n_ * (n_ - 1);
  std::vector<std::pair<FaceId, CellId>> out;
  out.reserve(4);
  if (i > 0) out.push_back({FaceId{(i - 1) + j * (n_ - 1)}, cell(i - 1, j)});
  if (i + 1 < n_) out.push_back({FaceId{i + j * (n_ - 1)}, cell(i + 1, j)});
  if (j > 0) out.push_back({FaceId{horizontal_offset + i + (j - 1) * n_}, cell(i, j - 1)});
  if (j + 1 < n_) out.push_back({FaceId{horizontal_offset + i + j * n_}, cell(i, j + 1)});
  return out;
}

void BackgroundMesh::dump(std::ostream& os) const {
  const auto old = os.precision(17);
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      os << i << ' ' << j << ' ' << i * size_ << ' ' << j * size_ << ' ' << size_ << '\n';
    }
  }
  os.precision(old);
}

BackgroundMesh build_mesh(int level) { return BackgroundMesh(level); }

}  // namespace cutfem
