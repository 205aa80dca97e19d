#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ksurf {

// Uniform grid on D = [0, x0] x [0, y0] with nx * ny nodes.
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;

  static GridSpec from_domain(double x0, double y0, double h) { return from_domain(x0, y0, h, h); }
  static GridSpec from_domain(double x0, double y0, double hx, double hy) {
    if (!(x0 > 0.0 && y0 > 0.0 && hx > 0.0 && hy > 0.0)) {
      throw std::invalid_argument("GridSpec: domain bounds and steps must be positive");
    }
    const double cx = x0 / hx, cy = y0 / hy;
    const auto nx = static_cast<int>(std::lround(cx));
    const auto ny = static_cast<int>(std::lround(cy));
    if (std::abs(cx - nx) > 1e-9 * std::max(1.0, cx) || std::abs(cy - ny) > 1e-9 * std::max(1.0, cy)) {
      throw std::invalid_argument("GridSpec: step must divide the domain length");
    }
    return GridSpec{nx + 1, ny + 1, hx, hy};
  }

  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  double x0() const { return (nx - 1) * hx; }
  double y0() const { return (ny - 1) * hy; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Dense (i, j) indexed storage, i along x.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int nx, int ny, const T& fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), fill) {}

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  bool contains(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

  typename std::vector<T>::reference operator()(int i, int j) { return data_[offset(i, j)]; }
  typename std::vector<T>::const_reference operator()(int i, int j) const { return data_[offset(i, j)]; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

 private:
  std::size_t offset(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(ny_) + static_cast<std::size_t>(j);
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

enum class NodeFlag : std::uint8_t { regular = 0, big_cell_violation = 1, angle_singular = 2 };

}  // namespace ksurf
