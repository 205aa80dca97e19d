#pragma once

// Fourth-order finite differences on a grid line that may contain unusable
// nodes. The first stencil whose points are all usable wins; stencils fall
// back to second order only when no five-point window fits.

#include <array>
#include <optional>

namespace ksurf {

struct Stencil {
  int first;  // offset of the first point relative to the evaluation node
  int count;
  std::array<double, 5> weights;
  double denominator;
};

inline constexpr std::array<Stencil, 8> kFirstDerivativeStencils{{
    {-2, 5, {1, -8, 0, 8, -1}, 12},
    {-1, 5, {-3, -10, 18, -6, 1}, 12},
    {-3, 5, {-1, 6, -18, 10, 3}, 12},
    {0, 5, {-25, 48, -36, 16, -3}, 12},
    {-4, 5, {3, -16, 36, -48, 25}, 12},
    {-1, 3, {-1, 0, 1, 0, 0}, 2},
    {0, 3, {-3, 4, -1, 0, 0}, 2},
    {-2, 3, {1, -4, 3, 0, 0}, 2},
}};

// Picks a stencil for node `pos` on a line of `length` nodes; usable(k) tells
// whether node k may be read.
template <typename Usable>
std::optional<Stencil> pick_stencil(int pos, int length, Usable&& usable) {
  for (const auto& s : kFirstDerivativeStencils) {
    const int lo = pos + s.first;
    const int hi = lo + s.count - 1;
    if (lo < 0 || hi >= length) continue;
    bool ok = true;
    for (int k = lo; k <= hi && ok; ++k) ok = usable(k);
    if (ok) return s;
  }
  return std::nullopt;
}

// d/dt of value(k) at node pos with grid step h.
template <typename T, typename Value>
T apply_stencil(const Stencil& s, int pos, double h, Value&& value) {
  T acc = value(pos + s.first) * s.weights[0];
  for (int m = 1; m < s.count; ++m) {
    if (s.weights[m] != 0.0) acc = acc + value(pos + s.first + m) * s.weights[m];
  }
  return acc * (1.0 / (s.denominator * h));
}

}  // namespace ksurf
