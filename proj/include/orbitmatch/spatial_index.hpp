#pragma once

// Uniform grid over the d-torus with 2^bits cells per axis. Cell lookup is
// the top `bits` bits of each fixed-point coordinate, so wraparound is free.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "orbitmatch/core.hpp"

namespace orbitmatch {

class TorusGrid {
 public:
  TorusGrid(std::size_t dim, Metric metric, unsigned bits);

  /// Bits per axis so that about `expected_points` points share ~1 cell each.
  static unsigned bits_for(std::size_t expected_points, std::size_t dim);
  /// Largest bits per axis whose cell width is still >= `radius_key` reach.
  static unsigned bits_for_radius(Fixed64 axis_radius, std::size_t dim, std::size_t n_points);

  std::size_t dim() const noexcept { return dim_; }
  unsigned bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Inserts a point; refines cells x1/2 when mean occupancy exceeds 8.
  void insert(std::span<const Fixed64> p, std::uint32_t id);

  /// Smallest key among stored points that is below `bound`, if any.
  std::optional<DistKey> nearest_below(std::span<const Fixed64> q, DistKey bound) const;

  /// Calls fn(id, key) for every stored point with key < limit. Cells are
  /// scanned out to the per-axis reach of `axis_limit` (units of 2^-64).
  template <typename Fn>
  void for_each_within(std::span<const Fixed64> q, Fixed64 axis_limit, DistKey limit, Fn&& fn) const;

 private:
  std::size_t cell_of(std::span<const Fixed64> p) const;
  std::size_t axis_cells() const noexcept { return std::size_t{1} << bits_; }
  void rebuild(unsigned bits);
  template <typename Fn>
  void visit_cells(std::span<const Fixed64> q, std::size_t reach, bool ring_only, Fn&& fn) const;
  template <typename Fn>
  void scan_cell(std::size_t cell, std::span<const Fixed64> q, Fn&& fn) const;

  std::size_t dim_;
  Metric metric_;
  unsigned bits_;
  unsigned max_bits_;
  std::vector<std::vector<std::uint32_t>> cells_;  // slots into coords_/ids_
  std::vector<Fixed64> coords_;
  std::vector<std::uint32_t> ids_;
};

// ---------------------------------------------------------------------------

template <typename Fn>
void TorusGrid::scan_cell(std::size_t cell, std::span<const Fixed64> q, Fn&& fn) const {
  for (auto slot : cells_[cell]) {
    std::span<const Fixed64> p(coords_.data() + static_cast<std::size_t>(slot) * dim_, dim_);
    fn(slot, distance_key(p, q, metric_));
  }
}

// Visits cells whose per-axis offset from q's cell is within `reach`; with
// ring_only, only those at Chebyshev offset exactly `reach`. Axes where the
// window covers the whole circle are enumerated once.
template <typename Fn>
void TorusGrid::visit_cells(std::span<const Fixed64> q, std::size_t reach, bool ring_only, Fn&& fn) const {
  const std::size_t g = axis_cells();
  const bool full = 2 * reach + 1 >= g;
  std::vector<std::size_t> base(dim_);
  for (std::size_t c = 0; c < dim_; ++c) base[c] = bits_ == 0 ? 0 : static_cast<std::size_t>(q[c] >> (64 - bits_));
  const std::size_t span = full ? g : 2 * reach + 1;
  std::vector<std::size_t> digit(dim_, 0);
  for (;;) {
    bool on_ring = !ring_only || full;
    std::size_t cell = 0;
    for (std::size_t c = 0; c < dim_; ++c) {
      std::size_t coord;
      if (full) {
        coord = digit[c];
      } else {
        coord = (base[c] + g + digit[c] - reach) % g;
        if (digit[c] == 0 || digit[c] == 2 * reach) on_ring = true;
      }
      cell = cell * g + coord;
    }
    if (on_ring) fn(cell);
    std::size_t c = 0;
    while (c < dim_ && ++digit[c] == span) digit[c++] = 0;
    if (c == dim_) break;
  }
}

template <typename Fn>
void TorusGrid::for_each_within(std::span<const Fixed64> q, Fixed64 axis_limit, DistKey limit, Fn&& fn) const {
  const Fixed64 width = bits_ == 0 ? ~Fixed64{0} : Fixed64{1} << (64 - bits_);
  std::size_t reach = bits_ == 0 ? 0 : static_cast<std::size_t>(axis_limit / width) + 1;
  reach = std::min(reach, axis_cells());
  visit_cells(q, reach, false, [&](std::size_t cell) {
    scan_cell(cell, q, [&](std::uint32_t slot, DistKey key) {
      if (key < limit) fn(ids_[slot], key);
    });
  });
}

}  // namespace orbitmatch
