#include "orbitmatch/spatial_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

namespace {
constexpr unsigned kMaxTotalBits = 22;  // at most 2^22 cells
}

TorusGrid::TorusGrid(std::size_t dim, Metric metric, unsigned bits)
    : dim_(dim), metric_(metric), bits_(0), max_bits_(0) {
  if (dim_ == 0) throw DimensionMismatch("grid dimension must be >= 1");
  max_bits_ = kMaxTotalBits / static_cast<unsigned>(dim_);
  bits_ = std::min(bits, max_bits_);
  cells_.assign(std::size_t{1} << (bits_ * dim_), {});
}

unsigned TorusGrid::bits_for(std::size_t expected_points, std::size_t dim) {
  if (expected_points < 2) return 0;
  auto b = static_cast<unsigned>(std::floor(std::log2(static_cast<double>(expected_points)) / static_cast<double>(dim)));
  return std::min(b, kMaxTotalBits / static_cast<unsigned>(dim));
}

unsigned TorusGrid::bits_for_radius(Fixed64 axis_radius, std::size_t dim, std::size_t n_points) {
  // width 2^(64-b) >= axis_radius  <=>  b <= 64 - bit_width(axis_radius - 1)
  unsigned need = axis_radius <= 1 ? 64u : 64u - static_cast<unsigned>(std::bit_width(axis_radius - 1));
  return std::min(need, bits_for(n_points, dim));
}

std::size_t TorusGrid::cell_of(std::span<const Fixed64> p) const {
  if (bits_ == 0) return 0;
  std::size_t cell = 0;
  for (std::size_t c = 0; c < dim_; ++c) cell = (cell << bits_) | static_cast<std::size_t>(p[c] >> (64 - bits_));
  return cell;
}

void TorusGrid::insert(std::span<const Fixed64> p, std::uint32_t id) {
  if (p.size() != dim_) throw DimensionMismatch("point dimension does not match grid");
  const auto slot = static_cast<std::uint32_t>(ids_.size());
  coords_.insert(coords_.end(), p.begin(), p.end());
  ids_.push_back(id);
  cells_[cell_of(p)].push_back(slot);
  if (bits_ < max_bits_ && ids_.size() > 8 * cells_.size()) rebuild(bits_ + 1);
}

void TorusGrid::rebuild(unsigned bits) {
  bits_ = bits;
  cells_.assign(std::size_t{1} << (bits_ * dim_), {});
  for (std::size_t slot = 0; slot < ids_.size(); ++slot) {
    std::span<const Fixed64> p(coords_.data() + slot * dim_, dim_);
    cells_[cell_of(p)].push_back(static_cast<std::uint32_t>(slot));
  }
}

std::optional<DistKey> TorusGrid::nearest_below(std::span<const Fixed64> q, DistKey bound) const {
  std::optional<DistKey> best;
  auto consider = [&](std::uint32_t, DistKey key) {
    if (key < bound && (!best || key < *best)) best = key;
  };
  const std::size_t g = axis_cells();
  const Fixed64 width = bits_ == 0 ? 0 : Fixed64{1} << (64 - bits_);
  for (std::size_t r = 0;; ++r) {
    if (2 * r + 1 >= g) {
      for (std::size_t cell = 0; cell < cells_.size(); ++cell) scan_cell(cell, q, consider);
      return best;
    }
    visit_cells(q, r, true, [&](std::size_t cell) { scan_cell(cell, q, consider); });
    // Unvisited points are at least r full cells away along some axis.
    const DistKey floor_key = axis_bound_key(static_cast<Fixed64>(r) * width, metric_);
    const DistKey current = best ? *best : bound;
    if (current <= floor_key) return best;
  }
}

}  // namespace orbitmatch
