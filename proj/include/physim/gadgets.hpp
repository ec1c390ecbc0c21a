#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "physim/cost.hpp"
#include "physim/error.hpp"

namespace physim {

// ---------------------------------------------------------------------------
// Frictionless-track OR.
//
// Bit i is a unit-mass block present (1) or absent (0) at location i of a
// length-n track. A unit-mass probe is launched from location 0 with velocity
// v. If every bit is 0 the probe itself is the first block to reach location
// n+1, which it does at time (n+1)/v; otherwise it hits the first present block
// and a different block arrives first. The observer waits for the full
// deadline in both cases.
// ---------------------------------------------------------------------------

struct OrTrackResult {
  std::uint8_t result = 0;
  bool in_model = true;  // false when v > sqrt(n)
  CostLedger ledger;
};

inline OrTrackResult or_track(std::span<const std::uint8_t> bits, double v) {
  const std::size_t n = bits.size();
  if (n == 0) throw invalid_parameter("or_track: track length must be >= 1");
  if (!(v > 0.0) || !std::isfinite(v)) throw invalid_parameter("or_track: probe velocity must be positive");

  // Position of the first obstacle, or n+1 when the track is empty.
  std::size_t first_block = n + 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (bits[i] > 1) throw invalid_parameter("or_track: bits must be 0 or 1");
    if (bits[i] && first_block == n + 1) first_block = i + 1;
  }
  const bool probe_arrives_first = first_block == n + 1;

  OrTrackResult out;
  out.result = probe_arrives_first ? 0 : 1;
  out.in_model = v <= std::sqrt(static_cast<double>(n));

  std::string launch = "probe launch";
  if (!out.in_model) launch += " [out-of-model: v > sqrt(n)]";
  out.ledger.add(std::move(launch), 0.0, v * v);
  out.ledger.add("deadline wait", (static_cast<double>(n) + 1.0) / v, 0.0);
  return out;
}

inline OrTrackResult or_track(const std::vector<std::uint8_t>& bits, double v) {
  return or_track(std::span<const std::uint8_t>(bits), v);
}

// ---------------------------------------------------------------------------
// Heat-diffusion averaging on an insulated side x side plate.
// ---------------------------------------------------------------------------

class HeatGrid {
 public:
  HeatGrid(std::size_t side, std::vector<double> temperatures) : side_(side), t_(std::move(temperatures)) {
    if (side == 0) throw invalid_parameter("heat grid side must be >= 1");
    if (t_.size() != side * side) throw dimension_error("heat grid needs side*side temperatures");
    for (double x : t_)
      if (!std::isfinite(x) || x < 0.0) throw invalid_parameter("temperatures must be finite and nonnegative");
  }

  static HeatGrid uniform(std::size_t side, double value) { return HeatGrid(side, std::vector<double>(side * side, value)); }

  // All heat in cell (0,0).
  static HeatGrid hot_corner(std::size_t side, double heat) {
    std::vector<double> t(side * side, 0.0);
    t.at(0) = heat;
    return HeatGrid(side, std::move(t));
  }

  std::size_t side() const { return side_; }
  std::size_t cells() const { return t_.size(); }
  double operator()(std::size_t r, std::size_t c) const { return t_[r * side_ + c]; }
  const std::vector<double>& temperatures() const { return t_; }

  double total_heat() const {
    double s = 0.0;
    for (double x : t_) s += x;
    return s;
  }

  // One synchronous step T'_c = T_c + (1/4) sum_nb (T_nb - T_c). Missing
  // neighbours at the boundary mirror the cell itself, so they contribute
  // zero flux; each pairwise flux is applied with opposite signs to both
  // cells, which conserves total heat.
  void step() {
    const std::size_t s = side_;
    scratch_.assign(t_.begin(), t_.end());
    for (std::size_t r = 0; r < s; ++r) {
      for (std::size_t c = 0; c < s; ++c) {
        const double here = t_[r * s + c];
        if (c + 1 < s) {
          const double f = 0.25 * (t_[r * s + c + 1] - here);
          scratch_[r * s + c] += f;
          scratch_[r * s + c + 1] -= f;
        }
        if (r + 1 < s) {
          const double f = 0.25 * (t_[(r + 1) * s + c] - here);
          scratch_[r * s + c] += f;
          scratch_[(r + 1) * s + c] -= f;
        }
      }
    }
    t_.swap(scratch_);
  }

 private:
  std::size_t side_;
  std::vector<double> t_;
  std::vector<double> scratch_;
};

enum class DiffusionStatus { Converged, NotConverged };

struct DiffusionResult {
  double mean_estimate = 0.0;
  std::uint64_t steps_used = 0;
  DiffusionStatus status = DiffusionStatus::Converged;
  HeatGrid grid;
  CostLedger ledger;  // time = steps, energy 0: the plate evolves on its own
};

inline constexpr std::uint64_t kDefaultDiffusionSteps = 10'000'000;

// Iterates until every cell is within eps of the (conserved) mean or
// max_steps is reached. mean_estimate is read off a single cell.
inline DiffusionResult diffuse_average(HeatGrid grid, double eps, std::uint64_t max_steps = kDefaultDiffusionSteps) {
  if (!(eps > 0.0)) throw invalid_parameter("diffuse_average: eps must be positive");
  if (max_steps == 0) throw invalid_parameter("diffuse_average: max_steps must be positive");

  const double mean = grid.total_heat() / static_cast<double>(grid.cells());
  auto spread = [&] {
    double m = 0.0;
    for (double x : grid.temperatures()) m = std::max(m, std::abs(x - mean));
    return m;
  };

  std::uint64_t steps = 0;
  bool converged = spread() < eps;
  while (!converged && steps < max_steps) {
    grid.step();
    ++steps;
    converged = spread() < eps;
  }

  DiffusionResult out{grid(0, 0), steps, converged ? DiffusionStatus::Converged : DiffusionStatus::NotConverged,
                      std::move(grid), {}};
  out.ledger.add("diffusion", static_cast<double>(steps), 0.0);
  return out;
}

}  // namespace physim
