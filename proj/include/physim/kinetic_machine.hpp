#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <numbers>
#include <string>
#include <vector>

#include "physim/cost.hpp"
#include "physim/error.hpp"
#include "physim/event_calendar.hpp"
#include "physim/matrix.hpp"

namespace physim {

// ---------------------------------------------------------------------------
// Reference Boolean products.
// ---------------------------------------------------------------------------

namespace detail {
inline void require_square_pair(const BinaryMatrix& a, const BinaryMatrix& b, const char* who) {
  if (!a.square() || !b.square() || a.rows() != b.rows())
    throw dimension_error(std::string(who) + ": A and B must be square of equal size");
}
}  // namespace detail

// C(i,j) = OR_k (A(i,k) AND B(k,j)), evaluated literally.
inline BinaryMatrix brute_boolean_matmul(const BinaryMatrix& a, const BinaryMatrix& b) {
  detail::require_square_pair(a, b, "brute_boolean_matmul");
  const std::size_t n = a.rows();
  BinaryMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      int v = 0;
      for (std::size_t k = 0; k < n; ++k) v |= a(i, k) & b(k, j);
      c.set(i, j, v);
    }
  return c;
}

struct RamOpCounts {
  std::uint64_t visits = 0;    // list nodes stepped over, in traversal or search
  std::uint64_t removals = 0;  // nodes unlinked
  std::uint64_t resets = 0;    // matrix entries scanned while rebuilding the lists

  std::uint64_t total() const { return visits + removals + resets; }
};

struct RamMatmulResult {
  BinaryMatrix c;
  std::uint64_t op_count = 0;
  RamOpCounts ops;
};

// Column-list RAM algorithm: L_k holds the rows i with A(i,k) = 1. For each
// column j of B and each k with B(k,j) = 1, walk L_k, set C(i,j) = 1 and
// remove i from every later list L_k', k' > k. The lists are rebuilt from A
// after every column.
inline RamMatmulResult ram_boolean_matmul(const BinaryMatrix& a, const BinaryMatrix& b) {
  detail::require_square_pair(a, b, "ram_boolean_matmul");
  const std::size_t n = a.rows();
  BinaryMatrix c(n);
  RamOpCounts ops;

  std::vector<std::list<std::size_t>> lists(n);
  auto rebuild = [&] {
    for (std::size_t k = 0; k < n; ++k) {
      lists[k].clear();
      for (std::size_t i = 0; i < n; ++i) {
        ++ops.resets;
        if (a(i, k)) lists[k].push_back(i);
      }
    }
  };

  rebuild();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!b(k, j)) continue;
      for (std::size_t i : lists[k]) {
        ++ops.visits;
        c.set(i, j, 1);
        for (std::size_t later = k + 1; later < n; ++later) {
          auto& l = lists[later];
          for (auto it = l.begin(); it != l.end(); ++it) {
            ++ops.visits;
            if (*it == i) {
              l.erase(it);
              ++ops.removals;
              break;
            }
          }
        }
      }
    }
    rebuild();
  }
  return {std::move(c), ops.total(), ops};
}

// ---------------------------------------------------------------------------
// Clearing-energy models.
// ---------------------------------------------------------------------------

enum class EnergyModelKind { Kinetic, Optical };

struct EnergyModel {
  EnergyModelKind kind = EnergyModelKind::Kinetic;
  int channel_count = 0;  // optical channels per row; unused for Kinetic

  static EnergyModel kinetic() { return {EnergyModelKind::Kinetic, 0}; }
  // ceil(log2 n) channels, at least one.
  static EnergyModel optical(std::size_t n) { return optical_channels(std::max(1, ceil_log2(n))); }
  static EnergyModel optical_channels(int channels) {
    if (channels < 1) throw invalid_parameter("optical model needs at least one channel");
    return {EnergyModelKind::Optical, channels};
  }
};

inline const char* to_string(EnergyModelKind k) { return k == EnergyModelKind::Kinetic ? "kinetic" : "optical"; }

// Energy absorbed at distance d from one unit sent down a channel whose cells
// each absorb 1/2^channel of what enters them.
inline double optical_channel_absorption(int channel, std::int64_t d) {
  if (channel < 1) throw invalid_parameter("optical channel index must be >= 1");
  if (d < 1) throw invalid_parameter("clear distance must be >= 1");
  const double opacity = std::ldexp(1.0, -channel);
  return opacity * std::pow(1.0 - opacity, static_cast<double>(d - 1));
}

// The channel whose absorption at distance d is bounded below by 1/(8d).
inline int optical_witness_channel(std::int64_t d) {
  if (d < 1) throw invalid_parameter("clear distance must be >= 1");
  return std::max(1, ceil_log2(static_cast<std::size_t>(d)));
}

// Energy delivered to the cell d columns to the right of a collision.
inline double clear_energy(const EnergyModel& model, std::int64_t d) {
  if (d < 1) throw invalid_parameter("clear distance must be >= 1");
  if (model.kind == EnergyModelKind::Kinetic) {
    const double dd = static_cast<double>(d);
    return 1.0 / (dd * dd);
  }
  double total = 0.0;
  for (int l = 1; l <= model.channel_count; ++l) total += optical_channel_absorption(l, d);
  return total;
}

// ---------------------------------------------------------------------------
// Kinetic grid.
// ---------------------------------------------------------------------------

struct PendingClear {
  std::size_t row = 0;
  std::size_t col = 0;
  std::int64_t completion_time = 0;
  double delivered_energy = 0.0;
};

struct KineticMatvecResult;
class KineticGrid;
KineticMatvecResult kinetic_matvec(KineticGrid&, const BinaryVector&, const EnergyModel&);
CostLedger reset_grid(KineticGrid&);

// n x n cells, cell (i,k) in state 1 iff its block sits on the right side.
// A matvec may flip cells to 0; reset_grid restores A.
class KineticGrid {
 public:
  explicit KineticGrid(const BinaryMatrix& a)
      : original_(a),
        state_(a),
        stored_energy_(a.rows() * a.rows(), cell_budget(a.rows())),
        outstanding_(a.rows() * a.rows(), 0),
        pending_(2 * a.rows()) {
    if (!a.square()) throw dimension_error("KineticGrid: A must be square");
  }

  std::size_t n() const { return original_.rows(); }
  std::uint8_t state(std::size_t i, std::size_t k) const { return state_(i, k); }
  const BinaryMatrix& original() const { return original_; }
  const BinaryMatrix& cells() const { return state_; }
  double stored_energy(std::size_t i, std::size_t k) const { return stored_energy_[i * n() + k]; }
  std::size_t pending_clears() const { return pending_.pending(); }
  std::size_t cells_cleared() const { return cells_cleared_; }
  std::size_t collisions() const { return collisions_; }

  // Fresh: state equals A, nothing pending and nothing spent since reset.
  bool is_reset() const { return pending_.empty() && collisions_ == 0 && cells_cleared_ == 0 && state_ == original_; }

  // Stored per-cell clearing budget, log2 n.
  static double cell_budget(std::size_t n) { return std::log2(static_cast<double>(std::max<std::size_t>(1, n))); }

 private:
  friend KineticMatvecResult kinetic_matvec(KineticGrid&, const BinaryVector&, const EnergyModel&);
  friend CostLedger reset_grid(KineticGrid&);

  std::size_t index(std::size_t i, std::size_t k) const { return i * n() + k; }

  BinaryMatrix original_;
  BinaryMatrix state_;
  std::vector<double> stored_energy_;
  std::vector<std::uint32_t> outstanding_;  // scheduled but not yet completed clears per cell
  TickCalendar<PendingClear> pending_;
  std::size_t cells_cleared_ = 0;
  std::size_t collisions_ = 0;
};

struct KineticMatvecResult {
  BinaryVector c;
  CostLedger ledger;
  std::size_t collisions = 0;
  std::size_t cells_cleared = 0;             // cells actually flipped 1 -> 0
  std::size_t clears_scheduled = 0;          // clears sent, including to cells already 0
  double max_collision_clear_energy = 0.0;   // largest clearing spend of a single collision
  double delivered_energy = 0.0;             // energy arriving at target cells
  double agent_phase_energy = 0.0;           // ledger energy (reset excluded)
};

// Agents run down the columns k with b_k = 1; agent k is launched at time k
// and is at row i at time i + k. Clears completing at a tick are applied
// before any agent reads a cell at that tick.
inline KineticMatvecResult kinetic_matvec(KineticGrid& grid, const BinaryVector& b, const EnergyModel& model) {
  const std::size_t n = grid.n();
  if (b.size() != n) throw dimension_error("kinetic_matvec: vector length must equal n");
  if (!grid.is_reset()) throw state_error("kinetic_matvec: grid must be reset before each matvec");

  std::vector<std::size_t> agents;
  for (std::size_t k = 0; k < n; ++k)
    if (b[k]) agents.push_back(k);

  // Spend of one collision at column k, identical for every row.
  std::vector<double> collision_spend(n, 0.0);
  std::vector<double> delivered(n, 0.0);
  for (std::size_t d = 1; d < n; ++d) delivered[d] = clear_energy(model, static_cast<std::int64_t>(d));
  for (std::size_t k = 0; k < n; ++k) {
    if (model.kind == EnergyModelKind::Kinetic) {
      double s = 0.0;
      for (std::size_t d = 1; d + k < n; ++d) s += delivered[d];
      collision_spend[k] = s;
    } else {
      collision_spend[k] = k + 1 < n ? static_cast<double>(model.channel_count) : 0.0;
    }
  }

  KineticMatvecResult out;
  out.c = BinaryVector(n);
  double clear_spend = 0.0;
  std::int64_t last_event = -1;

  const std::int64_t last_arrival = agents.empty() ? -1 : static_cast<std::int64_t>(agents.back() + n - 1);
  for (std::int64_t t = 0; t <= std::max(last_arrival, grid.pending_.last_tick()); ++t) {
    for (const PendingClear& pc : grid.pending_.take(t)) {
      const std::size_t cell = grid.index(pc.row, pc.col);
      if (grid.state_(pc.row, pc.col)) {
        grid.state_.set(pc.row, pc.col, 0);
        ++grid.cells_cleared_;
        ++out.cells_cleared;
      }
      --grid.outstanding_[cell];
      out.delivered_energy += pc.delivered_energy;
      last_event = t;
    }

    for (std::size_t k : agents) {
      if (static_cast<std::int64_t>(k) > t) break;
      const auto i = static_cast<std::size_t>(t - static_cast<std::int64_t>(k));
      if (i >= n) continue;
      last_event = t;
      const std::size_t cell = grid.index(i, k);
      if (grid.outstanding_[cell] != 0) {
        throw simulation_fault("deadline violated: agent " + std::to_string(k) + " reached row " + std::to_string(i) +
                               " at t=" + std::to_string(t) + " before a pending clear completed");
      }
      if (!grid.state_(i, k)) continue;

      out.c.set(i, 1);
      ++out.collisions;
      ++grid.collisions_;
      grid.stored_energy_[cell] = 0.0;
      for (std::size_t d = 1; k + d < n; ++d) {
        const std::size_t target = grid.index(i, k + d);
        grid.pending_.schedule(t + static_cast<std::int64_t>(d), {i, k + d, t + static_cast<std::int64_t>(d), delivered[d]});
        ++grid.outstanding_[target];
        ++out.clears_scheduled;
      }
      clear_spend += collision_spend[k];
      out.max_collision_clear_energy = std::max(out.max_collision_clear_energy, collision_spend[k]);
    }
  }

  const auto agent_count = static_cast<double>(agents.size());
  const auto hits = static_cast<double>(out.collisions);
  out.ledger.add("agent launch", 0.0, agent_count);
  out.ledger.add("agent traversal", static_cast<double>(last_event + 1), 0.0);
  out.ledger.add("answer register", 0.0, hits);
  out.ledger.add("row clear", 0.0, clear_spend);
  out.ledger.add("velocity adjust", 0.0, hits);
  out.agent_phase_energy = out.ledger.total_energy();
  return out;
}

// Restores every cell to A in parallel over time n. Energy: 1/n^2 per cleared
// cell plus log2 n to refresh the stored budget at each collision site.
inline CostLedger reset_grid(KineticGrid& grid) {
  const std::size_t n = grid.n();
  const double nn = static_cast<double>(n);
  const double energy = static_cast<double>(grid.cells_cleared_) / (nn * nn) +
                        static_cast<double>(grid.collisions_) * std::log2(nn);
  grid.state_ = grid.original_;
  std::fill(grid.stored_energy_.begin(), grid.stored_energy_.end(), KineticGrid::cell_budget(n));
  std::fill(grid.outstanding_.begin(), grid.outstanding_.end(), 0u);
  grid.pending_.clear();
  grid.cells_cleared_ = 0;
  grid.collisions_ = 0;
  CostLedger ledger;
  ledger.add("reset", nn, energy);
  return ledger;
}

struct KineticMatmulResult {
  BinaryMatrix c;
  CostLedger ledger;
  std::size_t collisions = 0;
  std::size_t cells_cleared = 0;
  double max_collision_clear_energy = 0.0;
  double max_agent_phase_energy = 0.0;  // per matvec, reset excluded
};

inline KineticMatmulResult kinetic_matmul(const BinaryMatrix& a, const BinaryMatrix& b, const EnergyModel& model) {
  detail::require_square_pair(a, b, "kinetic_matmul");
  const std::size_t n = a.rows();
  KineticGrid grid(a);
  KineticMatmulResult out{BinaryMatrix(n), {}, 0, 0, 0.0, 0.0};
  const double cells = static_cast<double>(n * n);
  out.ledger.add("grid build", cells, cells);
  for (std::size_t j = 0; j < n; ++j) {
    auto mv = kinetic_matvec(grid, b.column(j), model);
    out.c.set_column(j, mv.c);
    out.ledger.merge(mv.ledger);
    out.ledger.merge(reset_grid(grid));
    out.collisions += mv.collisions;
    out.cells_cleared += mv.cells_cleared;
    out.max_collision_clear_energy = std::max(out.max_collision_clear_energy, mv.max_collision_clear_energy);
    out.max_agent_phase_energy = std::max(out.max_agent_phase_energy, mv.agent_phase_energy);
  }
  return out;
}

// Agent-phase energy bound per matvec under the Kinetic model: each of at
// most n agents pays 1 to launch, and each of at most n collisions pays 1 for
// the answer register, 1 for the velocity adjustment and < pi^2/6 to clear.
inline double kinetic_agent_energy_bound(std::size_t n) {
  return static_cast<double>(n) * (3.0 + std::numbers::pi * std::numbers::pi / 6.0);
}

}  // namespace physim
