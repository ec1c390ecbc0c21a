#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "physim/error.hpp"

namespace physim {

// All quantities are dimensionless model units. Logarithms are base 2 and
// every hidden constant in the cost formulas is 1.

struct CostDelta {
  double time = 0.0;
  double energy = 0.0;

  CostDelta& operator+=(const CostDelta& o) {
    time += o.time;
    energy += o.energy;
    return *this;
  }
  friend CostDelta operator+(CostDelta a, const CostDelta& b) { return a += b; }
  friend CostDelta operator*(double k, const CostDelta& d) { return {k * d.time, k * d.energy}; }
  friend bool operator==(const CostDelta&, const CostDelta&) = default;
};

namespace detail {

inline void require_precision(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw invalid_parameter("precision eps must be positive and finite");
  }
}

inline double precision_bits(double eps) { return std::max(0.0, -std::log2(eps)); }

}  // namespace detail

// Cost of measuring a quantity of size b to within +-eps:
// log2(max(1, b)) + log2(1/eps), the second term clamped at zero for eps >= 1.
inline CostDelta measure_cost(double b, double eps) {
  detail::require_precision(eps);
  if (!(b >= 0.0) || !std::isfinite(b)) throw invalid_parameter("measured size b must be >= 0");
  const double c = std::log2(std::max(1.0, b)) + detail::precision_bits(eps);
  return {c, c};
}

// Cost of fabricating a component of size b to within +-eps: b + log2(1/eps).
inline CostDelta fabricate_cost(double b, double eps) {
  detail::require_precision(eps);
  if (!(b >= 0.0) || !std::isfinite(b)) throw invalid_parameter("fabricated size b must be >= 0");
  const double c = b + detail::precision_bits(eps);
  return {c, c};
}

struct LedgerEntry {
  std::string label;
  double time = 0.0;
  double energy = 0.0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// Itemized (label, time, energy) accumulator. Totals are maintained
// incrementally and always equal the sum of the entries.
class CostLedger {
 public:
  CostLedger() = default;

  CostLedger& add(std::string label, double time, double energy) {
    if (!(time >= 0.0) || !(energy >= 0.0) || !std::isfinite(time) || !std::isfinite(energy)) {
      throw invalid_parameter("ledger entry '" + label + "' must have finite nonnegative time and energy");
    }
    entries_.push_back({std::move(label), time, energy});
    total_time_ += time;
    total_energy_ += energy;
    return *this;
  }

  CostLedger& add(std::string label, CostDelta d) { return add(std::move(label), d.time, d.energy); }

  // Appends all of other's entries; totals add componentwise.
  CostLedger& merge(const CostLedger& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    total_time_ += other.total_time_;
    total_energy_ += other.total_energy_;
    return *this;
  }

  friend CostLedger merged(CostLedger a, const CostLedger& b) { return std::move(a.merge(b)); }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  double total_time() const { return total_time_; }
  double total_energy() const { return total_energy_; }
  CostDelta totals() const { return {total_time_, total_energy_}; }

  // Entries with equal labels folded together, in order of first appearance.
  std::vector<LedgerEntry> by_label() const {
    std::vector<LedgerEntry> out;
    for (const auto& e : entries_) {
      auto it = std::find_if(out.begin(), out.end(), [&](const LedgerEntry& o) { return o.label == e.label; });
      if (it == out.end()) {
        out.push_back(e);
      } else {
        it->time += e.time;
        it->energy += e.energy;
      }
    }
    return out;
  }

 private:
  std::vector<LedgerEntry> entries_;
  double total_time_ = 0.0;
  double total_energy_ = 0.0;
};

}  // namespace physim
