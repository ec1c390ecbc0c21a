#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physim/cost.hpp"
#include "physim/error.hpp"

namespace physim {

// ---------------------------------------------------------------------------
// Rate/energy process model.
//
// A process running at rate r >= 1 spends time r and energy 1/r^alpha per
// operation, plus one unit of energy to start. No two processes may touch the
// same memory location during overlapping time.
// ---------------------------------------------------------------------------

inline void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 2.0)) throw invalid_parameter("alpha must lie in [0, 2]");
}

struct AlphaParams {
  double alpha = 1.0;

  explicit AlphaParams(double a) : alpha(a) { require_alpha(a); }
};

inline CostDelta process_cost(std::uint64_t op_count, double rate, double alpha) {
  require_alpha(alpha);
  if (!(rate >= 1.0) || !std::isfinite(rate)) throw invalid_parameter("process rate must be >= 1");
  const double ops = static_cast<double>(op_count);
  return {ops * rate, 1.0 + ops / std::pow(rate, alpha)};
}

enum class AccessMode : std::uint8_t { Read, Write };

// One memory operation; it occupies [start, start + rate of its process).
struct Access {
  double start = 0.0;
  std::uint32_t location = 0;
  AccessMode mode = AccessMode::Read;
};

struct Process {
  std::uint32_t id = 0;
  double rate = 1.0;
  std::uint64_t op_count = 0;
  std::vector<Access> trace;  // ordered, non-overlapping

  double end_of(const Access& a) const { return a.start + rate; }
};

struct ProcessSchedule {
  std::vector<Process> processes;

  // Latest end time over all recorded accesses.
  double makespan() const {
    double m = 0.0;
    for (const auto& p : processes)
      if (!p.trace.empty()) m = std::max(m, p.end_of(p.trace.back()));
    return m;
  }

  std::size_t access_count() const {
    std::size_t c = 0;
    for (const auto& p : processes) c += p.trace.size();
    return c;
  }
};

struct CostReport {
  double time = 0.0;
  double energy = 0.0;
  std::uint64_t process_count = 0;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

// Aggregate cost of a schedule: time is the slowest process, energy the sum of
// per-process costs. Operations are pooled per distinct rate before dividing,
// so that a uniform-rate schedule evaluates to P + ops / r^alpha in exactly the
// arithmetic the closed forms below use.
inline CostReport schedule_cost(const ProcessSchedule& schedule, double alpha) {
  require_alpha(alpha);
  CostReport r;
  std::map<double, std::uint64_t> ops_by_rate;
  for (const auto& p : schedule.processes) {
    r.time = std::max(r.time, process_cost(p.op_count, p.rate, alpha).time);
    ops_by_rate[p.rate] += p.op_count;
  }
  r.process_count = schedule.processes.size();
  r.energy = static_cast<double>(r.process_count);
  for (const auto& [rate, ops] : ops_by_rate) r.energy += static_cast<double>(ops) / std::pow(rate, alpha);
  return r;
}

// ---------------------------------------------------------------------------
// Collision check.
// ---------------------------------------------------------------------------

struct Conflict {
  std::uint32_t process_a = 0;
  std::uint32_t process_b = 0;
  std::uint32_t location = 0;
  double overlap_begin = 0.0;
  double overlap_end = 0.0;
};

struct CollisionReport {
  std::optional<Conflict> conflict;
  std::size_t accesses_checked = 0;

  bool ok() const { return !conflict.has_value(); }
};

// Sort all accesses by (location, start) and sweep each location, tracking
// the latest end seen so far for the current owner and for any other owner.
// Intervals are half-open, so back-to-back use of a location is allowed.
inline CollisionReport check_collisions(const ProcessSchedule& schedule) {
  struct Span {
    std::uint32_t location;
    std::uint32_t owner;
    double start;
    double end;
  };
  std::vector<Span> spans;
  spans.reserve(schedule.access_count());
  for (std::size_t idx = 0; idx < schedule.processes.size(); ++idx) {
    const auto& p = schedule.processes[idx];
    for (const auto& a : p.trace) spans.push_back({a.location, static_cast<std::uint32_t>(idx), a.start, p.end_of(a)});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) {
    if (x.location != y.location) return x.location < y.location;
    if (x.start != y.start) return x.start < y.start;
    if (x.end != y.end) return x.end < y.end;
    return x.owner < y.owner;
  });

  CollisionReport report;
  report.accesses_checked = spans.size();
  constexpr double kNone = -1.0;
  std::size_t i = 0;
  while (i < spans.size()) {
    const std::uint32_t loc = spans[i].location;
    // Latest-ending span so far, and latest-ending span of any other owner.
    std::uint32_t best_owner = 0;
    double best_end = kNone;
    double other_end = kNone;
    std::uint32_t other_owner = 0;
    for (; i < spans.size() && spans[i].location == loc; ++i) {
      const Span& s = spans[i];
      const bool same = best_end != kNone && s.owner == best_owner;
      const double rival_end = same ? other_end : best_end;
      const std::uint32_t rival = same ? other_owner : best_owner;
      if (rival_end != kNone && s.start < rival_end) {
        const auto& procs = schedule.processes;
        report.conflict = Conflict{procs[rival].id, procs[s.owner].id, loc, s.start, std::min(s.end, rival_end)};
        return report;
      }
      if (best_end == kNone || s.owner == best_owner) {
        best_owner = s.owner;
        best_end = std::max(best_end, s.end);
      } else if (s.end > best_end) {
        other_owner = best_owner;
        other_end = best_end;
        best_owner = s.owner;
        best_end = s.end;
      } else if (s.end > other_end) {
        other_owner = s.owner;
        other_end = s.end;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Example schedules.
// ---------------------------------------------------------------------------

// ceil(n^e), treating values within 1e-9 (relative) of an integer as that
// integer so that exact powers such as 4096^(1/3) are not bumped up by
// rounding noise. At least 1.
inline std::uint64_t ceil_power(std::uint64_t n, double e) {
  const double x = std::pow(static_cast<double>(n), e);
  const double nearest = std::round(x);
  const double c = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(c));
}

inline constexpr std::uint64_t kCopyOpsPerItem = 2;     // read + write
inline constexpr std::uint64_t kMatmulOpsPerBlock = 3;  // two reads + accumulate

namespace detail {

inline void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw invalid_parameter(std::string(name) + " must lie in [0, 1]");
}

inline void require_locations(std::uint64_t count) {
  if (count > 0xffffffffULL) throw invalid_parameter("schedule needs more than 2^32 memory locations");
}

}  // namespace detail

// Copy-list layout: m = ceil(n^(1-q)) items per process, P = ceil(n/m)
// processes (at most ceil(n^q)), all at rate n^s.
struct CopyListShape {
  std::uint64_t items_per_process = 0;
  std::uint64_t processes = 0;
  double rate = 1.0;
};

inline CopyListShape copy_list_shape(std::uint64_t n, double q, double s) {
  if (n < 1) throw invalid_parameter("copy list: n must be >= 1");
  detail::require_unit(q, "q");
  detail::require_unit(s, "s");
  CopyListShape shape;
  shape.items_per_process = ceil_power(n, 1.0 - q);
  shape.processes = (n + shape.items_per_process - 1) / shape.items_per_process;
  shape.rate = std::pow(static_cast<double>(n), s);
  return shape;
}

enum class CopyLayout {
  Disjoint,     // process p copies items [p m, (p+1) m)
  SharedBlock,  // every process copies the first block; a negative control
};

// Source items live at locations [0, n), destinations at [n, 2n). Item t of a
// process is read in slot 2t and written in slot 2t+1.
inline ProcessSchedule copy_list_schedule(std::uint64_t n, double q, double s,
                                          CopyLayout layout = CopyLayout::Disjoint) {
  const CopyListShape shape = copy_list_shape(n, q, s);
  detail::require_locations(2 * n);
  ProcessSchedule sched;
  sched.processes.reserve(shape.processes);
  for (std::uint64_t p = 0; p < shape.processes; ++p) {
    const std::uint64_t first = p * shape.items_per_process;
    const std::uint64_t count = std::min(n, first + shape.items_per_process) - first;
    const std::uint64_t base = layout == CopyLayout::Disjoint ? first : 0;
    Process proc;
    proc.id = static_cast<std::uint32_t>(p);
    proc.rate = shape.rate;
    proc.op_count = kCopyOpsPerItem * count;
    proc.trace.reserve(2 * count);
    for (std::uint64_t t = 0; t < count; ++t) {
      const auto item = static_cast<std::uint32_t>(base + t);
      proc.trace.push_back({static_cast<double>(2 * t) * shape.rate, item, AccessMode::Read});
      proc.trace.push_back({static_cast<double>(2 * t + 1) * shape.rate, static_cast<std::uint32_t>(n + item),
                            AccessMode::Write});
    }
    sched.processes.push_back(std::move(proc));
  }
  return sched;
}

// time = 2 m n^s, energy = P + 2 n / (n^s)^alpha.
inline CostReport copy_list_cost(std::uint64_t n, double q, double s, double alpha) {
  require_alpha(alpha);
  const CopyListShape shape = copy_list_shape(n, q, s);
  CostReport r;
  r.process_count = shape.processes;
  r.time = static_cast<double>(kCopyOpsPerItem * shape.items_per_process) * shape.rate;
  r.energy = static_cast<double>(shape.processes) +
             static_cast<double>(kCopyOpsPerItem * n) / std::pow(shape.rate, alpha);
  return r;
}

enum class Rotation {
  On,   // block t reads column (i + j + t) mod n
  Off,  // block t reads column t for everyone; a negative control
};

namespace detail {

// Appends the accesses for computing entry (i, j) during blocks
// [first_block, first_block + n) at the given rate. Each block is three
// slots: read A, read B, accumulate; the final accumulate writes C(i, j).
// A occupies locations [0, n^2), B [n^2, 2n^2), C [2n^2, 3n^2).
inline void append_entry_accesses(Process& proc, std::uint64_t n, std::uint64_t i, std::uint64_t j,
                                  std::uint64_t first_block, Rotation rotation) {
  const std::uint64_t nn = n * n;
  for (std::uint64_t t = 0; t < n; ++t) {
    const std::uint64_t k = rotation == Rotation::On ? (i + j + t) % n : t;
    const std::uint64_t slot = kMatmulOpsPerBlock * (first_block + t);
    proc.trace.push_back({static_cast<double>(slot) * proc.rate, static_cast<std::uint32_t>(i * n + k), AccessMode::Read});
    proc.trace.push_back(
        {static_cast<double>(slot + 1) * proc.rate, static_cast<std::uint32_t>(nn + k * n + j), AccessMode::Read});
    if (t + 1 == n) {
      proc.trace.push_back(
          {static_cast<double>(slot + 2) * proc.rate, static_cast<std::uint32_t>(2 * nn + i * n + j), AccessMode::Write});
    }
  }
}

}  // namespace detail

// n^2 processes P_{i,j} at rate n, one output entry each.
inline ProcessSchedule matmul_schedule(std::uint64_t n, Rotation rotation = Rotation::On) {
  if (n < 1) throw invalid_parameter("matmul schedule: n must be >= 1");
  detail::require_locations(3 * n * n);
  ProcessSchedule sched;
  sched.processes.reserve(n * n);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j) {
      Process proc;
      proc.id = static_cast<std::uint32_t>(i * n + j);
      proc.rate = static_cast<double>(n);
      proc.op_count = kMatmulOpsPerBlock * n;
      proc.trace.reserve(2 * n + 1);
      detail::append_entry_accesses(proc, n, i, j, 0, rotation);
      sched.processes.push_back(std::move(proc));
    }
  return sched;
}

// time = 3n * n, energy = n^2 + 3n^3 / n^alpha.
inline CostReport matmul_cost(std::uint64_t n, double alpha) {
  require_alpha(alpha);
  if (n < 1) throw invalid_parameter("matmul cost: n must be >= 1");
  const double rate = static_cast<double>(n);
  CostReport r;
  r.process_count = n * n;
  r.time = static_cast<double>(kMatmulOpsPerBlock * n) * rate;
  r.energy = static_cast<double>(n * n) + static_cast<double>(kMatmulOpsPerBlock * n * n * n) / std::pow(rate, alpha);
  return r;
}

// Fifth root of n; n must be a perfect fifth power.
inline std::uint64_t fifth_root(std::uint64_t n) {
  if (n < 1) throw invalid_parameter("subquadratic schedule: n must be >= 1");
  const auto m = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(n), 0.2)));
  if (m * m * m * m * m != n) {
    throw invalid_parameter("subquadratic schedule: n = " + std::to_string(n) + " is not a perfect fifth power");
  }
  return m;
}

// For n = m^5: n^2/m = m^9 processes at rate m^3, process (i, g) computing the
// m entries C(i, g m + u), u < m, one after another. Entry u uses blocks
// [u n, (u+1) n) and the same (i + j + t) mod n rotation as the full schedule;
// processes sharing row i read A(i, .) at offsets that differ by a nonzero
// multiple of m below n, and processes sharing column j differ in i.
inline ProcessSchedule subquadratic_matmul_schedule(std::uint64_t n, Rotation rotation = Rotation::On) {
  const std::uint64_t m = fifth_root(n);
  detail::require_locations(3 * n * n);
  const std::uint64_t groups = n / m;
  const double rate = static_cast<double>(m * m * m);
  ProcessSchedule sched;
  sched.processes.reserve(n * groups);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t g = 0; g < groups; ++g) {
      Process proc;
      proc.id = static_cast<std::uint32_t>(i * groups + g);
      proc.rate = rate;
      proc.op_count = kMatmulOpsPerBlock * n * m;
      proc.trace.reserve(m * (2 * n + 1));
      for (std::uint64_t u = 0; u < m; ++u) detail::append_entry_accesses(proc, n, i, g * m + u, u * n, rotation);
      sched.processes.push_back(std::move(proc));
    }
  return sched;
}

// time = 3 n m * m^3, energy = P + 3 n m P / (m^3)^alpha with P = n^2 / m.
inline CostReport subquadratic_matmul_cost(std::uint64_t n, double alpha) {
  require_alpha(alpha);
  const std::uint64_t m = fifth_root(n);
  const std::uint64_t procs = n * (n / m);
  const double rate = static_cast<double>(m * m * m);
  const std::uint64_t ops = kMatmulOpsPerBlock * n * m;
  CostReport r;
  r.process_count = procs;
  r.time = static_cast<double>(ops) * rate;
  r.energy = static_cast<double>(procs) + static_cast<double>(ops * procs) / std::pow(rate, alpha);
  return r;
}

}  // namespace physim
