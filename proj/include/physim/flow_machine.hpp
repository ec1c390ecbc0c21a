#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "physim/cost.hpp"
#include "physim/error.hpp"
#include "physim/matrix.hpp"
#include "physim/random.hpp"

namespace physim {

// ---------------------------------------------------------------------------
// Integer matrix multiplication by material flow.
//
// For a binary n x n matrix A the machine holds one binary splitter tree per
// column j. Leaf i of tree j drains into answer channel i when A(i,j) = 1 and
// into a garbage channel otherwise. Pouring one unit into tree j for every
// b_j = 1 leaves (A b)_i / N units in channel i, where N = 2^ceil(log2 n) is
// the padded leaf count; leaves i >= n always drain to garbage.
// ---------------------------------------------------------------------------

struct SplitterNode {
  double split_fraction = 0.5;  // share of the incoming flow sent to the left child
};

// Complete binary tree in heap order: node k has children 2k+1 (left) and
// 2k+2 (right). Leaves are numbered left to right.
class SplitterTree {
 public:
  SplitterTree(int depth, std::vector<SplitterNode> nodes) : depth_(depth), nodes_(std::move(nodes)) {
    if (depth < 0 || depth > 30) throw invalid_parameter("splitter tree depth out of range");
    if (nodes_.size() != leaf_count() - 1) throw dimension_error("splitter tree needs 2^depth - 1 nodes");
    for (const auto& s : nodes_)
      if (!(s.split_fraction > 0.0 && s.split_fraction < 1.0))
        throw invalid_parameter("split fractions must lie in (0, 1)");
  }

  static SplitterTree balanced(int depth) {
    return SplitterTree(depth, std::vector<SplitterNode>((std::size_t{1} << depth) - 1));
  }

  int depth() const { return depth_; }
  std::size_t leaf_count() const { return std::size_t{1} << depth_; }
  const std::vector<SplitterNode>& nodes() const { return nodes_; }

 private:
  int depth_;
  std::vector<SplitterNode> nodes_;
};

// Fraction of one input unit reaching each leaf: the product of branch
// fractions along the root-to-leaf path.
inline std::vector<double> leaf_fractions(const SplitterTree& tree) {
  const std::size_t leaves = tree.leaf_count();
  std::vector<double> flow(2 * leaves - 1, 0.0);
  flow[0] = 1.0;
  const auto& nodes = tree.nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double s = nodes[k].split_fraction;
    flow[2 * k + 1] = flow[k] * s;
    flow[2 * k + 2] = flow[k] * (1.0 - s);
  }
  return {flow.begin() + static_cast<std::ptrdiff_t>(leaves - 1), flow.end()};
}

enum class SplitterMode {
  Random,     // each split drawn uniformly from [1/2 - delta, 1/2 + delta]
  WorstCase,  // every split at exactly 1/2 + delta
};

class FlowMachine {
 public:
  static constexpr int kGarbage = -1;

  std::size_t n() const { return a_.rows(); }
  std::size_t padded() const { return std::size_t{1} << depth_; }
  int depth() const { return depth_; }
  double delta() const { return delta_; }
  SplitterMode mode() const { return mode_; }
  const BinaryMatrix& matrix() const { return a_; }
  const std::vector<SplitterTree>& trees() const { return trees_; }
  const std::vector<double>& fractions(std::size_t tree) const { return fractions_.at(tree); }
  const CostLedger& construction_ledger() const { return construction_; }

  // Destination channel of leaf `leaf` of tree `tree`, or kGarbage.
  int route(std::size_t tree, std::size_t leaf) const {
    if (leaf >= n()) return kGarbage;
    return a_(leaf, tree) ? static_cast<int>(leaf) : kGarbage;
  }

 private:
  FlowMachine(BinaryMatrix a, int depth, double delta, SplitterMode mode)
      : a_(std::move(a)), depth_(depth), delta_(delta), mode_(mode) {}

  friend FlowMachine build_flow_machine(const BinaryMatrix&, double, std::uint64_t, SplitterMode);

  BinaryMatrix a_;
  int depth_;
  double delta_;
  SplitterMode mode_;
  std::vector<SplitterTree> trees_;
  std::vector<std::vector<double>> fractions_;
  CostLedger construction_;
};

// Construction cost with every constant set to 1, L = log2 N:
//   splitter calibration   n (N-1) splitters, L each
//   tubing fabrication     N L per tree, n trees
//   tubing connections     n (N-1), L each
//   channel fabrication    2n channels of length n
inline CostLedger flow_construction_ledger(std::size_t n) {
  const double nn = static_cast<double>(n);
  const double leaves = static_cast<double>(std::size_t{1} << ceil_log2(n));
  const double height = static_cast<double>(ceil_log2(n));
  CostLedger ledger;
  const double calibration = nn * (leaves - 1.0) * height;
  const double tubing = nn * leaves * height;
  const double connections = nn * (leaves - 1.0) * height;
  const double channels = 2.0 * nn * nn;
  ledger.add("splitter calibration", calibration, calibration);
  ledger.add("tubing fabrication", tubing, tubing);
  ledger.add("tubing connections", connections, connections);
  ledger.add("channel fabrication", channels, channels);
  return ledger;
}

inline FlowMachine build_flow_machine(const BinaryMatrix& a, double delta, std::uint64_t seed,
                                      SplitterMode mode = SplitterMode::Random) {
  if (!a.square()) throw dimension_error("build_flow_machine: A must be square");
  if (!(delta >= 0.0 && delta < 0.5)) throw invalid_parameter("build_flow_machine: delta must lie in [0, 1/2)");

  const std::size_t n = a.rows();
  const int depth = ceil_log2(n);
  FlowMachine m(a, depth, delta, mode);
  Rng rng(seed);
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  m.trees_.reserve(n);
  m.fractions_.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<SplitterNode> nodes(internal);
    for (auto& node : nodes) {
      node.split_fraction = mode == SplitterMode::WorstCase ? 0.5 + delta : rng.uniform(0.5 - delta, 0.5 + delta);
    }
    m.trees_.emplace_back(depth, std::move(nodes));
    m.fractions_.push_back(leaf_fractions(m.trees_.back()));
  }
  m.construction_ = flow_construction_ledger(n);
  return m;
}

// Splitter tolerance and measurement precision under which nearest-multiple
// rounding is guaranteed exact.
//
// With L = log2 N levels and every split within delta of 1/2, a leaf receives
// (1/N) prod (1 + 2 e_k), |e_k| <= delta, so its error is at most
// (1/N)((1 + 2 delta)^L - 1) <= (1/N)(e^{2 delta L} - 1). For delta = 1/(8NL)
// and N >= 2 this is < 1.07/(4N^2), and summed over at most n <= N trees the
// channel error is < 0.27/N. Input noise eps on each of <= n units contributes
// at most eps * n * (1.14/N) <= 1.14 eps and output noise adds eps; with
// eps = 1/(8N^2) both together stay below 0.27/N^2 <= 0.14/N. The total is
// below 1/(2N), half the spacing between representable values, so rounding
// N * measured is exact. L is clamped to 1 when N = 1 (no splitters; only the
// 2 eps = 1/4 measurement noise remains).
struct SafeThresholds {
  double delta = 0.0;
  double eps = 0.0;
};

inline SafeThresholds correctness_threshold(std::size_t n) {
  if (n == 0) throw invalid_parameter("correctness_threshold: n must be >= 1");
  const double leaves = static_cast<double>(std::size_t{1} << ceil_log2(n));
  const double height = std::log2(std::max(2.0, leaves));
  return {1.0 / (8.0 * leaves * height), 1.0 / (8.0 * leaves * leaves)};
}

struct FlowMatvecResult {
  std::vector<std::int64_t> c;
  CostLedger ledger;
  std::vector<double> raw_measurements;  // measured channel totals before rounding
  double input_total = 0.0;              // material actually poured in
  double garbage_total = 0.0;            // material that reached garbage channels
};

// Precision charged in the ledger. A noise amplitude of zero models an ideal
// instrument; the ledger still pays for the precision the rounding step needs.
inline double charged_precision(std::size_t n, double eps_meas) {
  return eps_meas > 0.0 ? eps_meas : correctness_threshold(n).eps;
}

inline FlowMatvecResult flow_matvec(const FlowMachine& machine, const BinaryVector& b, double eps_meas,
                                    std::uint64_t seed) {
  const std::size_t n = machine.n();
  if (b.size() != n) throw dimension_error("flow_matvec: vector length must equal n");
  if (!(eps_meas >= 0.0) || !std::isfinite(eps_meas)) throw invalid_parameter("flow_matvec: eps_meas must be >= 0");

  const std::size_t leaves = machine.padded();
  Rng rng(seed);
  FlowMatvecResult out;
  std::vector<double> channel(n, 0.0);

  for (std::size_t j = 0; j < n; ++j) {
    if (!b[j]) continue;
    const double poured = 1.0 + rng.uniform(-eps_meas, eps_meas);
    out.input_total += poured;
    const auto& frac = machine.fractions(j);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
      const double amount = poured * frac[leaf];
      const int dest = machine.route(j, leaf);
      if (dest == FlowMachine::kGarbage) {
        out.garbage_total += amount;
      } else {
        channel[static_cast<std::size_t>(dest)] += amount;
      }
    }
  }

  out.c.resize(n);
  out.raw_measurements.resize(n);
  const double scale = static_cast<double>(leaves);
  for (std::size_t i = 0; i < n; ++i) {
    const double measured = channel[i] + rng.uniform(-eps_meas, eps_meas);
    out.raw_measurements[i] = measured;
    out.c[i] = std::llround(scale * measured);
  }

  const double units = static_cast<double>(b.popcount());
  const double height = static_cast<double>(machine.depth());
  const CostDelta one = measure_cost(1.0, charged_precision(n, eps_meas));
  out.ledger.add("lift material", units * height, units * height);
  out.ledger.add("input measurement", units * one);
  out.ledger.add("channel flow", static_cast<double>(n), 0.0);
  out.ledger.add("output measurement", static_cast<double>(n) * one);
  return out;
}

struct FlowMatmulResult {
  IntMatrix c;
  CostLedger ledger;  // construction followed by one block per matvec
};

namespace detail {

// Runs one matvec per column of B against an already built machine. Column j
// uses the stream derive_seed(seed, j + 1).
inline void flow_columns(const FlowMachine& machine, const BinaryMatrix& b, double eps_meas, std::uint64_t seed,
                         std::vector<std::int64_t>& out, CostLedger& ledger) {
  const std::size_t n = machine.n();
  out.assign(n * n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    auto mv = flow_matvec(machine, b.column(j), eps_meas, derive_seed(seed, j + 1));
    for (std::size_t i = 0; i < n; ++i) out[i * n + j] = mv.c[i];
    ledger.merge(mv.ledger);
  }
}

inline IntMatrix to_int_matrix(std::size_t n, const std::vector<std::int64_t>& v) {
  std::uint64_t max_abs = 0;
  for (auto x : v) max_abs = std::max<std::uint64_t>(max_abs, static_cast<std::uint64_t>(std::llabs(x)));
  IntMatrix m(n, n, bits_for(max_abs));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.set(i, j, v[i * n + j]);
  return m;
}

}  // namespace detail

// C = A B: one machine for A, then n matvecs. The machine is seeded with
// derive_seed(seed, 0).
inline FlowMatmulResult flow_matmul(const BinaryMatrix& a, const BinaryMatrix& b, double delta, double eps_meas,
                                    std::uint64_t seed, SplitterMode mode = SplitterMode::Random) {
  if (!a.square() || !b.square() || a.rows() != b.rows())
    throw dimension_error("flow_matmul: A and B must be square of equal size");
  const FlowMachine machine = build_flow_machine(a, delta, derive_seed(seed, 0), mode);
  CostLedger ledger = machine.construction_ledger();
  std::vector<std::int64_t> c;
  detail::flow_columns(machine, b, eps_meas, seed, c, ledger);
  return {detail::to_int_matrix(a.rows(), c), std::move(ledger)};
}

// Binary plane p of a nonnegative integer matrix.
inline BinaryMatrix bit_plane(const IntMatrix& m, int p) {
  BinaryMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.set(i, j, static_cast<int>((m(i, j) >> p) & 1));
  return out;
}

// r-bit nonnegative matrices via r^2 binary flow products:
// A = sum_p 2^p A_p, B = sum_q 2^q B_q, C = sum_{p,q} 2^{p+q} A_p B_q.
// One machine is built per plane A_p and reused for every B_q. Plane pair
// (0, 0) uses the same streams as flow_matmul, so r = 1 reproduces it exactly.
inline FlowMatmulResult int_matmul_bitdecomp(const IntMatrix& a, const IntMatrix& b, double delta, double eps_meas,
                                             std::uint64_t seed, SplitterMode mode = SplitterMode::Random) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw dimension_error("int_matmul_bitdecomp: A and B must be square of equal size");
  const std::size_t n = a.rows();
  for (const IntMatrix* m : {&a, &b})
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if ((*m)(i, j) < 0) throw unsupported_input("int_matmul_bitdecomp: negative entries are not supported");

  const int r = std::max(a.bit_width(), b.bit_width());
  auto stream = [&](int p, int q) {
    return p == 0 && q == 0 ? seed : derive_seed(seed, (std::uint64_t{1} << 40) | (std::uint64_t(p) << 20) | q);
  };

  std::vector<BinaryMatrix> b_planes;
  for (int q = 0; q < r; ++q) b_planes.push_back(bit_plane(b, q));

  CostLedger ledger;
  std::vector<std::int64_t> acc(n * n, 0);
  std::vector<std::int64_t> partial;
  for (int p = 0; p < r; ++p) {
    const FlowMachine machine = build_flow_machine(bit_plane(a, p), delta, derive_seed(stream(p, 0), 0), mode);
    ledger.merge(machine.construction_ledger());
    for (int q = 0; q < r; ++q) {
      detail::flow_columns(machine, b_planes[static_cast<std::size_t>(q)], eps_meas, stream(p, q), partial, ledger);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += partial[k] << (p + q);
    }
  }
  return {detail::to_int_matrix(n, acc), std::move(ledger)};
}

}  // namespace physim
