#pragma once

// Independent reference implementations used by the tests. They avoid the
// library's own helpers so a bug there cannot hide behind itself.

#include <cstdint>
#include <vector>

#include "physim/alpha_model.hpp"
#include "physim/matrix.hpp"

namespace oracle {

using Grid = std::vector<std::vector<long long>>;

template <typename M>
Grid to_grid(const M& m) {
  Grid g(m.rows(), std::vector<long long>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = static_cast<long long>(m(i, j));
  return g;
}

inline Grid int_product(const Grid& a, const Grid& b) {
  const std::size_t n = a.size(), m = b.front().size(), inner = b.size();
  Grid c(n, std::vector<long long>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < inner; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Grid bool_product(const Grid& a, const Grid& b) {
  Grid c = int_product(a, b);
  for (auto& row : c)
    for (auto& v : row) v = v != 0;
  return c;
}

inline bool or_fold(const std::vector<std::uint8_t>& bits) {
  bool any = false;
  for (auto b : bits) any = any || b;
  return any;
}

// Quadratic scan over every pair of accesses. True when two different
// processes touch the same location during overlapping half-open intervals.
inline bool has_conflict(const physim::ProcessSchedule& s) {
  struct Flat {
    std::size_t proc;
    std::uint32_t loc;
    double begin, end;
  };
  std::vector<Flat> all;
  for (std::size_t p = 0; p < s.processes.size(); ++p)
    for (const auto& a : s.processes[p].trace) all.push_back({p, a.location, a.start, a.start + s.processes[p].rate});
  for (std::size_t x = 0; x < all.size(); ++x)
    for (std::size_t y = x + 1; y < all.size(); ++y) {
      const Flat &u = all[x], &v = all[y];
      if (u.proc != v.proc && u.loc == v.loc && u.begin < v.end && v.begin < u.end) return true;
    }
  return false;
}

}  // namespace oracle
