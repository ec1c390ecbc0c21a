#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "physim/alpha_model.hpp"
#include "physim/random.hpp"

using namespace physim;

TEST(ProcessCost, Values) {
  for (double alpha : {0.0, 1.0, 2.0}) {
    const auto c = process_cost(10, 1, alpha);
    EXPECT_EQ(c.time, 10.0);
    EXPECT_EQ(c.energy, 11.0);
  }
  EXPECT_EQ(process_cost(100, 10, 1).time, 1000.0);
  EXPECT_EQ(process_cost(100, 10, 1).energy, 11.0);
  EXPECT_EQ(process_cost(100, 10, 2).energy, 2.0);
  EXPECT_EQ(process_cost(0, 5, 1).energy, 1.0);
  EXPECT_THROW(process_cost(1, 1, 2.5), invalid_parameter);
  EXPECT_THROW(process_cost(1, 0.5, 1), invalid_parameter);
}

TEST(ProcessCost, EnergyMonotoneInRateAndAlpha) {
  for (double rate : {1.0, 2.0, 7.5, 100.0}) {
    const double e0 = process_cost(50, rate, 0).energy, e1 = process_cost(50, rate, 1).energy,
                 e2 = process_cost(50, rate, 2).energy;
    EXPECT_LE(e2, e1);
    EXPECT_LE(e1, e0);
    EXPECT_GE(process_cost(50, rate, 1).energy, process_cost(50, rate * 2, 1).energy);
  }
}

namespace {

Process single(std::uint32_t id, double rate, std::vector<Access> trace) {
  Process p;
  p.id = id;
  p.rate = rate;
  p.op_count = trace.size();
  p.trace = std::move(trace);
  return p;
}

}  // namespace

TEST(CheckCollisions, DisjointAndOverlapping) {
  ProcessSchedule ok{{single(0, 1, {{0, 1, AccessMode::Write}}), single(1, 1, {{0, 2, AccessMode::Write}})}};
  EXPECT_TRUE(check_collisions(ok).ok());

  ProcessSchedule bad{{single(0, 1, {{0, 7, AccessMode::Write}}), single(1, 1, {{0.5, 7, AccessMode::Write}})}};
  const auto r = check_collisions(bad);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.conflict->location, 7u);
  EXPECT_EQ(r.conflict->overlap_begin, 0.5);
  EXPECT_EQ(r.conflict->overlap_end, 1.0);
}

TEST(CheckCollisions, TouchingIntervalsAreFine) {
  ProcessSchedule s{{single(0, 1, {{0, 3, AccessMode::Read}}), single(1, 1, {{1, 3, AccessMode::Read}})}};
  EXPECT_TRUE(check_collisions(s).ok());
}

TEST(CheckCollisions, SameProcessNeverConflictsWithItself) {
  ProcessSchedule s{{single(0, 2, {{0, 3, AccessMode::Read}, {2, 3, AccessMode::Write}})}};
  EXPECT_TRUE(check_collisions(s).ok());
}

TEST(CheckCollisions, AgreesWithQuadraticOracle) {
  Rng rng(21);
  int conflicts = 0;
  for (int trial = 0; trial < 400; ++trial) {
    ProcessSchedule s;
    const auto procs = 2 + rng.next() % 4;
    for (std::uint32_t p = 0; p < procs; ++p) {
      const double rate = 1.0 + static_cast<double>(rng.next() % 3);
      std::vector<Access> trace;
      double t = static_cast<double>(rng.next() % 3);
      const auto len = 1 + rng.next() % 5;
      for (std::uint64_t a = 0; a < len; ++a) {
        trace.push_back({t, static_cast<std::uint32_t>(rng.next() % 12), AccessMode::Read});
        t += rate * static_cast<double>(1 + rng.next() % 3);
      }
      s.processes.push_back(single(p, rate, std::move(trace)));
    }
    const bool expected = oracle::has_conflict(s);
    conflicts += expected;
    ASSERT_EQ(!check_collisions(s).ok(), expected) << "trial " << trial;
  }
  EXPECT_GT(conflicts, 20);
  EXPECT_LT(conflicts, 380);
}

TEST(CopyList, SerialAndFullyParallel) {
  const auto serial = copy_list_schedule(16, 0, 0);
  ASSERT_EQ(serial.processes.size(), 1u);
  EXPECT_EQ(serial.processes[0].op_count, 32u);
  const auto c = copy_list_cost(16, 0, 0, 1);
  EXPECT_EQ(c.time, 32.0);
  EXPECT_EQ(c.energy, 33.0);
  EXPECT_EQ(schedule_cost(serial, 1), c);

  const auto parallel = copy_list_schedule(16, 1, 0);
  EXPECT_EQ(parallel.processes.size(), 16u);
  for (const auto& p : parallel.processes) EXPECT_EQ(p.op_count, 2u);
}

TEST(CopyList, CollisionFreeAndClosedFormExact) {
  for (std::uint64_t n : {1u, 7u, 64u, 1000u, 4096u})
    for (double q : {0.0, 0.25, 0.5, 2.0 / 3.0, 1.0})
      for (double s : {0.0, 0.2, 1.0 / 3.0, 1.0}) {
        const auto sched = copy_list_schedule(n, q, s);
        EXPECT_TRUE(check_collisions(sched).ok()) << n << " " << q << " " << s;
        for (double alpha : {0.0, 1.0, 2.0}) EXPECT_EQ(schedule_cost(sched, alpha), copy_list_cost(n, q, s, alpha));
      }
}

TEST(CopyList, SharedBlockConflicts) {
  EXPECT_FALSE(check_collisions(copy_list_schedule(64, 0.5, 0.2, CopyLayout::SharedBlock)).ok());
}

TEST(CopyList, NaiveSumIsCloseToPooledSum) {
  const auto sched = copy_list_schedule(4096, 0.6, 0.2);
  double e = 0;
  for (const auto& p : sched.processes) e += process_cost(p.op_count, p.rate, 2).energy;
  EXPECT_NEAR(e, copy_list_cost(4096, 0.6, 0.2, 2).energy, 1e-9 * e);
}

TEST(CopyList, DoublingRatioApproachesPredicted) {
  struct Case {
    double alpha, s;
  };
  for (Case c : {Case{1, 1.0 / 3.0}, Case{2, 0.2}}) {
    const double q = 1 - c.alpha * c.s, expected = std::pow(2.0, 1 - c.alpha * c.s);
    for (int e = 18; e < 24; ++e) {
      const std::uint64_t n = std::uint64_t{1} << e;
      const auto lo = copy_list_cost(n, q, c.s, c.alpha), hi = copy_list_cost(2 * n, q, c.s, c.alpha);
      EXPECT_NEAR(hi.time / lo.time, expected, 0.02 * expected) << "n=2^" << e;
      EXPECT_NEAR(hi.energy / lo.energy, expected, 0.02 * expected) << "n=2^" << e;
    }
  }
}

TEST(MatmulSchedule, SingleProcessAtNOne) {
  const auto s = matmul_schedule(1);
  ASSERT_EQ(s.processes.size(), 1u);
  EXPECT_EQ(s.processes[0].op_count, 3u);
}

TEST(MatmulSchedule, CollisionFreeUpTo64) {
  for (std::uint64_t n = 2; n <= 64; ++n) {
    const auto s = matmul_schedule(n);
    EXPECT_EQ(s.processes.size(), n * n);
    ASSERT_TRUE(check_collisions(s).ok()) << "n=" << n;
  }
}

TEST(MatmulSchedule, SmallSizesMatchQuadraticOracle) {
  for (std::uint64_t n = 2; n <= 6; ++n) {
    EXPECT_FALSE(oracle::has_conflict(matmul_schedule(n)));
    EXPECT_TRUE(oracle::has_conflict(matmul_schedule(n, Rotation::Off)));
  }
}

TEST(MatmulSchedule, RotationOffConflicts) {
  const auto r = check_collisions(matmul_schedule(2, Rotation::Off));
  ASSERT_FALSE(r.ok());
}

TEST(MatmulCost, ClosedFormAndLimits) {
  for (std::uint64_t n : {1u, 2u, 5u, 16u, 40u})
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0}) EXPECT_EQ(schedule_cost(matmul_schedule(n), alpha), matmul_cost(n, alpha));
  for (std::uint64_t n : {4u, 64u, 1024u}) {
    const double nn = static_cast<double>(n);
    EXPECT_EQ(matmul_cost(n, 1).energy / (nn * nn), 4.0);
    EXPECT_EQ(matmul_cost(n, 0).energy, nn * nn * (1 + 3 * nn));
    EXPECT_DOUBLE_EQ(matmul_cost(n, 2).energy, nn * nn * (1 + 3 / nn));
  }
}

TEST(Subquadratic, ShapeAtThirtyTwo) {
  const auto s = subquadratic_matmul_schedule(32);
  ASSERT_EQ(s.processes.size(), 512u);
  EXPECT_EQ(s.processes[0].rate, 8.0);
  EXPECT_EQ(s.processes[0].op_count, 192u);
  EXPECT_TRUE(check_collisions(s).ok());
  EXPECT_FALSE(check_collisions(subquadratic_matmul_schedule(32, Rotation::Off)).ok());
  EXPECT_EQ(schedule_cost(s, 2), subquadratic_matmul_cost(32, 2));
}

TEST(Subquadratic, NormalisedCostsConstant) {
  for (std::uint64_t n : {32u, 243u, 1024u, 3125u}) {
    const auto c = subquadratic_matmul_cost(n, 2);
    const double scale = std::pow(static_cast<double>(n), 1.8);
    EXPECT_NEAR(c.time / scale, 3.0, 1e-9);
    EXPECT_NEAR(c.energy / scale, 4.0, 1e-9);
  }
  EXPECT_THROW(subquadratic_matmul_cost(30, 2), invalid_parameter);
  EXPECT_EQ(subquadratic_matmul_schedule(1).processes.size(), 1u);
}
