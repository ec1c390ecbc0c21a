#include <gtest/gtest.h>

#include <cmath>

#include "physim/cost.hpp"
#include "physim/error.hpp"
#include "physim/event_calendar.hpp"
#include "physim/matrix.hpp"
#include "physim/random.hpp"

using namespace physim;

TEST(MeasureCost, FormulaValues) {
  EXPECT_DOUBLE_EQ(measure_cost(1, 1).energy, 0.0);
  EXPECT_DOUBLE_EQ(measure_cost(1, std::ldexp(1.0, -10)).energy, 10.0);
  EXPECT_DOUBLE_EQ(measure_cost(8, std::ldexp(1.0, -4)).energy, 7.0);
  EXPECT_DOUBLE_EQ(measure_cost(8, std::ldexp(1.0, -4)).time, 7.0);
}

TEST(MeasureCost, SubUnitAmountsAndCoarsePrecisionClampToZero) {
  EXPECT_DOUBLE_EQ(measure_cost(0.25, 1).energy, 0.0);
  EXPECT_DOUBLE_EQ(measure_cost(1, 4).energy, 0.0);
}

TEST(MeasureCost, RejectsBadPrecision) {
  EXPECT_THROW(measure_cost(1, 0), invalid_parameter);
  EXPECT_THROW(measure_cost(1, -1), invalid_parameter);
  EXPECT_THROW(measure_cost(-1, 0.5), invalid_parameter);
}

TEST(FabricateCost, FormulaValues) {
  EXPECT_DOUBLE_EQ(fabricate_cost(0, 1).energy, 0.0);
  EXPECT_DOUBLE_EQ(fabricate_cost(1, std::ldexp(1.0, -6)).energy, 7.0);
  EXPECT_DOUBLE_EQ(fabricate_cost(5, std::ldexp(1.0, -3)).energy, 8.0);
}

TEST(CostLedger, AddAndTotals) {
  CostLedger l;
  l.add("x", 0, 0);
  EXPECT_EQ(l.totals().time, 0.0);
  CostLedger m;
  m.add("lift", 2, 3);
  EXPECT_EQ(m.total_time(), 2.0);
  EXPECT_EQ(m.total_energy(), 3.0);
  CostLedger k;
  k.add("a", 1, 1).add("b", 2, 4);
  EXPECT_EQ(k.total_time(), 3.0);
  EXPECT_EQ(k.total_energy(), 5.0);
}

TEST(CostLedger, RejectsNegativeOrNonFinite) {
  CostLedger l;
  EXPECT_THROW(l.add("x", -1, 0), invalid_parameter);
  EXPECT_THROW(l.add("x", 0, NAN), invalid_parameter);
  EXPECT_THROW(l.add("x", INFINITY, 0), invalid_parameter);
  EXPECT_TRUE(l.empty());
}

TEST(CostLedger, MergeIdentityAndAdditivity) {
  CostLedger empty;
  EXPECT_TRUE(merged(empty, empty).empty());
  CostLedger l;
  l.add("a", 1, 2).add("b", 3, 4);
  const auto same = merged(l, empty);
  ASSERT_EQ(same.size(), 2u);
  EXPECT_EQ(same.totals().time, l.totals().time);
  EXPECT_EQ(same.totals().energy, l.totals().energy);

  CostLedger r;
  r.add("a", 10, 20);
  const auto both = merged(l, r);
  EXPECT_EQ(both.total_time(), 14.0);
  EXPECT_EQ(both.total_energy(), 26.0);
}

TEST(CostLedger, ByLabelFoldsInFirstSeenOrder) {
  CostLedger l;
  l.add("b", 1, 1).add("a", 2, 2).add("b", 3, 3);
  const auto rows = l.by_label();
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "b");
  EXPECT_EQ(rows[0].time, 4.0);
  EXPECT_EQ(rows[1].label, "a");
}

TEST(CostLedger, RandomAddsMatchManualSums) {
  Rng rng(5);
  CostLedger l;
  double t = 0, e = 0;
  for (int i = 0; i < 200; ++i) {
    const double dt = rng.uniform(0, 10), de = rng.uniform(0, 10);
    l.add("x", dt, de);
    t += dt;
    e += de;
  }
  EXPECT_DOUBLE_EQ(l.total_time(), t);
  EXPECT_DOUBLE_EQ(l.total_energy(), e);
}

TEST(Random, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Random, Uniform01InRange) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Matrix, BinaryMatrixRejectsNonBits) {
  BinaryMatrix m(2);
  EXPECT_THROW(m.set(0, 0, 2), invalid_parameter);
  EXPECT_THROW(BinaryMatrix::from_rows({{0, 1}, {1}}), dimension_error);
}

TEST(Matrix, IntMatrixBitWidth) {
  IntMatrix m(2, 2, 3);
  m.set(0, 0, 7);
  m.set(1, 1, -7);
  EXPECT_THROW(m.set(0, 1, 8), invalid_parameter);
  EXPECT_EQ(IntMatrix::from_rows({{2}}).bit_width(), 2);
  EXPECT_EQ(ceil_log2(1), 0);
  EXPECT_EQ(ceil_log2(5), 3);
  EXPECT_EQ(ceil_log2(8), 3);
}

TEST(Matrix, TextRoundTrip) {
  Rng rng(9);
  const auto m = IntMatrix::random_nonnegative(5, 4, rng);
  std::stringstream ss;
  write_matrix(ss, m);
  EXPECT_EQ(read_int_matrix(ss), m);
  std::stringstream bad("2\n1 0\n0\n");
  EXPECT_THROW(read_int_matrix(bad), std::invalid_argument);
}

TEST(TickCalendar, OrdersByTickAndRejectsPast) {
  TickCalendar<int> cal(4);
  cal.schedule(3, 30);
  cal.schedule(1, 10);
  cal.schedule(1, 11);
  EXPECT_EQ(cal.pending(), 3u);
  EXPECT_EQ(cal.take(0).size(), 0u);
  EXPECT_EQ(cal.take(1), (std::vector<int>{10, 11}));
  EXPECT_THROW(cal.schedule(0, 1), simulation_fault);
  EXPECT_EQ(cal.take(3), std::vector<int>{30});
  EXPECT_TRUE(cal.empty());
}
