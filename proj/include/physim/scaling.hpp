#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "physim/alpha_model.hpp"
#include "physim/cost.hpp"
#include "physim/error.hpp"
#include "physim/flow_machine.hpp"
#include "physim/gadgets.hpp"
#include "physim/kinetic_machine.hpp"
#include "physim/matrix.hpp"
#include "physim/random.hpp"

namespace physim {

struct ExponentFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log2 of the prefactor
  double r_squared = 0.0;
  std::size_t sample_count = 0;
};

// Least squares on (log2 n, log2 cost).
inline ExponentFit fit_exponent(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) throw invalid_parameter("fit_exponent: need at least 2 samples");
  const double m = static_cast<double>(samples.size());
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs, ys;
  for (const auto& [n, cost] : samples) {
    if (!(n > 0.0) || !(cost > 0.0) || !std::isfinite(cost))
      throw invalid_parameter("fit_exponent: n and cost must be positive");
    xs.push_back(std::log2(n));
    ys.push_back(std::log2(cost));
    sx += xs.back();
    sy += ys.back();
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j)
      if (xs[i] == xs[j]) throw invalid_parameter("fit_exponent: sample sizes must be distinct");

  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ExponentFit fit;
  fit.sample_count = samples.size();
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.exponent * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

inline ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& samples) {
  return fit_exponent(std::span<const std::pair<double, double>>(samples));
}

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

struct ScalingSample {
  std::uint64_t n = 0;
  double time = 0.0;
  double energy = 0.0;
  std::string label;
  std::uint64_t seed = 0;

  friend bool operator==(const ScalingSample&, const ScalingSample&) = default;
};

enum class SweepTarget {
  FlowMatmul,
  FlowBuild,   // construction ledger only
  FlowMatvec,  // one matvec ledger
  KineticMatmul,
  AlphaCopy,
  AlphaMatmul,
  AlphaSubquadratic,  // closed form; schedules at n >= 1024 are too large to materialize
  Diffusion,
};

inline const char* to_string(SweepTarget t) {
  switch (t) {
    case SweepTarget::FlowMatmul: return "flow-matmul";
    case SweepTarget::FlowBuild: return "flow-build";
    case SweepTarget::FlowMatvec: return "flow-matvec";
    case SweepTarget::KineticMatmul: return "kinetic-matmul";
    case SweepTarget::AlphaCopy: return "alpha-copy";
    case SweepTarget::AlphaMatmul: return "alpha-matmul";
    case SweepTarget::AlphaSubquadratic: return "alpha-subquadratic";
    case SweepTarget::Diffusion: return "diffusion";
  }
  return "?";
}

inline std::optional<SweepTarget> parse_sweep_target(const std::string& s) {
  for (auto t : {SweepTarget::FlowMatmul, SweepTarget::FlowBuild, SweepTarget::FlowMatvec, SweepTarget::KineticMatmul,
                 SweepTarget::AlphaCopy, SweepTarget::AlphaMatmul, SweepTarget::AlphaSubquadratic,
                 SweepTarget::Diffusion})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

struct SweepParams {
  double delta = 0.0;
  double eps_meas = 0.0;
  bool safe_thresholds = false;  // overrides delta and eps_meas per n
  double density = 0.5;          // Bernoulli parameter for random matrices
  EnergyModelKind energy_model = EnergyModelKind::Kinetic;
  double alpha = 1.0;
  double s = 1.0 / 3.0;
  std::optional<double> q;  // defaults to max(0, 1 - alpha s)
  double diffusion_eps = 1e-6;

  double copy_q() const { return q.value_or(std::max(0.0, 1.0 - alpha * s)); }
};

struct sweep_error : std::runtime_error {
  sweep_error(std::uint64_t n, const std::string& what)
      : std::runtime_error("sweep failed at n=" + std::to_string(n) + ": " + what), n(n) {}
  std::uint64_t n;
};

namespace detail {

inline ScalingSample flow_sample(SweepTarget target, std::uint64_t n, const SweepParams& p, std::uint64_t seed) {
  Rng rng(seed);
  double delta = p.delta, eps = p.eps_meas;
  if (p.safe_thresholds) {
    const auto t = correctness_threshold(n);
    delta = t.delta;
    eps = t.eps;
  }
  const BinaryMatrix a = BinaryMatrix::random(n, rng, p.density);
  if (target == SweepTarget::FlowBuild) {
    const auto m = build_flow_machine(a, delta, seed);
    return {n, m.construction_ledger().total_time(), m.construction_ledger().total_energy(), {}, seed};
  }
  if (target == SweepTarget::FlowMatvec) {
    const auto m = build_flow_machine(a, delta, seed);
    BinaryVector b(n);
    for (std::size_t j = 0; j < n; ++j) b.set(j, rng.bernoulli(p.density) ? 1 : 0);
    const auto mv = flow_matvec(m, b, eps, derive_seed(seed, 1));
    return {n, mv.ledger.total_time(), mv.ledger.total_energy(), {}, seed};
  }
  const BinaryMatrix b = BinaryMatrix::random(n, rng, p.density);
  const auto r = flow_matmul(a, b, delta, eps, seed);
  const bool certified = p.safe_thresholds || (delta == 0.0 && eps == 0.0);
  if (certified && !(r.c == integer_product(a, b))) throw simulation_fault("flow product disagrees with oracle");
  return {n, r.ledger.total_time(), r.ledger.total_energy(), {}, seed};
}

inline ScalingSample kinetic_sample(std::uint64_t n, const SweepParams& p, std::uint64_t seed) {
  Rng rng(seed);
  const BinaryMatrix a = BinaryMatrix::random(n, rng, p.density);
  const BinaryMatrix b = BinaryMatrix::random(n, rng, p.density);
  const EnergyModel model =
      p.energy_model == EnergyModelKind::Kinetic ? EnergyModel::kinetic() : EnergyModel::optical(n);
  const auto r = kinetic_matmul(a, b, model);
  if (!(r.c == brute_boolean_matmul(a, b))) throw simulation_fault("kinetic product disagrees with oracle");
  return {n, r.ledger.total_time(), r.ledger.total_energy(), {}, seed};
}

// Runs the schedule, requires it collision free and equal to its closed form.
inline ScalingSample schedule_sample(std::uint64_t n, const ProcessSchedule& sched, const CostReport& closed,
                                     double alpha, std::uint64_t seed) {
  const auto check = check_collisions(sched);
  if (!check.ok()) throw simulation_fault("schedule has a memory conflict");
  const CostReport simulated = schedule_cost(sched, alpha);
  if (!(simulated == closed)) throw simulation_fault("schedule cost differs from closed form");
  return {n, simulated.time, simulated.energy, {}, seed};
}

inline ScalingSample diffusion_sample(std::uint64_t n, const SweepParams& p, std::uint64_t seed) {
  const auto side = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n) throw invalid_parameter("diffusion sweep needs perfect-square n (cells of a square plate)");
  const auto r = diffuse_average(HeatGrid::hot_corner(side, static_cast<double>(n)), p.diffusion_eps);
  if (r.status != DiffusionStatus::Converged) throw simulation_fault("diffusion did not converge");
  return {n, r.ledger.total_time(), r.ledger.total_energy(), {}, seed};
}

}  // namespace detail

// One sample per n, run i seeded with seed + i. Samples come back in the
// order of n_values, which must be strictly ascending.
inline std::vector<ScalingSample> sweep(SweepTarget target, std::span<const std::uint64_t> n_values,
                                        const SweepParams& params, std::uint64_t seed) {
  if (n_values.empty()) throw invalid_parameter("sweep: n_values must be nonempty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw invalid_parameter("sweep: n must be >= 1");
    if (i > 0 && n_values[i] <= n_values[i - 1]) throw invalid_parameter("sweep: n_values must be ascending");
  }

  std::vector<ScalingSample> out;
  out.reserve(n_values.size());
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    const std::uint64_t n = n_values[i];
    const std::uint64_t run_seed = seed + i;
    try {
      ScalingSample s;
      switch (target) {
        case SweepTarget::FlowMatmul:
        case SweepTarget::FlowBuild:
        case SweepTarget::FlowMatvec:
          s = detail::flow_sample(target, n, params, run_seed);
          break;
        case SweepTarget::KineticMatmul:
          s = detail::kinetic_sample(n, params, run_seed);
          break;
        case SweepTarget::AlphaCopy: {
          const double q = params.copy_q();
          s = detail::schedule_sample(n, copy_list_schedule(n, q, params.s),
                                      copy_list_cost(n, q, params.s, params.alpha), params.alpha, run_seed);
          break;
        }
        case SweepTarget::AlphaMatmul:
          s = detail::schedule_sample(n, matmul_schedule(n), matmul_cost(n, params.alpha), params.alpha, run_seed);
          break;
        case SweepTarget::AlphaSubquadratic: {
          const auto c = subquadratic_matmul_cost(n, params.alpha);
          s = {n, c.time, c.energy, {}, run_seed};
          break;
        }
        case SweepTarget::Diffusion:
          s = detail::diffusion_sample(n, params, run_seed);
          break;
      }
      s.label = to_string(target);
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw sweep_error(n, e.what());
    }
  }
  return out;
}

inline std::vector<ScalingSample> sweep(SweepTarget target, const std::vector<std::uint64_t>& n_values,
                                        const SweepParams& params, std::uint64_t seed) {
  return sweep(target, std::span<const std::uint64_t>(n_values), params, seed);
}

struct SweepFit {
  std::string label;
  std::optional<ExponentFit> time;
  std::optional<ExponentFit> energy;  // empty when a cost is zero (e.g. diffusion energy)
};

inline SweepFit fit_sweep(const std::vector<ScalingSample>& samples) {
  SweepFit fit;
  if (!samples.empty()) fit.label = samples.front().label;
  std::vector<std::pair<double, double>> t, e;
  bool time_ok = true, energy_ok = true;
  for (const auto& s : samples) {
    t.emplace_back(static_cast<double>(s.n), s.time);
    e.emplace_back(static_cast<double>(s.n), s.energy);
    time_ok = time_ok && s.time > 0.0;
    energy_ok = energy_ok && s.energy > 0.0;
  }
  if (samples.size() >= 2 && time_ok) fit.time = fit_exponent(t);
  if (samples.size() >= 2 && energy_ok) fit.energy = fit_exponent(e);
  return fit;
}

// ---------------------------------------------------------------------------
// CSV: samples as label,n,seed,time,energy followed by a fit block
// label,exponent_time,exponent_energy,r2_time,r2_energy. Reals use the
// shortest representation that round-trips; missing fits print as nan.
// ---------------------------------------------------------------------------

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline constexpr const char* kSampleHeader = "label,n,seed,time,energy";
inline constexpr const char* kFitHeader = "label,exponent_time,exponent_energy,r2_time,r2_energy";

inline void write_sweep_csv(std::ostream& out, const std::vector<ScalingSample>& samples, const SweepFit& fit) {
  out << kSampleHeader << '\n';
  for (const auto& s : samples)
    out << s.label << ',' << s.n << ',' << s.seed << ',' << format_real(s.time) << ',' << format_real(s.energy)
        << '\n';
  const double nan = std::nan("");
  out << kFitHeader << '\n';
  out << fit.label << ',' << format_real(fit.time ? fit.time->exponent : nan) << ','
      << format_real(fit.energy ? fit.energy->exponent : nan) << ','
      << format_real(fit.time ? fit.time->r_squared : nan) << ','
      << format_real(fit.energy ? fit.energy->r_squared : nan) << '\n';
}

// Reads back the sample block written by write_sweep_csv.
inline std::vector<ScalingSample> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSampleHeader) throw invalid_parameter("sweep csv: missing sample header");
  std::vector<ScalingSample> out;
  while (std::getline(in, line)) {
    if (line == kFitHeader) break;
    std::stringstream row(line);
    std::string label, n, seed, time, energy;
    if (!std::getline(row, label, ',') || !std::getline(row, n, ',') || !std::getline(row, seed, ',') ||
        !std::getline(row, time, ',') || !std::getline(row, energy, ','))
      throw invalid_parameter("sweep csv: malformed row '" + line + "'");
    ScalingSample s;
    s.label = label;
    s.n = std::stoull(n);
    s.seed = std::stoull(seed);
    auto parse = [&](const std::string& field, double& dst) {
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), dst);
      if (ec != std::errc{} || ptr != field.data() + field.size())
        throw invalid_parameter("sweep csv: bad number '" + field + "'");
    };
    parse(time, s.time);
    parse(energy, s.energy);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace physim
