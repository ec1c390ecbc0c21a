#pragma once

// Command-line front end for the physim simulators. Everything lives in this
// header so the test suite can drive the exact same code path in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "physim/physim.hpp"

namespace physim::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { kPass = 0, kFailure = 1, kUsage = 2 };

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Everything a command produces; rendered once as text, csv or json.
struct Report {
  std::string command;
  json params = json::object();
  CostLedger ledger;
  std::string status;
  json details = json::object();
  std::vector<std::string> notes;  // extra lines for the text format
  int exit_code = kPass;
};

inline json ledger_json(const CostLedger& ledger) {
  json rows = json::array();
  for (const auto& e : ledger.by_label()) rows.push_back({{"label", e.label}, {"time", e.time}, {"energy", e.energy}});
  return rows;
}

inline std::string render(const Report& r, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    json j;
    j["command"] = r.command;
    j["params"] = r.params;
    j["ledger"] = ledger_json(r.ledger);
    j["totals"] = {{"time", r.ledger.total_time()}, {"energy", r.ledger.total_energy()}};
    j["verification"] = {{"status", r.status}, {"details", r.details}};
    os << j.dump(2) << '\n';
  } else if (format == "csv") {
    os << "label,time,energy\n";
    for (const auto& e : r.ledger.by_label())
      os << e.label << ',' << format_real(e.time) << ',' << format_real(e.energy) << '\n';
    os << "total," << format_real(r.ledger.total_time()) << ',' << format_real(r.ledger.total_energy()) << '\n';
    os << "status," << r.status << '\n';
  } else {
    os << r.command;
    for (const auto& [k, v] : r.params.items()) os << ' ' << k << '=' << v.dump();
    os << '\n';
    if (!r.ledger.empty()) {
      os << "ledger:\n";
      for (const auto& e : r.ledger.by_label())
        os << "  " << e.label << ": time " << format_real(e.time) << ", energy " << format_real(e.energy) << '\n';
      os << "  total: time " << format_real(r.ledger.total_time()) << ", energy "
         << format_real(r.ledger.total_energy()) << '\n';
    }
    for (const auto& line : r.notes) os << line << '\n';
    os << r.status << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared options.
// ---------------------------------------------------------------------------

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string format = "text";
  std::string output;
};

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("PHYSIM_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw usage_error("PHYSIM_SEED must be a nonnegative integer");
    }
  }
  return 1;
}

inline void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_format) {
  o.format = default_format;
  cmd->add_option("--seed", o.seed, "RNG seed (default: $PHYSIM_SEED or 1)");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}));
  cmd->add_option("--output", o.output, "Write the report to this file instead of stdout");
}

inline IntMatrix load_int_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open matrix file '" + path + "'");
  return read_int_matrix(in);
}

inline bool is_binary(const IntMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0 && m(i, j) != 1) return false;
  return true;
}

inline BinaryMatrix to_binary(const IntMatrix& m) {
  BinaryMatrix b(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) b.set(i, j, static_cast<int>(m(i, j)));
  return b;
}

// First differing entry of two equally sized matrices, as "(i,j): got x, expected y".
template <typename M>
std::optional<std::string> first_diff(const M& got, const M& want) {
  for (std::size_t i = 0; i < want.rows(); ++i)
    for (std::size_t j = 0; j < want.cols(); ++j)
      if (got(i, j) != want(i, j)) {
        return "(" + std::to_string(i) + "," + std::to_string(j) + "): got " +
               std::to_string(static_cast<long long>(got(i, j))) + ", expected " +
               std::to_string(static_cast<long long>(want(i, j)));
      }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

struct FlowOptions {
  CommonOptions common;
  std::size_t n = 0;
  double delta = 0.0;
  double eps = 0.0;
  bool safe = false;
  bool worst_case = false;
  std::size_t trials = 1;
  double density = 0.5;
  std::string a_path, b_path;
};

inline Report run_flow(const FlowOptions& o) {
  Report r;
  r.command = "flow";

  std::optional<IntMatrix> a_file, b_file;
  if (!o.a_path.empty() || !o.b_path.empty()) {
    if (o.a_path.empty() || o.b_path.empty()) throw usage_error("--a and --b must be given together");
    a_file = load_int_matrix(o.a_path);
    b_file = load_int_matrix(o.b_path);
    if (a_file->rows() != b_file->rows()) throw usage_error("--a and --b must have the same size");
  }
  const std::size_t n = a_file ? a_file->rows() : o.n;
  if (n == 0) throw usage_error("--n is required (or --a/--b files)");
  const std::size_t trials = a_file ? 1 : o.trials;

  const SafeThresholds safe = correctness_threshold(n);
  const double delta = o.safe ? safe.delta : o.delta;
  const double eps = o.safe ? safe.eps : o.eps;
  const SplitterMode mode = o.worst_case ? SplitterMode::WorstCase : SplitterMode::Random;
  const bool certified = delta <= safe.delta && eps <= safe.eps;

  r.params = {{"n", n},
              {"seed", o.common.seed},
              {"delta", delta},
              {"eps_meas", eps},
              {"splitters", o.worst_case ? "worst-case" : "random"},
              {"trials", trials},
              {"density", o.density},
              {"delta_safe", safe.delta},
              {"eps_safe", safe.eps}};

  std::size_t bad_trials = 0, bad_entries = 0;
  std::optional<std::string> first;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = o.common.seed + t;
    IntMatrix expected(1, 1, 1), got(1, 1, 1);
    CostLedger ledger;
    if (a_file && !(is_binary(*a_file) && is_binary(*b_file))) {
      auto res = int_matmul_bitdecomp(*a_file, *b_file, delta, eps, trial_seed, mode);
      got = std::move(res.c);
      ledger = std::move(res.ledger);
      expected = integer_product(*a_file, *b_file);
    } else {
      Rng rng(trial_seed);
      const BinaryMatrix a = a_file ? to_binary(*a_file) : BinaryMatrix::random(n, rng, o.density);
      const BinaryMatrix b = b_file ? to_binary(*b_file) : BinaryMatrix::random(n, rng, o.density);
      auto res = flow_matmul(a, b, delta, eps, trial_seed, mode);
      got = std::move(res.c);
      ledger = std::move(res.ledger);
      expected = integer_product(a, b);
    }
    if (t == 0) r.ledger = std::move(ledger);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) wrong += got(i, j) != expected(i, j);
    if (wrong) {
      ++bad_trials;
      bad_entries += wrong;
      if (!first) first = "trial " + std::to_string(t) + " " + *first_diff(got, expected);
    }
  }

  r.details = {{"certified", certified},
               {"trials", trials},
               {"misrounded_trials", bad_trials},
               {"misrounded_entries", bad_entries}};
  if (first) r.details["first_mismatch"] = *first;
  r.notes.push_back("certified thresholds: delta_safe=" + format_real(safe.delta) +
                    " eps_safe=" + format_real(safe.eps) + (certified ? " (within)" : " (exceeded)"));
  r.notes.push_back("misrounded trials: " + std::to_string(bad_trials) + "/" + std::to_string(trials) +
                    ", entries: " + std::to_string(bad_entries));
  if (first) r.notes.push_back("first mismatch: " + *first);

  if (bad_trials == 0) {
    r.status = "PASS";
  } else if (certified) {
    r.status = "FAIL";
    r.exit_code = kFailure;
  } else {
    r.status = "FALSIFIED";
  }
  return r;
}

// ---------------------------------------------------------------------------
// kinetic
// ---------------------------------------------------------------------------

struct KineticOptions {
  CommonOptions common;
  std::size_t n = 0;
  std::string model = "kinetic";
  bool exhaustive = false;
  std::size_t trials = 1;
  double density = 0.5;
  std::string a_path, b_path;
};

inline Report run_kinetic(const KineticOptions& o) {
  Report r;
  r.command = "kinetic";

  std::vector<std::pair<BinaryMatrix, BinaryMatrix>> cases;
  if (!o.a_path.empty() || !o.b_path.empty()) {
    if (o.a_path.empty() || o.b_path.empty()) throw usage_error("--a and --b must be given together");
    const IntMatrix a = load_int_matrix(o.a_path), b = load_int_matrix(o.b_path);
    if (!is_binary(a) || !is_binary(b)) throw usage_error("kinetic matrices must be 0/1");
    if (a.rows() != b.rows()) throw usage_error("--a and --b must have the same size");
    cases.emplace_back(to_binary(a), to_binary(b));
  } else if (o.exhaustive) {
    if (o.n == 0 || o.n > 3) throw usage_error("--exhaustive supports n in [1, 3]");
    const std::size_t cells = o.n * o.n;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << (2 * cells)); ++code) {
      BinaryMatrix a(o.n), b(o.n);
      for (std::size_t c = 0; c < cells; ++c) {
        a.set(c / o.n, c % o.n, static_cast<int>((code >> c) & 1));
        b.set(c / o.n, c % o.n, static_cast<int>((code >> (cells + c)) & 1));
      }
      cases.emplace_back(std::move(a), std::move(b));
    }
  } else {
    if (o.n == 0) throw usage_error("--n is required");
    for (std::size_t t = 0; t < o.trials; ++t) {
      Rng rng(o.common.seed + t);
      BinaryMatrix a = BinaryMatrix::random(o.n, rng, o.density);
      BinaryMatrix b = BinaryMatrix::random(o.n, rng, o.density);
      cases.emplace_back(std::move(a), std::move(b));
    }
  }
  const std::size_t n = cases.front().first.rows();
  const EnergyModel model = o.model == "kinetic" ? EnergyModel::kinetic() : EnergyModel::optical(n);

  r.params = {{"n", n},
              {"seed", o.common.seed},
              {"model", o.model},
              {"channels", model.channel_count},
              {"instances", cases.size()},
              {"exhaustive", o.exhaustive},
              {"density", o.density}};

  std::size_t failures = 0, collisions = 0, cleared = 0;
  double max_clear = 0.0, max_agent = 0.0;
  std::optional<std::string> first;
  for (std::size_t t = 0; t < cases.size(); ++t) {
    const auto& [a, b] = cases[t];
    const auto res = kinetic_matmul(a, b, model);
    const BinaryMatrix want = brute_boolean_matmul(a, b);
    const auto ram = ram_boolean_matmul(a, b);
    if (t == 0) r.ledger = res.ledger;
    collisions += res.collisions;
    cleared += res.cells_cleared;
    max_clear = std::max(max_clear, res.max_collision_clear_energy);
    max_agent = std::max(max_agent, res.max_agent_phase_energy);
    auto diff = first_diff(res.c, want);
    if (!diff && !(ram.c == want)) diff = std::string("ram algorithm disagrees with brute force");
    if (diff) {
      ++failures;
      if (!first) first = "instance " + std::to_string(t) + " " + *diff;
    }
  }

  const double basel = std::numbers::pi * std::numbers::pi / 6.0;
  r.details = {{"instances", cases.size()},
               {"failures", failures},
               {"deadline_faults", 0},
               {"collisions", collisions},
               {"cells_cleared", cleared},
               {"max_collision_clear_energy", max_clear},
               {"max_agent_phase_energy", max_agent},
               {"agent_phase_bound", kinetic_agent_energy_bound(n)}};
  if (model.kind == EnergyModelKind::Kinetic) r.details["pi2_over_6_margin"] = basel - max_clear;
  if (first) r.details["first_mismatch"] = *first;

  r.notes.push_back("instances: " + std::to_string(cases.size()) + ", failures: " + std::to_string(failures) +
                    ", collisions: " + std::to_string(collisions) + ", cells cleared: " + std::to_string(cleared));
  if (model.kind == EnergyModelKind::Kinetic) {
    r.notes.push_back("max clear energy per collision: " + format_real(max_clear) +
                      " (pi^2/6 margin " + format_real(basel - max_clear) + ")");
  } else {
    json table = json::array();
    r.notes.push_back("d,channel,absorbed,bound_1_over_8d,margin");
    for (std::int64_t d = 1; d < static_cast<std::int64_t>(n); ++d) {
      const int l = optical_witness_channel(d);
      const double got = optical_channel_absorption(l, d);
      const double bound = 1.0 / (8.0 * static_cast<double>(d));
      table.push_back({{"d", d}, {"channel", l}, {"absorbed", got}, {"bound", bound}, {"margin", got - bound}});
      r.notes.push_back(std::to_string(d) + "," + std::to_string(l) + "," + format_real(got) + "," +
                        format_real(bound) + "," + format_real(got - bound));
    }
    r.details["absorption_table"] = std::move(table);
  }
  if (first) r.notes.push_back("first mismatch: " + *first);

  r.status = failures == 0 ? "PASS" : "FAIL";
  r.exit_code = failures == 0 ? kPass : kFailure;
  return r;
}

// ---------------------------------------------------------------------------
// alpha
// ---------------------------------------------------------------------------

struct AlphaOptions {
  CommonOptions common;
  std::string family;
  std::uint64_t n = 0;
  double alpha = 1.0;
  double s = 1.0 / 3.0;
  std::optional<double> q;
  bool break_rotation = false;
  bool shared_block = false;
};

inline Report run_alpha(const AlphaOptions& o) {
  Report r;
  r.command = "alpha " + o.family;
  if (o.n == 0) throw usage_error("--n is required");
  require_alpha(o.alpha);

  ProcessSchedule sched;
  CostReport closed;
  r.params = {{"n", o.n}, {"alpha", o.alpha}};
  const double nn = static_cast<double>(o.n);
  if (o.family == "copy") {
    const double q = o.q.value_or(std::max(0.0, 1.0 - o.alpha * o.s));
    r.params["s"] = o.s;
    r.params["q"] = q;
    r.params["layout"] = o.shared_block ? "shared-block" : "disjoint";
    sched = copy_list_schedule(o.n, q, o.s, o.shared_block ? CopyLayout::SharedBlock : CopyLayout::Disjoint);
    closed = copy_list_cost(o.n, q, o.s, o.alpha);
    const double time_exp = 1.0 - q + o.s;
    const double energy_exp = std::max(q, 1.0 - o.s * o.alpha);
    r.details["predicted_time_exponent"] = time_exp;
    r.details["predicted_energy_exponent"] = energy_exp;
    r.details["time_over_n_pow"] = closed.time / std::pow(nn, time_exp);
    r.details["energy_over_n_pow"] = closed.energy / std::pow(nn, energy_exp);
  } else {
    const Rotation rot = o.break_rotation ? Rotation::Off : Rotation::On;
    r.params["rotation"] = o.break_rotation ? "off" : "on";
    if (o.family == "matmul") {
      sched = matmul_schedule(o.n, rot);
      closed = matmul_cost(o.n, o.alpha);
      r.details["energy_over_n2"] = closed.energy / (nn * nn);
    } else {
      sched = subquadratic_matmul_schedule(o.n, rot);
      closed = subquadratic_matmul_cost(o.n, o.alpha);
      r.details["time_over_n_9_5"] = closed.time / std::pow(nn, 1.8);
      r.details["energy_over_n_9_5"] = closed.energy / std::pow(nn, 1.8);
    }
  }

  const CollisionReport check = check_collisions(sched);
  const CostReport simulated = schedule_cost(sched, o.alpha);
  const bool agree = simulated == closed;
  r.ledger.add("process init", 0.0, static_cast<double>(simulated.process_count));
  r.ledger.add("operations", simulated.time, simulated.energy - static_cast<double>(simulated.process_count));

  r.details["processes"] = simulated.process_count;
  r.details["accesses_checked"] = check.accesses_checked;
  r.details["closed_form"] = {{"time", closed.time}, {"energy", closed.energy}};
  r.details["simulated"] = {{"time", simulated.time}, {"energy", simulated.energy}};
  r.details["closed_form_agrees"] = agree;
  r.notes.push_back("processes: " + std::to_string(simulated.process_count) +
                    ", accesses checked: " + std::to_string(check.accesses_checked));
  r.notes.push_back("closed form: time " + format_real(closed.time) + ", energy " + format_real(closed.energy));
  r.notes.push_back("simulated:   time " + format_real(simulated.time) + ", energy " + format_real(simulated.energy) +
                    (agree ? " (exact agreement)" : " (MISMATCH)"));
  for (const auto& [k, v] : r.details.items())
    if (k.find("_over_") != std::string::npos) r.notes.push_back(k + ": " + v.dump());

  if (check.conflict) {
    const Conflict& c = *check.conflict;
    r.details["conflict"] = {{"process_a", c.process_a},
                             {"process_b", c.process_b},
                             {"location", c.location},
                             {"overlap", {c.overlap_begin, c.overlap_end}}};
    r.notes.push_back("conflict: processes " + std::to_string(c.process_a) + " and " + std::to_string(c.process_b) +
                      " at location " + std::to_string(c.location) + " during [" + format_real(c.overlap_begin) +
                      ", " + format_real(c.overlap_end) + ")");
    r.status = "CONFLICT";
    r.exit_code = kFailure;
  } else if (!agree) {
    r.status = "FAIL";
    r.exit_code = kFailure;
  } else {
    r.status = "OK";
  }
  return r;
}

// ---------------------------------------------------------------------------
// gadget
// ---------------------------------------------------------------------------

struct GadgetOptions {
  CommonOptions common;
  std::string kind;
  std::string bits;
  double v = 1.0;
  std::size_t side = 0;
  double eps = 1e-6;
  std::uint64_t max_steps = kDefaultDiffusionSteps;
};

inline Report run_gadget(const GadgetOptions& o) {
  Report r;
  r.command = "gadget " + o.kind;
  if (o.kind == "or") {
    std::vector<std::uint8_t> bits;
    for (char ch : o.bits) {
      if (ch != '0' && ch != '1') throw usage_error("--bits must be a string of 0 and 1");
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    if (bits.empty()) throw usage_error("--bits is required");
    const auto res = or_track(bits, o.v);
    std::uint8_t fold = 0;
    for (auto b : bits) fold |= b;
    r.params = {{"bits", o.bits}, {"v", o.v}};
    r.ledger = res.ledger;
    r.details = {{"result", res.result}, {"in_model", res.in_model}, {"expected", fold}};
    r.notes.push_back("OR = " + std::to_string(res.result) + (res.in_model ? "" : " (v > sqrt(n): out of model)"));
    r.status = res.result == fold ? "PASS" : "FAIL";
  } else {
    if (o.side == 0) throw usage_error("--side is required");
    const auto n = static_cast<double>(o.side * o.side);
    const auto res = diffuse_average(HeatGrid::hot_corner(o.side, n), o.eps, o.max_steps);
    const bool converged = res.status == DiffusionStatus::Converged;
    r.params = {{"side", o.side}, {"eps", o.eps}, {"max_steps", o.max_steps}, {"initial", "hot-corner"}};
    r.ledger = res.ledger;
    r.details = {{"mean_estimate", res.mean_estimate},
                 {"true_mean", 1.0},
                 {"steps_used", res.steps_used},
                 {"converged", converged},
                 {"total_heat", res.grid.total_heat()}};
    r.notes.push_back("mean estimate " + format_real(res.mean_estimate) + " after " +
                      std::to_string(res.steps_used) + " steps" + (converged ? "" : " (NOT converged)"));
    r.status = converged && std::abs(res.mean_estimate - 1.0) < o.eps ? "PASS" : "FAIL";
  }
  r.exit_code = r.status == "PASS" ? kPass : kFailure;
  return r;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

// Accepts "8,16,32", or "a,...,z" for doubling from a to z, or
// "a,b,...,z" for the geometric progression with ratio b/a.
inline std::vector<std::uint64_t> parse_n_values(const std::vector<std::string>& tokens) {
  std::vector<std::uint64_t> out;
  auto number = [](const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || s.empty() || s[0] == '-') throw usage_error("bad --n value '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != "...") {
      out.push_back(number(tokens[i]));
      continue;
    }
    if (out.empty() || i + 1 >= tokens.size()) throw usage_error("'...' needs values on both sides");
    const std::uint64_t last = number(tokens[i + 1]);
    const std::uint64_t cur = out.back();
    std::uint64_t ratio_num = 2, ratio_den = 1;
    if (out.size() >= 2) {
      ratio_num = out.back();
      ratio_den = out[out.size() - 2];
    }
    if (cur == 0 || ratio_num <= ratio_den || ratio_num % ratio_den != 0)
      throw usage_error("'...' needs an integer growth ratio > 1");
    for (std::uint64_t v = cur * (ratio_num / ratio_den); v < last; v *= ratio_num / ratio_den) out.push_back(v);
  }
  return out;
}

struct SweepOptions {
  CommonOptions common;
  std::string target;
  std::vector<std::string> n_tokens;
  SweepParams params;
  std::string model = "kinetic";
};

// Sweep output is the sample CSV + fit block (or a JSON document); it does not
// go through Report.
inline int run_sweep(const SweepOptions& o, std::string& text) {
  const auto target = parse_sweep_target(o.target);
  if (!target) throw usage_error("unknown sweep target '" + o.target + "'");
  const auto n_values = parse_n_values(o.n_tokens);
  SweepParams p = o.params;
  p.energy_model = o.model == "kinetic" ? EnergyModelKind::Kinetic : EnergyModelKind::Optical;

  const auto samples = sweep(*target, n_values, p, o.common.seed);
  const SweepFit fit = fit_sweep(samples);
  std::ostringstream os;
  if (o.common.format == "json") {
    json j;
    j["command"] = "sweep";
    j["params"] = {{"target", o.target},
                   {"n", n_values},
                   {"seed", o.common.seed},
                   {"delta", p.delta},
                   {"eps_meas", p.eps_meas},
                   {"safe_thresholds", p.safe_thresholds},
                   {"alpha", p.alpha},
                   {"s", p.s},
                   {"q", p.copy_q()},
                   {"model", o.model},
                   {"density", p.density}};
    json rows = json::array();
    for (const auto& s : samples)
      rows.push_back({{"label", s.label}, {"n", s.n}, {"seed", s.seed}, {"time", s.time}, {"energy", s.energy}});
    j["samples"] = rows;
    auto fit_json = [](const std::optional<ExponentFit>& f) -> json {
      if (!f) return nullptr;
      return {{"exponent", f->exponent}, {"intercept", f->intercept}, {"r2", f->r_squared}, {"samples", f->sample_count}};
    };
    j["fit"] = {{"label", fit.label}, {"time", fit_json(fit.time)}, {"energy", fit_json(fit.energy)}};
    os << j.dump(2) << '\n';
  } else {
    write_sweep_csv(os, samples, fit);
  }
  text = os.str();
  return kPass;
}

// ---------------------------------------------------------------------------
// Entry point.
// ---------------------------------------------------------------------------

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw usage_error("cannot write '" + path + "'");
  f << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulators and cost ledgers for physical matrix-multiplication machines"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  try {
    seed = default_seed();
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  FlowOptions flow;
  flow.common.seed = seed;
  auto* flow_cmd = app.add_subcommand("flow", "Integer matmul on the splitter-tree flow machine");
  add_common(flow_cmd, flow.common, "text");
  flow_cmd->add_option("--n", flow.n, "Matrix size")->check(CLI::PositiveNumber);
  flow_cmd->add_option("--delta", flow.delta, "Splitter tolerance, splits in [1/2-delta, 1/2+delta]")
      ->check(CLI::Range(0.0, 0.4999999));
  flow_cmd->add_option("--eps", flow.eps, "Measurement noise amplitude")->check(CLI::NonNegativeNumber);
  flow_cmd->add_flag("--safe-thresholds", flow.safe, "Use the certified delta and eps for this n");
  flow_cmd->add_flag("--worst-case", flow.worst_case, "Set every splitter to 1/2 + delta");
  flow_cmd->add_option("--trials", flow.trials, "Random instances to run")->check(CLI::PositiveNumber);
  flow_cmd->add_option("--p", flow.density, "Density of random matrices")->check(CLI::Range(0.0, 1.0));
  flow_cmd->add_option("--a", flow.a_path, "Matrix file for A (integers allowed)");
  flow_cmd->add_option("--b", flow.b_path, "Matrix file for B (integers allowed)");

  KineticOptions kin;
  kin.common.seed = seed;
  auto* kin_cmd = app.add_subcommand("kinetic", "Boolean matmul on the kinetic grid");
  add_common(kin_cmd, kin.common, "text");
  kin_cmd->add_option("--n", kin.n, "Matrix size")->check(CLI::PositiveNumber);
  kin_cmd->add_option("--model", kin.model, "Clearing energy model")->check(CLI::IsMember({"kinetic", "optical"}));
  kin_cmd->add_flag("--exhaustive", kin.exhaustive, "Every (A, B) pair of size n (n <= 3)");
  kin_cmd->add_option("--trials", kin.trials, "Random instances to run")->check(CLI::PositiveNumber);
  kin_cmd->add_option("--p", kin.density, "Density of random matrices")->check(CLI::Range(0.0, 1.0));
  kin_cmd->add_option("--a", kin.a_path, "Matrix file for A");
  kin_cmd->add_option("--b", kin.b_path, "Matrix file for B");

  AlphaOptions alpha;
  alpha.common.seed = seed;
  auto* alpha_cmd = app.add_subcommand("alpha", "Rate/energy process schedules");
  add_common(alpha_cmd, alpha.common, "text");
  alpha_cmd->add_option("family", alpha.family, "copy | matmul | subquadratic")
      ->required()
      ->check(CLI::IsMember({"copy", "matmul", "subquadratic"}));
  alpha_cmd->add_option("--n", alpha.n, "Instance size")->check(CLI::PositiveNumber);
  alpha_cmd->add_option("--alpha", alpha.alpha, "Rate/energy exponent")->check(CLI::Range(0.0, 2.0));
  alpha_cmd->add_option("--s", alpha.s, "Copy: rate exponent, rate = n^s")->check(CLI::Range(0.0, 1.0));
  alpha_cmd->add_option("--q", alpha.q, "Copy: parallelism exponent (default 1 - alpha s)")->check(CLI::Range(0.0, 1.0));
  alpha_cmd->add_flag("--break-rotation", alpha.break_rotation, "Matmul: drop the (i+j+t) rotation");
  alpha_cmd->add_flag("--shared-block", alpha.shared_block, "Copy: every process copies the same block");

  GadgetOptions gadget;
  gadget.common.seed = seed;
  auto* gadget_cmd = app.add_subcommand("gadget", "Aggregation gadgets: frictionless-track OR, diffusion averaging");
  add_common(gadget_cmd, gadget.common, "text");
  gadget_cmd->add_option("kind", gadget.kind, "or | diffuse")->required()->check(CLI::IsMember({"or", "diffuse"}));
  gadget_cmd->add_option("--bits", gadget.bits, "OR: track contents, e.g. 0100");
  gadget_cmd->add_option("--v", gadget.v, "OR: probe velocity")->check(CLI::PositiveNumber);
  gadget_cmd->add_option("--side", gadget.side, "Diffuse: plate side")->check(CLI::PositiveNumber);
  gadget_cmd->add_option("--eps", gadget.eps, "Diffuse: tolerance")->check(CLI::PositiveNumber);
  gadget_cmd->add_option("--max-steps", gadget.max_steps, "Diffuse: step limit")->check(CLI::PositiveNumber);

  SweepOptions sw;
  sw.common.seed = seed;
  auto* sweep_cmd = app.add_subcommand("sweep", "Scaling sweep with exponent fit");
  add_common(sweep_cmd, sw.common, "csv");
  sweep_cmd->add_option("--target", sw.target, "flow-matmul | flow-build | flow-matvec | kinetic-matmul | "
                                               "alpha-copy | alpha-matmul | alpha-subquadratic | diffusion")
      ->required();
  sweep_cmd->add_option("--n", sw.n_tokens, "Sizes, e.g. 8,16,32 or 1024,...,65536")->required()->delimiter(',');
  sweep_cmd->add_option("--delta", sw.params.delta, "Flow: splitter tolerance")->check(CLI::Range(0.0, 0.4999999));
  sweep_cmd->add_option("--eps", sw.params.eps_meas, "Flow: measurement noise")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_flag("--safe-thresholds", sw.params.safe_thresholds, "Flow: certified delta and eps per n");
  sweep_cmd->add_option("--model", sw.model, "Kinetic: clearing model")->check(CLI::IsMember({"kinetic", "optical"}));
  sweep_cmd->add_option("--p", sw.params.density, "Density of random matrices")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--alpha", sw.params.alpha, "Alpha targets: exponent")->check(CLI::Range(0.0, 2.0));
  sweep_cmd->add_option("--s", sw.params.s, "Alpha-copy: rate exponent")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--q", sw.params.q, "Alpha-copy: parallelism exponent")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--diffusion-eps", sw.params.diffusion_eps, "Diffusion: tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*sweep_cmd) {
      std::string text;
      const int code = run_sweep(sw, text);
      emit(text, sw.common.output, out);
      return code;
    }
    Report report;
    const CommonOptions* common = nullptr;
    if (*flow_cmd) {
      report = run_flow(flow);
      common = &flow.common;
    } else if (*kin_cmd) {
      report = run_kinetic(kin);
      common = &kin.common;
    } else if (*alpha_cmd) {
      report = run_alpha(alpha);
      common = &alpha.common;
    } else {
      report = run_gadget(gadget);
      common = &gadget.common;
    }
    emit(render(report, common->format), common->output, out);
    return report.exit_code;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const sweep_error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const simulation_fault& e) {
    err << "simulation fault: " << e.what() << '\n';
    return kFailure;
  } catch (const std::invalid_argument& e) {
    // invalid_parameter, dimension_error, unsupported_input: bad user input.
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace physim::cli
