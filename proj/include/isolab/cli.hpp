#pragma once

/**
 * @file cli.hpp
 * @brief The iso_lab command line: run configuration, the five commands and
 * argument parsing. Human-readable tables go to `out`, machine formats to
 * the output directory.
 *
 * Exit status: 0 all invariants hold, 1 an invariant or acceptance band
 * failed, 2 bad configuration or arguments, 3 numerical failure.
 */

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isolab/measure1d.hpp"
#include "isolab/needles.hpp"
#include "isolab/rates.hpp"
#include "isolab/report.hpp"
#include "isolab/selftest.hpp"
#include "isolab/stability.hpp"

namespace isolab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

struct EnsembleOptions {
  int needle_count = 100;
  /// Unset: calibrated per δ (deficit_scale = δ, bad_fraction = δ^{(1-ε)/(9-3ε)}).
  std::optional<double> deficit_scale;
  std::optional<double> bad_fraction;
  double c_threshold = 1.0;

  friend bool operator==(const EnsembleOptions&, const EnsembleOptions&) = default;
};

struct RunConfig {
  std::string command = "verify";
  std::string measure = "gaussian";
  /// example23 | gaussian | perturbed:B;S (scaled by a parameter)
  std::string family = "example23";
  double theta = 0.5;
  std::vector<double> p{1.0, 2.0, 4.0};
  std::vector<std::string> metrics{"lp:2"};
  double epsilon = 0.1;
  std::vector<double> delta_grid = default_delta_grid();
  std::string output_dir = "iso_lab_out";
  std::uint64_t seed = 1;
  QuadratureSettings tolerances;
  EnsembleOptions ensemble;
  double D = 2.0;
  std::optional<double> exponent_min;
  std::optional<double> exponent_max;
  std::string inject_fault;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Raised for configuration problems; maps to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

inline Json to_json(const RunConfig& c) {
  Json ens{{"needle_count", c.ensemble.needle_count}};
  ens["deficit_scale"] = c.ensemble.deficit_scale ? Json(*c.ensemble.deficit_scale) : Json(nullptr);
  ens["bad_fraction"] = c.ensemble.bad_fraction ? Json(*c.ensemble.bad_fraction) : Json(nullptr);
  ens["c_threshold"] = c.ensemble.c_threshold;
  Json j{{"command", c.command},       {"measure", c.measure},       {"family", c.family},
         {"theta", c.theta},           {"p", c.p},                   {"metrics", c.metrics},
         {"epsilon", c.epsilon},       {"delta_grid", c.delta_grid}, {"output_dir", c.output_dir},
         {"seed", c.seed},             {"tolerances", isolab::to_json(c.tolerances)},
         {"ensemble", std::move(ens)}, {"D", c.D}};
  j["exponent_min"] = c.exponent_min ? Json(*c.exponent_min) : Json(nullptr);
  j["exponent_max"] = c.exponent_max ? Json(*c.exponent_max) : Json(nullptr);
  j["inject_fault"] = c.inject_fault;
  return j;
}

namespace internal {

inline void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void read_opt(const Json& j, const char* key, std::optional<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null())
    dst.reset();
  else
    dst = j.at(key).get<double>();
}

}  // namespace internal

inline RunConfig config_from_json(const Json& j) {
  internal::reject_unknown(j,
                         {"command", "measure", "family", "theta", "p", "metrics", "epsilon", "delta_grid",
                          "output_dir", "seed", "tolerances", "ensemble", "D", "exponent_min", "exponent_max",
                          "inject_fault"},
                         "config");
  RunConfig c;
  try {
    internal::read(j, "command", c.command);
    internal::read(j, "measure", c.measure);
    internal::read(j, "family", c.family);
    internal::read(j, "theta", c.theta);
    internal::read(j, "p", c.p);
    internal::read(j, "metrics", c.metrics);
    internal::read(j, "epsilon", c.epsilon);
    internal::read(j, "delta_grid", c.delta_grid);
    internal::read(j, "output_dir", c.output_dir);
    internal::read(j, "seed", c.seed);
    internal::read(j, "D", c.D);
    internal::read_opt(j, "exponent_min", c.exponent_min);
    internal::read_opt(j, "exponent_max", c.exponent_max);
    internal::read(j, "inject_fault", c.inject_fault);
    if (j.contains("tolerances")) {
      const Json& t = j.at("tolerances");
      internal::reject_unknown(t, {"abs_tol", "rel_tol", "max_subdivisions", "tail_cutoff"}, "tolerances");
      internal::read(t, "abs_tol", c.tolerances.abs_tol);
      internal::read(t, "rel_tol", c.tolerances.rel_tol);
      internal::read(t, "max_subdivisions", c.tolerances.max_subdivisions);
      internal::read(t, "tail_cutoff", c.tolerances.tail_cutoff);
    }
    if (j.contains("ensemble")) {
      const Json& e = j.at("ensemble");
      internal::reject_unknown(e, {"needle_count", "deficit_scale", "bad_fraction", "c_threshold"}, "ensemble");
      internal::read(e, "needle_count", c.ensemble.needle_count);
      internal::read_opt(e, "deficit_scale", c.ensemble.deficit_scale);
      internal::read_opt(e, "bad_fraction", c.ensemble.bad_fraction);
      internal::read(e, "c_threshold", c.ensemble.c_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace internal {

inline void check_theta(double theta) {
  if (!(theta > 0 && theta < 1)) {
    std::ostringstream os;
    os << "theta out of range (0,1): " << theta;
    throw ConfigError(os.str());
  }
}

inline void check_common(const RunConfig& c) {
  check_theta(c.theta);
  try {
    c.tolerances.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

class Table {
 public:
  explicit Table(std::ostream& out) : out_(out) {}
  void title(const std::string& t) { out_ << t << '\n' << std::string(t.size(), '-') << '\n'; }
  static std::string short_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
  void row(const std::string& name, double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    row(name, os.str());
  }
  void row(const std::string& name, const std::string& v) { out_ << "  " << std::left << std::setw(28) << name << v << '\n'; }
  void check(const std::string& name, bool ok) { row(name, ok ? "PASS" : "FAIL"); }
  void blank() { out_ << '\n'; }

 private:
  std::ostream& out_;
};

inline std::filesystem::path out_path(const RunConfig& c, const std::string& file) {
  return std::filesystem::path(c.output_dir) / file;
}

inline MeasureFamily family_from(const std::string& text) {
  if (text == "example23") return example23_family();
  if (text == "gaussian") return gaussian_family();
  if (text.rfind("perturbed:", 0) == 0) {
    const auto spec = parse_measure(text);
    const auto& f = std::get<PerturbedGaussianFamily>(spec.family());
    return scaled_perturbation_family(f.breakpoints, f.slopes);
  }
  throw ConfigError("unknown sweep family '" + text + "' (expected example23, gaussian or perturbed:B;S)");
}

struct Band {
  double lo = -kInf;
  double hi = kInf;
};

inline std::optional<Band> default_band(const Metric& m) {
  if (m.kind == Metric::Kind::lp) return Band{1.0 / m.p - 0.05, 1.0 / m.p + 0.05};
  if (m.kind == Metric::Kind::w2) return Band{0.45, kInf};
  return std::nullopt;
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  internal::check_common(cfg);
  for (double p : cfg.p)
    if (!(p >= 1 && p <= kMaxLpExponent)) throw ConfigError("p must lie in [1, 64]");
  const Measure1D m = normalize(parse_measure(cfg.measure));
  const auto& qs = cfg.tolerances;

  Json report;
  report["config"] = to_json(cfg);
  Json inv = Json::object();
  internal::Table t(out);
  t.title("verify " + cfg.measure + " at theta = " + internal::Table::short_number(cfg.theta));
  int status = kExitOk;
  try {
    const CenteredMeasure cm = center(m, cfg.theta);
    const DeficitReport d = deficit(cm);
    report["deficit"] = to_json(d);
    t.row("a_theta", d.a_theta);
    t.row("shift", d.shift);
    t.row("profile", d.profile_at_theta);
    t.row("perimeter at a_theta", d.perimeter_at_a);
    t.row("deficit", d.deficit);
    inv["deficit_nonnegative"] = d.deficit >= -1e-12;

    const GapBoundReport gap = check_gap_bounds(cm);
    report["gap_bounds"] = to_json(gap);
    t.row("slope gap", gap.slope_gap);
    if (gap.equality_case) {
      t.row("gap linearity residual", gap.linearity_residual);
      inv["equality_case_affine"] = gap.lower_pass;
    } else {
      t.row("lower gap constant", gap.fitted_lower_constant);
      t.row("upper gap constant", gap.fitted_upper_constant);
    }

    Json lps = Json::array();
    std::vector<std::pair<double, double>> lp_values;
    for (double p : cfg.p) {
      const double v = lp_distance(cm.measure, p, qs);
      lps.push_back(Json{{"p", p}, {"lp", v}});
      lp_values.emplace_back(p, v);
      t.row("L^" + isolab::detail::format_number(p) + " distance", v);
    }
    report["lp"] = lps;
    std::sort(lp_values.begin(), lp_values.end());
    bool monotone = true;
    for (std::size_t i = 1; i < lp_values.size(); ++i)
      monotone = monotone && lp_values[i - 1].second <= lp_values[i].second + 1e-12;
    inv["lp_nondecreasing_in_p"] = monotone;

    const double w1 = w1_to_gaussian(cm.measure, qs);
    const double w2 = w2_to_gaussian(cm.measure, qs);
    const double ent = relative_entropy(cm.measure, qs);
    const TalagrandReport tal = talagrand_check(cm.measure, qs);
    const double dual = w1_dual_bound(cm, qs);
    report["w1"] = w1;
    report["w2"] = w2;
    report["entropy"] = ent;
    report["talagrand"] = isolab::to_json(tal);
    report["talagrand_pass"] = tal.pass;
    report["w1_dual_bound"] = dual;
    t.row("W1", w1);
    t.row("W2", w2);
    t.row("entropy", ent);
    t.row("W1 dual bound", dual);
    inv["talagrand"] = tal.pass;
    inv["w1_le_w2"] = w1 <= w2 + 1e-9;
    inv["w1_le_dual_bound"] = w1 <= dual + 1e-9;

    try {
      const MinimizerResult mr = brute_force_minimizer(m, cfg.theta);
      report["minimizer"] = Json{{"perimeter", mr.perimeter},
                                 {"components", mr.components},
                                 {"half_line", mr.is_half_line()},
                                 {"half_line_perimeter", mr.half_line_perimeter}};
      t.row("minimum perimeter", mr.perimeter);
      inv["minimum_at_least_profile"] = mr.perimeter >= d.profile_at_theta - 1e-6;
      inv["minimizer_is_half_line"] = mr.is_half_line();
    } catch (const std::invalid_argument& e) {
      report["minimizer"] = Json{{"skipped", e.what()}};
      t.row("minimum perimeter", "skipped (theta not on the 1e-3 mass grid)");
    }

    write_plot_data(internal::out_path(cfg, "gap_samples.dat"), gap.pointwise_samples);
  } catch (const ConvergenceError& e) {
    report["error"] = e.what();
    err << "numerical failure: " << e.what() << '\n';
    status = kExitNumeric;
  } catch (const NonIntegrableError& e) {
    report["error"] = e.what();
    err << "numerical failure: " << e.what() << '\n';
    status = kExitNumeric;
  }

  bool all = true;
  for (const auto& [name, ok] : inv.items()) {
    t.check(name, ok.get<bool>());
    all = all && ok.get<bool>();
  }
  report["invariants"] = inv;
  report["pass"] = all && status == kExitOk;
  write_json(internal::out_path(cfg, "verify.json"), report);
  if (status != kExitOk) return status;
  return all ? kExitOk : kExitInvariant;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  internal::check_common(cfg);
  if (cfg.delta_grid.empty()) throw ConfigError("delta grid is empty");
  if (cfg.metrics.empty()) throw ConfigError("no metrics requested");
  const MeasureFamily family = internal::family_from(cfg.family);
  std::vector<Metric> metrics;
  for (const auto& s : cfg.metrics) {
    try {
      metrics.push_back(Metric::parse(s));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (metrics.back().kind == Metric::Kind::mixture_l1) throw ConfigError("mixture_l1 is swept by the needles command");
  }

  Json summary{{"config", to_json(cfg)}, {"results", Json::array()}};
  internal::Table t(out);
  t.title("sweep " + cfg.family + " at theta = " + internal::Table::short_number(cfg.theta));
  bool all = true;
  for (const Metric& metric : metrics) {
    SweepResult r;
    try {
      r = sweep(family, cfg.theta, metric, cfg.delta_grid, cfg.tolerances);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    std::string tag = metric.name();
    for (char& c : tag)
      if (c == ':') c = '_';
    write_sweep_csv(internal::out_path(cfg, "sweep_" + tag + ".csv"), r);
    write_plot_data(internal::out_path(cfg, "sweep_" + tag + ".dat"), plot_points(r));

    Json j = isolab::to_json(r);
    std::optional<internal::Band> band = internal::default_band(metric);
    if (cfg.exponent_min || cfg.exponent_max)
      band = internal::Band{cfg.exponent_min.value_or(-kInf), cfg.exponent_max.value_or(kInf)};
    bool all_zero = !r.points.empty();
    for (const auto& p : r.points) all_zero = all_zero && p.value == 0.0;
    bool ok = true;
    if (r.fit) {
      ok = !band || (r.fit->alpha >= band->lo && r.fit->alpha <= band->hi);
      t.row(metric.name() + " exponent", r.fit->alpha);
      t.row(metric.name() + " r^2", r.fit->r_squared);
    } else {
      ok = all_zero;
      t.row(metric.name() + " exponent", all_zero ? "fit skipped (all values 0)" : "fit failed: " + r.fit_failure);
    }
    for (const auto& s : r.skipped) err << "skipped delta " << s.delta << ": " << s.reason << '\n';
    if (band) j["band"] = Json{{"lo", number(band->lo)}, {"hi", number(band->hi)}};
    j["pass"] = ok;
    t.check(metric.name() + " band", ok);
    all = all && ok;
    summary["results"].push_back(std::move(j));
  }
  summary["pass"] = all;
  write_json(internal::out_path(cfg, "sweep.json"), summary);
  return all ? kExitOk : kExitInvariant;
}

inline int cmd_needles(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  internal::check_common(cfg);
  if (cfg.delta_grid.empty()) throw ConfigError("delta grid is empty");
  std::vector<double> grid;
  try {
    grid = isolab::detail::checked_grid(cfg.delta_grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) throw ConfigError("epsilon out of range (0,1)");
  const double alpha = needle_rate_exponent(cfg.epsilon);

  std::vector<NeedleExperimentReport> reports;
  Json ensembles = Json::array();
  Json checks = Json::array();
  bool all = true;
  for (double delta : grid) {
    EnsembleConfig ec;
    ec.needle_count = cfg.ensemble.needle_count;
    ec.theta = cfg.theta;
    ec.epsilon = cfg.epsilon;
    ec.deficit_scale = cfg.ensemble.deficit_scale.value_or(delta);
    ec.bad_fraction = cfg.ensemble.bad_fraction.value_or(std::pow(delta, alpha));
    ec.seed = cfg.seed;
    ec.c_threshold = cfg.ensemble.c_threshold;
    NeedleEnsemble ens;
    try {
      ens = generate_ensemble(ec);
    } catch (const std::exception& e) {
      err << "ensemble generation failed at delta " << delta << ": " << e.what() << '\n';
      return kExitNumeric;
    }
    auto rep = theorem31_experiment(ens, delta, ec.c_threshold, cfg.tolerances);
    const double mass = mixture_mass(ens, cfg.tolerances);
    const double worst_needle = rep.max_needle_l1;
    const bool norm_ok = std::fabs(mass - 1.0) <= 1e-9;
    const bool trivial_ok = worst_needle <= 2.0 + 1e-12;
    const bool ok = norm_ok && trivial_ok && rep.fubini_pass && rep.markov_pass;
    all = all && ok;
    checks.push_back(Json{{"delta", delta},
                          {"mixture_mass", mass},
                          {"normalization", norm_ok},
                          {"fubini", rep.fubini_pass},
                          {"markov", rep.markov_pass},
                          {"trivial_bound", trivial_ok},
                          {"max_needle_l1", worst_needle}});
    ensembles.push_back(isolab::to_json(ens));
    reports.push_back(std::move(rep));
  }

  SweepResult sw;
  sw.family = "needle_ensemble";
  sw.metric = "mixture_l1";
  sw.theta = cfg.theta;
  for (const auto& r : reports) sw.points.push_back({r.delta, isolab::detail::floored(r.mixture_l1), std::nan(""), r.aggregate_deficit});
  isolab::detail::finish(sw);

  bool monotone = true;
  for (std::size_t i = 1; i < reports.size(); ++i)
    monotone = monotone && reports[i].mixture_l1 <= reports[i - 1].mixture_l1 + 1e-8;
  all = all && monotone;

  internal::Table t(out);
  t.title("needles: " + std::to_string(cfg.ensemble.needle_count) + " needles, epsilon = " +
          internal::Table::short_number(cfg.epsilon));
  for (const auto& r : reports) {
    std::ostringstream os;
    os << std::setprecision(6) << "mixture_l1 " << r.mixture_l1 << "  good " << r.good_mass << "  centered "
       << r.centered_mass << (r.fully_bad ? "  (fully bad)" : "");
    t.row("delta " + isolab::detail::format_number(r.delta), os.str());
    for (const auto& v : r.precondition_violations) err << "delta " << r.delta << ": precondition: " << v << '\n';
  }
  t.row("rate exponent", alpha);
  if (sw.fit)
    t.row("fitted exponent", sw.fit->alpha);
  else
    t.row("fitted exponent", "n/a");
  t.check("normalization/fubini/markov/trivial", std::all_of(checks.begin(), checks.end(), [](const Json& c) {
            return c["normalization"].get<bool>() && c["fubini"].get<bool>() && c["markov"].get<bool>() &&
                   c["trivial_bound"].get<bool>();
          }));
  t.check("mixture_l1 nonincreasing as delta shrinks", monotone);

  Json summary{{"config", to_json(cfg)}, {"rate_bound_exponent", alpha}};
  summary["fitted_exponent"] = sw.fit ? Json(sw.fit->alpha) : Json(nullptr);
  Json reps = Json::array();
  for (const auto& r : reports) reps.push_back(isolab::to_json(r));
  summary["reports"] = std::move(reps);
  summary["checks"] = std::move(checks);
  summary["monotone"] = monotone;
  summary["pass"] = all;
  write_json(internal::out_path(cfg, "needles.json"), summary);
  write_json(internal::out_path(cfg, "ensembles.json"), ensembles);
  write_needles_csv(internal::out_path(cfg, "needles.csv"), reports, sw.fit ? std::optional(*sw.fit) : std::nullopt);
  write_plot_data(internal::out_path(cfg, "needles.dat"), plot_points(sw));
  return all ? kExitOk : kExitInvariant;
}

inline int cmd_example23(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  if (!(cfg.D > 0)) throw ConfigError("D must be positive");
  for (double p : cfg.p)
    if (!(p >= 1 && p <= kMaxLpExponent)) throw ConfigError("p must lie in [1, 64]");
  const auto ex = example23(cfg.D);
  const auto& qs = cfg.tolerances;
  constexpr double kTol = 1e-8;

  Json rows = Json::array();
  internal::Table t(out);
  t.title("truncated Gaussian on (-D, D), D = " + internal::Table::short_number(cfg.D) + ", theta = 0.5");
  t.row("delta_E", ex.family.delta_e);
  bool all = true;
  auto compare = [&](const std::string& name, double got, double want) {
    const bool ok = std::fabs(got - want) <= kTol;
    all = all && ok;
    rows.push_back(Json{{"quantity", name}, {"computed", got}, {"closed_form", want}, {"pass", ok}});
    std::ostringstream os;
    os << std::setprecision(12) << got << "  (closed form " << want << ")  " << (ok ? "PASS" : "FAIL");
    t.row(name, os.str());
  };
  compare("deficit", deficit(ex.measure, 0.5).deficit, ex.family.deficit());
  for (double p : cfg.p) compare("L^" + isolab::detail::format_number(p), lp_distance(ex.measure, p, qs), ex.family.lp(p));
  compare("entropy", relative_entropy(ex.measure, qs), ex.family.entropy());
  const TalagrandReport tal = talagrand_check(ex.measure, qs);
  t.row("W2", std::sqrt(tal.lhs));
  t.check("talagrand", tal.pass);
  all = all && tal.pass;

  Json report{{"config", to_json(cfg)}, {"D", number(cfg.D)}, {"delta_E", ex.family.delta_e}, {"rows", rows}};
  report["w2"] = std::sqrt(tal.lhs);
  report["talagrand"] = isolab::to_json(tal);
  report["pass"] = all;
  write_json(internal::out_path(cfg, "example23.json"), report);
  return all ? kExitOk : kExitInvariant;
}

inline int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream& /*err*/) {
  SpecialFunctionTable table;
  try {
    table = faulty_table(cfg.inject_fault);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto checks = run_selftest(table);
  Json rows = Json::array();
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.module << '/' << c.operation << ": " << c.description;
    if (!c.passed) out << " -- " << c.detail;
    out << '\n';
    failed += c.passed ? 0 : 1;
    rows.push_back(Json{{"module", c.module},
                        {"operation", c.operation},
                        {"description", c.description},
                        {"pass", c.passed},
                        {"detail", c.detail}});
  }
  out << checks.size() - failed << '/' << checks.size() << " checks passed\n";
  Json report{{"checks", rows}, {"failed", failed}, {"pass", failed == 0}};
  write_json(internal::out_path(cfg, "selftest.json"), report);
  return failed == 0 ? kExitOk : kExitInvariant;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "needles") return cmd_needles(cfg, out, err);
    if (cfg.command == "example23") return cmd_example23(cfg, out, err);
    if (cfg.command == "selftest") return cmd_selftest(cfg, out, err);
    err << "unknown command '" << cfg.command << "'\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvexityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline std::vector<double> parse_real_list(const std::string& s) {
  try {
    return isolab::detail::parse_list(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Parses argv, merges flags over --config, and runs the command.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Gaussian isoperimetric stability lab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path, measure, family, p_list, metrics, grid, outdir, fault;
  double theta = 0, epsilon = 0, tol_abs = 0, tol_rel = 0, D = 0, deficit_scale = 0, bad_fraction = 0,
         c_threshold = 0;
  std::uint64_t seed = 0;
  int needle_count = 0;

  std::vector<CLI::App*> subs;
  for (const char* name : {"verify", "sweep", "needles", "example23", "selftest"}) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "JSON run configuration; flags override it");
    s->add_option("--out", outdir, "output directory");
    s->add_option("--tol-abs", tol_abs, "quadrature absolute tolerance");
    s->add_option("--tol-rel", tol_rel, "quadrature relative tolerance");
    s->add_option("--theta", theta, "mass fraction in (0,1)");
    s->add_option("--p", p_list, "comma-separated L^p exponents");
    s->add_option("--epsilon", epsilon, "epsilon in (0,1)");
    s->add_option("--delta-grid", grid, "comma-separated deficits");
    s->add_option("--seed", seed, "generator seed");
    s->add_option("--measure", measure, "gaussian | truncated:D | truncated:LO,HI | perturbed:B..;S.. | tabulated:PATH");
    s->add_option("--family", family, "sweep family: example23 | gaussian | perturbed:B..;S..");
    s->add_option("--metric", metrics, "comma-separated metrics: lp:P, w1, w2, entropy");
    s->add_option("--D", D, "half-width of the truncation");
    s->add_option("--needles", needle_count, "needles per ensemble");
    s->add_option("--deficit-scale", deficit_scale, "fixed aggregate deficit (default: delta)");
    s->add_option("--bad-fraction", bad_fraction, "fixed bad mass (default: delta^((1-eps)/(9-3eps)))");
    s->add_option("--c-threshold", c_threshold, "constant of the centering test");
    s->add_option("--inject-fault", fault, "selftest: corrupt erf | gaussian_cdf | gaussian_quantile");
    subs.push_back(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* used = nullptr;
  for (CLI::App* s : subs)
    if (s->parsed()) used = s;
  auto given = [&](const char* flag) { return used->count(flag) > 0; };

  try {
    RunConfig cfg = given("--config") ? load_config(config_path) : RunConfig{};
    cfg.command = used->get_name();
    if (given("--out")) cfg.output_dir = outdir;
    if (given("--tol-abs")) cfg.tolerances.abs_tol = tol_abs;
    if (given("--tol-rel")) cfg.tolerances.rel_tol = tol_rel;
    if (given("--theta")) cfg.theta = theta;
    if (given("--p")) cfg.p = parse_real_list(p_list);
    if (given("--epsilon")) cfg.epsilon = epsilon;
    if (given("--delta-grid")) cfg.delta_grid = parse_real_list(grid);
    if (given("--seed")) cfg.seed = seed;
    if (given("--measure")) cfg.measure = measure;
    if (given("--family")) cfg.family = family;
    if (given("--metric")) {
      cfg.metrics.clear();
      std::stringstream ss(metrics);
      for (std::string m; std::getline(ss, m, ',');) cfg.metrics.push_back(m);
    }
    if (given("--D")) cfg.D = D;
    if (given("--needles")) cfg.ensemble.needle_count = needle_count;
    if (given("--deficit-scale")) cfg.ensemble.deficit_scale = deficit_scale;
    if (given("--bad-fraction")) cfg.ensemble.bad_fraction = bad_fraction;
    if (given("--c-threshold")) cfg.ensemble.c_threshold = c_threshold;
    if (given("--inject-fault")) cfg.inject_fault = fault;
    return dispatch(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace isolab::cli
