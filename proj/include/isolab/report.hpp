#pragma once

/**
 * @file report.hpp
 * @brief Text forms of measures and results: the measure mini-language,
 * JSON reports with fixed key order, CSV tables and two-column plot data.
 */

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isolab/measure1d.hpp"
#include "isolab/needles.hpp"
#include "isolab/rates.hpp"
#include "isolab/stability.hpp"

namespace isolab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Measure mini-language
//
//   gaussian
//   truncated:D                (-D, D)
//   truncated:LO,HI            either end may be -inf / inf
//   perturbed:B1,B2;S0,S1,S2   x²/2 + g, g(0) = 0, slopes S between breakpoints B
//   perturbed:;S0              single slope (no breakpoints)
//   tabulated:PATH             CSV of x,value rows (value = potential up to a constant)
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_number(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.find_first_not_of(" \t") == std::string::npos) return out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number(item));
  return out;
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

}  // namespace detail

inline PotentialSpec parse_measure(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "gaussian" && colon == std::string::npos) return PotentialSpec::gaussian();
  if (head == "truncated") {
    const auto v = detail::parse_list(rest);
    if (v.size() == 1) return PotentialSpec::truncated_gaussian(v[0]);
    if (v.size() == 2) return PotentialSpec::truncated_gaussian(Interval(v[0], v[1]));
    throw std::invalid_argument("truncated needs D or LO,HI");
  }
  if (head == "perturbed") {
    const auto semi = rest.find(';');
    if (semi == std::string::npos) throw std::invalid_argument("perturbed needs BREAKPOINTS;SLOPES");
    return PotentialSpec::perturbed_gaussian(detail::parse_list(rest.substr(0, semi)),
                                             detail::parse_list(rest.substr(semi + 1)));
  }
  if (head == "tabulated" && !rest.empty()) return load_tabulated_csv(rest);
  throw std::invalid_argument("unknown measure '" + text + "'");
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// JSON has no infinities; they are written as the strings "inf" / "-inf".
inline Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

inline double number_from(const Json& j) {
  if (j.is_string()) return detail::parse_number(j.get<std::string>());
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

inline Json to_json(const Interval& i) { return Json{{"lo", number(i.lo)}, {"hi", number(i.hi)}}; }

inline Json to_json(const PotentialSpec& spec) {
  Json j;
  j["family"] = spec.tag();
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, TruncatedGaussianFamily>) {
          j["support"] = to_json(f.support);
        } else if constexpr (std::is_same_v<F, PerturbedGaussianFamily>) {
          j["breakpoints"] = f.breakpoints;
          j["slopes"] = f.slopes;
          j["support"] = to_json(f.support);
        } else if constexpr (std::is_same_v<F, TabulatedConvexFamily>) {
          j["x"] = f.x;
          j["value"] = f.value;
        }
      },
      spec.family());
  j["shift"] = spec.shift();
  j["offset"] = spec.offset();
  return j;
}

inline Interval interval_from_json(const Json& j) { return {number_from(j.at("lo")), number_from(j.at("hi"))}; }

inline PotentialSpec spec_from_json(const Json& j) {
  const std::string fam = j.at("family").get<std::string>();
  PotentialSpec base = PotentialSpec::gaussian();
  if (fam == "gaussian") {
  } else if (fam == "truncated_gaussian") {
    base = PotentialSpec::truncated_gaussian(interval_from_json(j.at("support")));
  } else if (fam == "perturbed_gaussian") {
    base = PotentialSpec::perturbed_gaussian(j.at("breakpoints").get<std::vector<double>>(),
                                             j.at("slopes").get<std::vector<double>>(),
                                             interval_from_json(j.at("support")));
  } else if (fam == "tabulated") {
    base = PotentialSpec::tabulated(j.at("x").get<std::vector<double>>(), j.at("value").get<std::vector<double>>());
  } else {
    throw std::invalid_argument("unknown potential family '" + fam + "'");
  }
  return PotentialSpec(base.family(), j.value("shift", 0.0), j.value("offset", 0.0));
}

inline Json to_json(const QuadratureSettings& s) {
  return Json{{"abs_tol", s.abs_tol},
              {"rel_tol", s.rel_tol},
              {"max_subdivisions", s.max_subdivisions},
              {"tail_cutoff", s.tail_cutoff}};
}

inline Json to_json(const DeficitReport& r) {
  return Json{{"theta", r.theta},
              {"a_theta", r.a_theta},
              {"shift", r.shift},
              {"perimeter_at_a", r.perimeter_at_a},
              {"profile_at_theta", r.profile_at_theta},
              {"deficit", r.deficit}};
}

inline Json to_json(const GapBoundReport& r) {
  return Json{{"deficit", r.deficit},
              {"slope_gap", r.slope_gap},
              {"window", to_json(r.window)},
              {"fitted_lower_constant", r.fitted_lower_constant},
              {"fitted_upper_constant", r.fitted_upper_constant},
              {"sample_count", r.pointwise_samples.size()},
              {"equality_case", r.equality_case},
              {"linearity_residual", r.linearity_residual},
              {"lower_pass", r.lower_pass},
              {"upper_pass", r.upper_pass}};
}

inline Json to_json(const TalagrandReport& r) { return Json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"pass", r.pass}}; }

inline Json to_json(const ClassificationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"good_mass", opt(r.good_mass)},
              {"centered_mass", opt(r.centered_mass)},
              {"good_and_centered_mass", opt(r.good_and_centered_mass)},
              {"aggregate_deficit", r.aggregate_deficit},
              {"threshold_used", r.threshold_used},
              {"markov_checked", r.markov_checked},
              {"markov_pass", r.markov_pass},
              {"warnings", r.warnings}};
}

inline Json to_json(const NeedleExperimentReport& r) {
  return Json{{"delta", r.delta},
              {"epsilon", r.epsilon},
              {"mixture_l1", r.mixture_l1},
              {"needlewise_sum", r.needlewise_sum},
              {"max_needle_l1", r.max_needle_l1},
              {"rate_bound_exponent", r.rate_bound_exponent},
              {"implied_constant", r.implied_constant},
              {"good_mass", r.good_mass},
              {"centered_mass", r.centered_mass},
              {"good_and_centered_mass", r.good_and_centered_mass},
              {"bad_mass", r.bad_mass},
              {"aggregate_deficit", r.aggregate_deficit},
              {"decomposition_bound", r.decomposition_bound},
              {"decomposition_pass", r.decomposition_pass},
              {"fubini_pass", r.fubini_pass},
              {"markov_pass", r.markov_pass},
              {"fully_bad", r.fully_bad},
              {"precondition_violations", r.precondition_violations}};
}

inline Json to_json(const SweepResult& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back(Json{{"delta", p.delta},
                       {"value", p.value},
                       {"parameter", number(p.parameter)},
                       {"achieved_deficit", p.achieved_deficit}});
  Json skipped = Json::array();
  for (const auto& s : r.skipped) skipped.push_back(Json{{"delta", s.delta}, {"reason", s.reason}});
  Json j{{"family", r.family}, {"metric", r.metric}, {"theta", r.theta}};
  if (r.fit) {
    j["alpha"] = r.fit->alpha;
    j["c"] = std::exp(r.fit->log_c);
    j["log_c"] = r.fit->log_c;
    j["r_squared"] = r.fit->r_squared;
  } else {
    j["alpha"] = nullptr;
    j["fit_failure"] = r.fit_failure;
  }
  j["points"] = std::move(pts);
  j["skipped"] = std::move(skipped);
  return j;
}

inline Json to_json(const Needle& n) {
  return Json{{"weight", n.weight}, {"r_minus", n.r_minus}, {"r_plus", n.r_plus}, {"potential", to_json(n.measure.spec())}};
}

inline Json to_json(const NeedleEnsemble& e) {
  Json needles = Json::array();
  for (const auto& n : e.needles) needles.push_back(to_json(n));
  return Json{{"theta", e.theta}, {"epsilon", e.epsilon}, {"seed", e.seed}, {"needles", std::move(needles)}};
}

inline NeedleEnsemble ensemble_from_json(const Json& j) {
  NeedleEnsemble e;
  e.theta = j.at("theta").get<double>();
  e.epsilon = j.at("epsilon").get<double>();
  e.seed = j.value("seed", std::uint64_t{0});
  for (const auto& n : j.at("needles"))
    e.needles.push_back(make_needle(n.at("weight").get<double>(), Measure1D(spec_from_json(n.at("potential"))), e.theta));
  e.validate();
  return e;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

/// CSV with header "delta,value".
inline void write_sweep_csv(const std::filesystem::path& path, const SweepResult& r) {
  auto out = detail::open_out(path);
  out << "delta,value\n";
  for (const auto& p : r.points) out << p.delta << ',' << p.value << '\n';
}

/// CSV with header "delta,epsilon,mixture_l1,good_mass,centered_mass,fitted_exponent".
inline void write_needles_csv(const std::filesystem::path& path, const std::vector<NeedleExperimentReport>& reports,
                              const std::optional<PowerLawFit>& fit) {
  auto out = detail::open_out(path);
  out << "delta,epsilon,mixture_l1,good_mass,centered_mass,fitted_exponent\n";
  for (const auto& r : reports) {
    out << r.delta << ',' << r.epsilon << ',' << r.mixture_l1 << ',' << r.good_mass << ',' << r.centered_mass << ',';
    if (fit) out << fit->alpha;
    out << '\n';
  }
}

/// Whitespace-separated "x y" rows, one per point.
inline void write_plot_data(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& xy) {
  auto out = detail::open_out(path);
  for (const auto& [x, y] : xy) out << x << ' ' << y << '\n';
}

inline std::vector<std::pair<double, double>> plot_points(const SweepResult& r) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : r.points) xy.emplace_back(p.delta, p.value);
  return xy;
}

}  // namespace isolab
