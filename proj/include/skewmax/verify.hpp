#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "skewmax/checks.hpp"
#include "skewmax/field_io.hpp"
#include "skewmax/projection.hpp"

namespace skewmax {

inline const std::vector<std::string> &suite_check_names() {
  static const std::vector<std::string> names{"field",      "mollify",    "flow",  "dual",    "existence",
                                              "closeness",  "satellites", "cover", "maximal", "convergence"};
  return names;
}

/// Everything a verification run depends on. Zero values in the size-like
/// fields select the dimension-dependent defaults noted beside them.
struct ExperimentSpec {
  // [field]
  std::string field = "taylor-green";
  std::vector<double> params;
  int dimension = 2;
  double period = 1.0;
  double t_start = 0.0;
  double t_end = 1.0;
  std::string field_file;  // gridded CSV; overrides the catalog field
  bool project = false;    // project the gridded samples onto divergence-free fields

  // [run]
  std::uint64_t seed = 1;
  int workers = 1;
  double eta = 0.01;
  double eta0_candidate = 0.01;
  bool escalation = false;
  std::vector<std::string> suite = suite_check_names();

  // [grid]
  int cells = 128;  // maximal-operator spacing L / cells; the second resolution halves it
  int time_samples = 16;
  std::vector<int> resolutions{2, 4, 6};
  int hl_cells = 128;
  int hl_time_samples = 33;
  int convergence_cells = 32;
  int convergence_time_samples = 32;
  double convergence_eps_start = 0.0;  // 0: min(0.2, L/8)
  int convergence_steps = 5;

  // [quadrature]
  int mollifier_nodes = 0;  // 0: 64, 512, 4096 for d = 1, 2, 3
  int cylinder_time = 16;
  int cylinder_ball = 0;  // 0: 64 d
  int step_budget = kDefaultStepBudget;
  int probes = 64;
  MollifyRoute route = MollifyRoute::automatic;

  // [monte_carlo]
  std::size_t dual_samples = 65536;
  std::size_t union_samples = 131072;
  std::size_t volume_samples = 4096;

  // [sizes]
  int field_points = 1000;
  int gradient_configs = 500;
  int flow_configs = 50;
  int volume_configs = 4;
  int dual_configs = 10;
  int existence_points = 200;
  int closeness_configs = 200;
  int satellite_anchors = 5;
  int satellites = 20;
  int cover_family = 200;
  int lambdas = 10;

  // [commands] inputs of the single-pipeline subcommands
  std::vector<double> eps_list{0.05, 0.1};  // mollify, flow
  std::vector<double> times{0.5};           // mollify slices
  int slice_cells = 64;
  int flow_points = 4;  // seeds per axis
  double flow_t_start = 0.5;
  double flow_t_end = 0.6;
  int flow_samples = 65;
  std::string function = "box";  // box, bump, two-box, constant, wave
  std::string family_file;       // cover: cylinder CSV; empty draws a random admissible family

  bool runs(const std::string &check) const { return std::find(suite.begin(), suite.end(), check) != suite.end(); }

  void validate() const {
    require(dimension >= 1 && dimension <= 3, "dimension must be 1, 2 or 3");
    require(period > 0.0 && t_start < t_end, "domain needs L > 0 and S < T");
    require(eta > 0.0 && eta0_candidate > 0.0, "eta must be positive");
    require(workers >= 1, "workers must be at least 1");
    require(cells >= 16 && hl_cells >= 8 && convergence_cells >= 8, "grid cell counts are too small");
    require(time_samples >= 1 && hl_time_samples >= 2 && convergence_time_samples >= 1, "time samples must be positive");
    require(!resolutions.empty(), "existence sweep needs at least one resolution");
    for (int r : resolutions) require(r >= 0, "resolutions must be non-negative");
    require(mollifier_nodes == 0 || mollifier_nodes >= 32 * dimension, "mollifier needs at least 32 d nodes");
    require(cylinder_time >= 8, "cylinder quadrature needs at least 8 time slices");
    require(cylinder_ball == 0 || cylinder_ball >= 32, "cylinder quadrature needs at least 32 ball nodes");
    require(step_budget >= 64, "step budget must be at least 64");
    require(probes >= 16, "probe count must be at least 16");
    require(dual_samples >= 4096 && union_samples >= 65536 && volume_samples >= 256, "Monte Carlo sizes are too small");
    require(convergence_steps >= 2 && lambdas >= 2, "sweeps need at least two steps");
    require(!eps_list.empty() && !times.empty(), "commands need eps and time lists");
    for (double e : eps_list) require(e > 0.0 && e <= period / 8.0, "command eps must lie in (0, L/8]");
    require(slice_cells >= 4 && flow_points >= 1 && flow_samples >= 2, "command sizes are too small");
    for (const auto &s : suite)
      require(std::find(suite_check_names().begin(), suite_check_names().end(), s) != suite_check_names().end(),
              "unknown check '" + s + "' in suite");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <class T>
std::vector<T> parse_list(const std::string &text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      std::istringstream is(item);
      T v{};
      is >> v;
      require(!is.fail() && is.eof(), "cannot parse list entry '" + item + "'");
      out.push_back(v);
    }
  }
  return out;
}

template <class T>
std::string join(const std::vector<T> &v) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

/// Reads `key = value` lines grouped under [field], [run], [grid],
/// [quadrature], [monte_carlo], [sizes] and [commands]. Unknown keys are rejected.
inline ExperimentSpec parse_experiment(std::istream &in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw io_error(std::string("config: ") + e.what());
  }
  ExperimentSpec s;
  std::vector<std::string> seen;
  auto get = [&](const std::string &sec, const std::string &key, auto &dst) {
    seen.push_back(sec + "." + key);
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(sec + "." + key, '.'));
    if (!v) return;
    using T = std::decay_t<decltype(dst)>;
    const std::string text = detail::trim(*v);
    if constexpr (std::is_same_v<T, std::string>) {
      dst = text;
    } else if constexpr (std::is_same_v<T, bool>) {
      require(text == "true" || text == "false", "config " + sec + "." + key + " must be true or false");
      dst = text == "true";
    } else if constexpr (std::is_same_v<T, MollifyRoute>) {
      dst = parse_route(text);
    } else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>> ||
                         std::is_same_v<T, std::vector<std::string>>) {
      dst = detail::parse_list<typename T::value_type>(text);
    } else {
      std::istringstream is(text);
      is >> dst;
      require(!is.fail() && is.eof(), "config " + sec + "." + key + " has a malformed value '" + text + "'");
    }
  };
  get("field", "name", s.field);
  get("field", "params", s.params);
  get("field", "dimension", s.dimension);
  get("field", "period", s.period);
  get("field", "t_start", s.t_start);
  get("field", "t_end", s.t_end);
  get("field", "file", s.field_file);
  get("field", "project", s.project);
  get("run", "seed", s.seed);
  get("run", "workers", s.workers);
  get("run", "eta", s.eta);
  get("run", "eta0_candidate", s.eta0_candidate);
  get("run", "escalation", s.escalation);
  get("run", "suite", s.suite);
  get("grid", "cells", s.cells);
  get("grid", "time_samples", s.time_samples);
  get("grid", "resolutions", s.resolutions);
  get("grid", "hl_cells", s.hl_cells);
  get("grid", "hl_time_samples", s.hl_time_samples);
  get("grid", "convergence_cells", s.convergence_cells);
  get("grid", "convergence_time_samples", s.convergence_time_samples);
  get("grid", "convergence_eps_start", s.convergence_eps_start);
  get("grid", "convergence_steps", s.convergence_steps);
  get("quadrature", "mollifier_nodes", s.mollifier_nodes);
  get("quadrature", "cylinder_time", s.cylinder_time);
  get("quadrature", "cylinder_ball", s.cylinder_ball);
  get("quadrature", "step_budget", s.step_budget);
  get("quadrature", "probes", s.probes);
  get("quadrature", "route", s.route);
  get("monte_carlo", "dual_samples", s.dual_samples);
  get("monte_carlo", "union_samples", s.union_samples);
  get("monte_carlo", "volume_samples", s.volume_samples);
  get("sizes", "field_points", s.field_points);
  get("sizes", "gradient_configs", s.gradient_configs);
  get("sizes", "flow_configs", s.flow_configs);
  get("sizes", "volume_configs", s.volume_configs);
  get("sizes", "dual_configs", s.dual_configs);
  get("sizes", "existence_points", s.existence_points);
  get("sizes", "closeness_configs", s.closeness_configs);
  get("sizes", "satellite_anchors", s.satellite_anchors);
  get("sizes", "satellites", s.satellites);
  get("sizes", "cover_family", s.cover_family);
  get("sizes", "lambdas", s.lambdas);
  get("commands", "eps", s.eps_list);
  get("commands", "times", s.times);
  get("commands", "slice_cells", s.slice_cells);
  get("commands", "flow_points", s.flow_points);
  get("commands", "flow_t_start", s.flow_t_start);
  get("commands", "flow_t_end", s.flow_t_end);
  get("commands", "flow_samples", s.flow_samples);
  get("commands", "function", s.function);
  get("commands", "family_file", s.family_file);
  for (const auto &[sec, body] : tree) {
    require(!body.empty() || body.data().empty(), "config key '" + sec + "' must sit inside a section");
    for (const auto &[key, _] : body)
      require(std::find(seen.begin(), seen.end(), sec + "." + key) != seen.end(),
              "unknown config key " + sec + "." + key);
  }
  s.validate();
  return s;
}

inline ExperimentSpec load_experiment(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config '" + path + "'");
  return parse_experiment(in);
}

/// An ExperimentSpec as a config file that parses back to the same values.
inline void write_experiment(std::ostream &out, const ExperimentSpec &s) {
  out << std::setprecision(12) << std::boolalpha;
  out << "[field]\nname = " << s.field << "\nparams = " << detail::join(s.params) << "\ndimension = " << s.dimension
      << "\nperiod = " << s.period << "\nt_start = " << s.t_start << "\nt_end = " << s.t_end
      << "\nfile = " << s.field_file << "\nproject = " << s.project << "\n\n";
  out << "[run]\nseed = " << s.seed << "\nworkers = " << s.workers << "\neta = " << s.eta
      << "\neta0_candidate = " << s.eta0_candidate << "\nescalation = " << s.escalation
      << "\nsuite = " << detail::join(s.suite) << "\n\n";
  out << "[grid]\ncells = " << s.cells << "\ntime_samples = " << s.time_samples
      << "\nresolutions = " << detail::join(s.resolutions) << "\nhl_cells = " << s.hl_cells
      << "\nhl_time_samples = " << s.hl_time_samples << "\nconvergence_cells = " << s.convergence_cells
      << "\nconvergence_time_samples = " << s.convergence_time_samples
      << "\nconvergence_eps_start = " << s.convergence_eps_start << "\nconvergence_steps = " << s.convergence_steps
      << "\n\n";
  out << "[quadrature]\nmollifier_nodes = " << s.mollifier_nodes << "\ncylinder_time = " << s.cylinder_time
      << "\ncylinder_ball = " << s.cylinder_ball << "\nstep_budget = " << s.step_budget << "\nprobes = " << s.probes
      << "\nroute = " << route_name(s.route) << "\n\n";
  out << "[monte_carlo]\ndual_samples = " << s.dual_samples << "\nunion_samples = " << s.union_samples
      << "\nvolume_samples = " << s.volume_samples << "\n\n";
  out << "[sizes]\nfield_points = " << s.field_points << "\ngradient_configs = " << s.gradient_configs
      << "\nflow_configs = " << s.flow_configs << "\nvolume_configs = " << s.volume_configs
      << "\ndual_configs = " << s.dual_configs << "\nexistence_points = " << s.existence_points
      << "\ncloseness_configs = " << s.closeness_configs << "\nsatellite_anchors = " << s.satellite_anchors
      << "\nsatellites = " << s.satellites << "\ncover_family = " << s.cover_family << "\nlambdas = " << s.lambdas
      << "\n\n";
  out << "[commands]\neps = " << detail::join(s.eps_list) << "\ntimes = " << detail::join(s.times)
      << "\nslice_cells = " << s.slice_cells << "\nflow_points = " << s.flow_points
      << "\nflow_t_start = " << s.flow_t_start << "\nflow_t_end = " << s.flow_t_end
      << "\nflow_samples = " << s.flow_samples << "\nfunction = " << s.function
      << "\nfamily_file = " << s.family_file << '\n';
}

struct Timing {
  std::string check;
  double seconds;
};

struct VerifyReport {
  std::string field;
  int dimension = 0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::vector<Timing> timings;  // kept apart from the report text, which must be reproducible

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return !c.mandatory || c.passed; });
  }
  const CheckResult *find(const std::string &name) const {
    for (const auto &c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Field named by an ExperimentSpec: a gridded file when given, else a catalog field.
template <int D>
VelocityField<D> field_from_spec(const ExperimentSpec &s) {
  if (!s.field_file.empty()) {
    auto samples = load_gridded<D>(s.field_file);
    return s.project ? project_divergence_free<D>(std::move(samples)) : VelocityField<D>(GriddedField<D>(std::move(samples)));
  }
  Domain<D> dom{s.period, s.t_start, s.t_end};
  dom.validate();
  return make_analytic_field<D>(s.field, s.params, dom);
}

inline const std::vector<double> &escalation_etas() {
  static const std::vector<double> etas{0.001, 0.01, 0.1, 1.0};
  return etas;
}

namespace detail {

inline bool stable_within(double a, double b, double rel) {
  return std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Runs the selected checks in a fixed order. A precondition violation
/// inside a check aborts the run with the check's name prefixed.
template <int D>
VerifyReport run_suite(const ExperimentSpec &spec) {
  spec.validate();
  require(spec.dimension == D, "spec dimension does not match the instantiation");
  VerifyReport rep;
  const auto field = field_from_spec<D>(spec);
  const auto &dom = field.domain();
  const double L = dom.period;
  rep.field = field.describe();
  rep.dimension = D;
  rep.eta = spec.eta;
  rep.seed = spec.seed;
  const auto m = make_mollifier<D>(spec.mollifier_nodes > 0 ? spec.mollifier_nodes : default_mollifier_nodes<D>());
  const int workers = spec.workers;
  const std::uint64_t seed = spec.seed;
  SweepOptions opt{spec.cylinder_time, spec.cylinder_ball, spec.step_budget, spec.route, workers};

  std::optional<HLMaximalField<D>> hl_store;
  auto hl = [&]() -> const HLMaximalField<D> & {
    if (!hl_store) hl_store.emplace(field, spec.hl_cells, spec.hl_time_samples);
    return *hl_store;
  };
  auto sampler = [&](double eta) {
    AdmissibleSampler<D> smp{field, m, hl(), eta};
    smp.step_budget = spec.step_budget;
    smp.route = spec.route;
    return smp;
  };
  const double eps_lo = 0.004 * L, eps_hi = 0.05 * L, eps_cover = 0.03 * L;

  auto run = [&](const std::string &name, auto &&body) {
    if (!spec.runs(name)) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const precondition_error &e) {
      throw precondition_error("check " + name + ": " + e.what());
    }
    rep.timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  };

  run("field", [&] { rep.checks.push_back(check_field_invariants(field, spec.field_points, seed)); });
  run("mollify", [&] { rep.checks.push_back(check_gradient_estimates(field, m, spec.gradient_configs, seed)); });
  run("flow", [&] {
    rep.checks.push_back(check_flow(field, m, spec.flow_configs, spec.volume_configs, spec.volume_samples, seed,
                                    spec.step_budget, workers));
  });
  run("dual", [&] {
    rep.checks.push_back(
        check_dual_measure(field, m, spec.dual_configs, spec.dual_samples, 0.02 * L, 0.125 * L, seed, workers));
  });
  run("existence", [&] {
    rep.checks.push_back(
        check_existence(field, m, spec.eta, spec.resolutions, hl(), spec.existence_points, seed, workers));
  });
  run("closeness", [&] {
    auto r = check_closeness(sampler(spec.eta), spec.closeness_configs, 33, seed, eps_lo, eps_hi);
    if (spec.eta > spec.eta0_candidate) {
      r.mandatory = false;
      r.note = "eta above the configured eta0 candidate; informational";
    }
    rep.checks.push_back(std::move(r));
    if (spec.escalation || spec.eta > spec.eta0_candidate) {
      CheckResult esc("eta_escalation");
      esc.mandatory = false;
      auto ladder = escalation_etas();
      if (std::find(ladder.begin(), ladder.end(), spec.eta) == ladder.end()) ladder.push_back(spec.eta);
      std::sort(ladder.begin(), ladder.end());
      double first_fail = 0.0;
      for (double eta : ladder) {
        const auto s = closeness_sweep(sampler(eta), spec.closeness_configs, 33, seed, eps_lo, eps_hi);
        std::ostringstream tag;
        tag << eta;
        esc.add("worst_streamline_ratio_eta_" + tag.str(), s.worst_own);
        esc.add("worst_two_radius_ratio_eta_" + tag.str(), s.worst_cross);
        esc.add("worst_ball_inclusion_ratio_eta_" + tag.str(), s.worst_prop);
        esc.add("configs_eta_" + tag.str(), static_cast<double>(s.configs));
        const bool failed = s.own_violations + s.cross_violations + s.prop_violations + s.claim_violations > 0;
        if (failed && first_fail == 0.0) first_fail = eta;
      }
      esc.add("first_failing_eta", first_fail);
      if (first_fail == 0.0) esc.note = "no violation on the ladder";
      rep.checks.push_back(std::move(esc));
    }
  });
  run("satellites", [&] {
    rep.checks.push_back(check_satellites(sampler(spec.eta), spec.satellite_anchors, spec.satellites, spec.probes,
                                          spec.union_samples, seed, eps_lo, eps_cover, workers));
  });
  run("cover", [&] {
    const auto fam = random_admissible_family(sampler(spec.eta), spec.cover_family, eps_lo, eps_cover, seed);
    auto r = check_cover(fam, spec.probes, spec.union_samples, seed, workers);
    if (static_cast<int>(fam.size()) < spec.cover_family) {
      r.passed = false;
      r.note = "could not draw the requested family size";
    }
    rep.checks.push_back(std::move(r));
  });
  run("maximal", [&] {
    const auto fns = default_test_functions<D>(dom);
    const auto lam = log_spaced(0.05, 0.95, spec.lambdas);
    const double h = L / spec.cells;
    std::vector<MaximalExperiment<D>> ex;
    for (double hh : {h, 0.5 * h})
      ex.push_back(maximal_experiment<D>(field, m, spec.eta, fns, hl(), hh, spec.time_samples, lam, opt));

    CheckResult sup("maximal_sup_bound");
    double worst = 0.0;
    for (const auto &e : ex)
      for (double r : e.sup_ratios) worst = std::max(worst, r);
    sup.add("worst_sup_ratio", worst);
    for (std::size_t k = 0; k < fns.size(); ++k) sup.add("flagged_fraction_" + fns[k].name, ex[1].flagged[k]);
    sup.passed = worst <= 1.0 + 1e-12;
    rep.checks.push_back(std::move(sup));

    CheckResult weak("maximal_weak_type");
    weak.mandatory = false;
    weak.add("weak_constant_coarse", ex[0].weak_constant);
    weak.add("weak_constant_fine", ex[1].weak_constant);
    for (std::size_t i = 0; i < lam.size(); ++i) weak.add("weak_ratio_fine_" + std::to_string(i), ex[1].weak_ratios[i]);
    weak.passed = detail::stable_within(ex[0].weak_constant, ex[1].weak_constant, 0.2);
    rep.checks.push_back(std::move(weak));

    CheckResult strong("maximal_strong_type");
    strong.mandatory = false;
    bool stable = true;
    for (std::size_t k = 0; k < fns.size(); ++k) {
      strong.add("strong_ratio_coarse_" + fns[k].name, ex[0].strong_ratios[k]);
      strong.add("strong_ratio_fine_" + fns[k].name, ex[1].strong_ratios[k]);
      stable = stable && detail::stable_within(ex[0].strong_ratios[k], ex[1].strong_ratios[k], 0.2);
    }
    strong.passed = stable;
    rep.checks.push_back(std::move(strong));

    if (field.analytic() && field.analytic()->kind() == Catalog::zero) {
      CheckResult up("upright_oracle");
      double diff = 0.0, c1 = 0.0, c2 = 0.0;
      for (auto &e : ex) {
        auto oracle = e;
        for (std::size_t k = 0; k < fns.size(); ++k) {
          oracle.values[k] = upright_maximal<D>(fns[k].fn, dom, e.grid, e.eps_grid, spec.cylinder_time,
                                                spec.cylinder_ball > 0 ? spec.cylinder_ball : 64 * D);
          for (std::size_t p = 0; p < oracle.values[k].size(); ++p)
            diff = std::max(diff, std::abs(oracle.values[k][p] - e.values[k][p]));
        }
        summarize_maximal(oracle, fns);
        c1 = std::max(c1, std::abs(oracle.weak_constant - e.weak_constant) / oracle.weak_constant);
        for (std::size_t k = 0; k < fns.size(); ++k)
          c2 = std::max(c2, std::abs(oracle.strong_ratios[k] - e.strong_ratios[k]) / oracle.strong_ratios[k]);
      }
      up.add("max_abs_difference", diff);
      up.add("weak_constant_relative_difference", c1);
      up.add("strong_ratio_relative_difference", c2);
      up.passed = diff <= 1e-12 && c1 <= 0.01 && c2 <= 0.01;
      rep.checks.push_back(std::move(up));
    }
  });
  run("convergence", [&] {
    const double e0 = spec.convergence_eps_start > 0.0 ? spec.convergence_eps_start : std::min(0.2, L / 8.0);
    std::vector<double> eps;
    for (int k = 0; k < spec.convergence_steps; ++k) eps.push_back(e0 * std::pow(2.0, -k));
    const double tc = 0.5 * (dom.t_start + dom.t_end), span = dom.t_end - dom.t_start;
    const auto smooth = smooth_wave<D>(tc, 0.07 * span, L);
    const auto piecewise = box_indicator<D>(tc, 0.1 * span, Vec<D>::filled(0.5 * L), 0.15 * L, L);
    const auto grid = SpacetimeGrid<D>::cell_centered(dom.t_start, dom.t_end, spec.convergence_time_samples, Vec<D>{},
                                                      Vec<D>::filled(L), L / spec.convergence_cells);
    rep.checks.push_back(judge_convergence(convergence_sweep<D>(field, m, smooth, piecewise, grid, eps, 0.1, opt)));
  });
  return rep;
}

inline VerifyReport run_suite(const ExperimentSpec &spec) {
  switch (spec.dimension) {
    case 1: return run_suite<1>(spec);
    case 2: return run_suite<2>(spec);
    case 3: return run_suite<3>(spec);
  }
  throw precondition_error("dimension must be 1, 2 or 3");
}

inline void write_report_text(std::ostream &out, const VerifyReport &r) {
  out << std::setprecision(10);
  out << "field " << r.field << "\ndimension " << r.dimension << "\neta " << r.eta << "\nseed " << r.seed << "\n\n";
  for (const auto &c : r.checks) {
    out << c.name << (c.mandatory ? " [mandatory] " : " [informational] ") << (c.passed ? "PASS" : "FAIL") << '\n';
    for (const auto &m : c.metrics) out << "  " << m.name << " = " << m.value << '\n';
    if (!c.note.empty()) out << "  note: " << c.note << '\n';
  }
  out << "\nresult " << (r.passed() ? "PASS" : "FAIL") << '\n';
}

/// CSV: check, mandatory, status, metric, value (one row per metric).
inline void write_report_csv(std::ostream &out, const VerifyReport &r) {
  out << "check,mandatory,status,metric,value\n" << std::setprecision(12);
  for (const auto &c : r.checks) {
    const char *status = c.passed ? "pass" : "fail";
    if (c.metrics.empty()) out << c.name << ',' << c.mandatory << ',' << status << ",,\n";
    for (const auto &m : c.metrics) out << c.name << ',' << c.mandatory << ',' << status << ',' << m.name << ',' << m.value << '\n';
  }
}

inline void write_timings(std::ostream &out, const VerifyReport &r) {
  out << "check,seconds\n" << std::setprecision(6);
  for (const auto &t : r.timings) out << t.check << ',' << t.seconds << '\n';
}

}  // namespace skewmax
