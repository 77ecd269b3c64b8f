// Command-line entry point: mollify | flow | maximal | cover | verify.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "skewmax/verify.hpp"

namespace fs = std::filesystem;
using namespace skewmax;

namespace {

struct RunConfig {
  std::string subcommand;
  ExperimentSpec spec;
  fs::path out_dir = ".";
  int verbosity = 0;
};

std::ofstream open_output(const RunConfig &rc, const std::string &name) {
  std::ofstream f(rc.out_dir / name);
  if (!f) throw io_error("cannot write " + (rc.out_dir / name).string());
  return f;
}

void note(const RunConfig &rc, const std::string &msg) {
  if (rc.verbosity > 0) std::cerr << msg << '\n';
}

template <int D>
Mollifier<D> mollifier_for(const ExperimentSpec &s) {
  return make_mollifier<D>(s.mollifier_nodes > 0 ? s.mollifier_nodes : default_mollifier_nodes<D>());
}

// u_eps and grad u_eps on a cell-centred slice_cells^d lattice, one file per (eps, t).
template <int D>
int cmd_mollify(const RunConfig &rc) {
  const auto &s = rc.spec;
  const auto field = field_from_spec<D>(s);
  const auto m = mollifier_for<D>(s);
  const double L = field.domain().period, h = L / s.slice_cells;
  auto index = open_output(rc, "mollify_index.csv");
  index << "file,epsilon,t\n" << std::setprecision(12);
  for (std::size_t i = 0; i < s.eps_list.size(); ++i) {
    const MollifiedVelocity<D> u(field, m, s.eps_list[i], s.route);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const std::string name = "mollify_e" + std::to_string(i) + "_t" + std::to_string(k) + ".csv";
      index << name << ',' << s.eps_list[i] << ',' << s.times[k] << '\n';
      auto out = open_output(rc, name);
      out << std::setprecision(12);
      for (int a = 0; a < D; ++a) out << (a ? "," : "") << "x_" << a + 1;
      for (int a = 0; a < D; ++a) out << ",u_" << a + 1;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) out << ",du" << a + 1 << "_dx" << b + 1;
      out << '\n';
      const auto grid = SpacetimeGrid<D>::cell_centered(s.times[k] - 0.5, s.times[k] + 0.5, 1, Vec<D>{},
                                                        Vec<D>::filled(L), h);
      for (std::size_t p = 0; p < grid.spatial_size(); ++p) {
        const Vec<D> x = grid.point(p);
        const Vec<D> v = u.velocity(s.times[k], x);
        const Mat<D> g = u.gradient(s.times[k], x);
        for (int a = 0; a < D; ++a) out << (a ? "," : "") << x[a];
        for (int a = 0; a < D; ++a) out << ',' << v[a];
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b) out << ',' << g[a][b];
        out << '\n';
      }
      note(rc, "wrote " + name);
    }
  }
  return 0;
}

// Trajectory polylines from a flow_points^d seed lattice, one file per eps.
template <int D>
int cmd_flow(const RunConfig &rc) {
  const auto &s = rc.spec;
  const auto field = field_from_spec<D>(s);
  const auto m = mollifier_for<D>(s);
  const double L = field.domain().period;
  for (std::size_t i = 0; i < s.eps_list.size(); ++i) {
    const MollifiedVelocity<D> u(field, m, s.eps_list[i], s.route);
    const auto seeds = SpacetimeGrid<D>::cell_centered(s.flow_t_start - 0.5, s.flow_t_start + 0.5, 1, Vec<D>{},
                                                       Vec<D>::filled(L), L / s.flow_points);
    const std::string name = "flow_e" + std::to_string(i) + ".csv";
    auto out = open_output(rc, name);
    out << "seed,s";
    for (int a = 0; a < D; ++a) out << ",x_" << a + 1;
    out << '\n' << std::setprecision(12);
    std::vector<Trajectory<D>> paths(seeds.spatial_size());
    parallel_for(paths.size(), s.workers, [&](std::size_t p) {
      paths[p] = integrate_flow(u, s.flow_t_start, seeds.point(p), s.flow_t_end, s.step_budget);
    });
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (int k = 0; k < s.flow_samples; ++k) {
        const double t = s.flow_t_start + (s.flow_t_end - s.flow_t_start) * k / (s.flow_samples - 1);
        const Vec<D> x = paths[p].at(t);
        out << p << ',' << t;
        for (int a = 0; a < D; ++a) out << ',' << x[a];
        out << '\n';
      }
    note(rc, "wrote " + name);
  }
  return 0;
}

template <int D>
int cmd_maximal(const RunConfig &rc) {
  const auto &s = rc.spec;
  const auto field = field_from_spec<D>(s);
  const auto &dom = field.domain();
  const auto m = mollifier_for<D>(s);
  const auto fn = named_test_function<D>(s.function, dom);
  const double h = dom.period / s.cells;
  const auto grid = fn.fn.support ? window_grid(field, *fn.fn.support, h, s.time_samples)
                                  : SpacetimeGrid<D>::cell_centered(dom.t_start, dom.t_end, s.time_samples, Vec<D>{},
                                                                    Vec<D>::filled(dom.period), h);
  const auto eps = default_epsilon_grid(h, dom.period);
  const HLMaximalField<D> hl(field, s.hl_cells, s.hl_time_samples);
  const SweepOptions opt{s.cylinder_time, s.cylinder_ball, s.step_budget, s.route, s.workers};
  const auto mf = skewed_maximal<D>(field, m, fn.fn, s.eta, grid, eps, hl, opt);
  {
    auto out = open_output(rc, "maximal.csv");
    write_maximal_csv(out, mf);
  }
  const double cell = grid.cell_volume();
  const auto fv = sample_on(fn.fn, grid);
  nlohmann::ordered_json j;
  j["field"] = field.describe();
  j["function"] = fn.name;
  j["eta"] = s.eta;
  j["points"] = grid.size();
  j["spacing"] = h;
  j["time_samples"] = s.time_samples;
  j["eps_grid"] = eps;
  j["f_l1"] = grid_norm(fv, cell, 1.0);
  j["f_l2"] = grid_norm(fv, cell, 2.0);
  j["f_sup"] = fn.sup;
  j["maximal_l1"] = grid_norm(mf.values, cell, 1.0);
  j["maximal_l2"] = grid_norm(mf.values, cell, 2.0);
  j["maximal_sup"] = mf.max_value();
  j["sup_bound_holds"] = mf.max_value() <= fn.sup * (1.0 + 1e-12);
  const auto lam = log_spaced(0.05 * fn.sup, 0.95 * fn.sup, s.lambdas);
  std::vector<double> weak;
  for (double l : lam) weak.push_back(superlevel_measure(mf.values, l, cell) * l / grid_norm(fv, cell, 1.0));
  j["lambdas"] = lam;
  j["weak_ratios"] = weak;
  j["weak_constant"] = *std::max_element(weak.begin(), weak.end());
  j["strong_ratio"] = grid_norm(mf.values, cell, 2.0) / grid_norm(fv, cell, 2.0);
  j["flagged_fraction"] = mf.flagged_fraction();
  auto out = open_output(rc, "maximal_summary.json");
  out << j.dump(2) << '\n';
  note(rc, "wrote maximal.csv and maximal_summary.json");
  return 0;
}

template <int D>
int cmd_cover(const RunConfig &rc) {
  const auto &s = rc.spec;
  const auto field = field_from_spec<D>(s);
  const auto m = mollifier_for<D>(s);
  std::vector<SkewedCylinder<D>> family;
  if (!s.family_file.empty()) {
    std::ifstream in(s.family_file);
    if (!in) throw io_error("cannot open family file '" + s.family_file + "'");
    for (const auto &c : read_cylinder_family<D>(in))
      family.push_back(make_cylinder(MollifiedVelocity<D>(field, m, c.eps, s.route), c.t, c.x, s.step_budget));
  } else {
    const HLMaximalField<D> hl(field, s.hl_cells, s.hl_time_samples);
    AdmissibleSampler<D> smp{field, m, hl, s.eta};
    smp.step_budget = s.step_budget;
    smp.route = s.route;
    const double L = field.domain().period;
    family = random_admissible_family(smp, s.cover_family, 0.004 * L, 0.03 * L, s.seed);
  }
  const auto rep = greedy_cover(family, s.probes, family.empty() ? 0 : s.union_samples, s.seed, s.workers);
  {
    std::vector<CylinderSpec<D>> specs;
    for (const auto &c : family) specs.push_back({c.center_time(), c.center(), c.epsilon()});
    auto out = open_output(rc, "family.csv");
    write_cylinder_family(out, specs);
  }
  {
    auto out = open_output(rc, "cover.csv");
    write_cover_csv(out, family, rep);
  }
  auto out = open_output(rc, "cover_summary.txt");
  write_cover_summary(out, D, rep);
  note(rc, "selected " + std::to_string(rep.selected.size()) + " of " + std::to_string(family.size()));
  return 0;
}

int cmd_verify(const RunConfig &rc) {
  const auto rep = run_suite(rc.spec);
  {
    auto out = open_output(rc, "report.txt");
    write_report_text(out, rep);
  }
  {
    auto out = open_output(rc, "report.csv");
    write_report_csv(out, rep);
  }
  {
    auto out = open_output(rc, "timings.csv");
    write_timings(out, rep);
  }
  if (rc.verbosity > 0) write_report_text(std::cerr, rep);
  std::cout << "verify " << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? 0 : 1;
}

template <int D>
int dispatch_dim(const RunConfig &rc) {
  if (rc.subcommand == "mollify") return cmd_mollify<D>(rc);
  if (rc.subcommand == "flow") return cmd_flow<D>(rc);
  if (rc.subcommand == "maximal") return cmd_maximal<D>(rc);
  if (rc.subcommand == "cover") return cmd_cover<D>(rc);
  return cmd_verify(rc);
}

int dispatch(const RunConfig &rc) {
  switch (rc.spec.dimension) {
    case 1: return dispatch_dim<1>(rc);
    case 2: return dispatch_dim<2>(rc);
    default: return dispatch_dim<3>(rc);
  }
}

}  // namespace

int main(int argc, char **argv) {
  std::ostringstream defaults;
  write_experiment(defaults, ExperimentSpec{});
  CLI::App app{"Skewed-cylinder maximal function toolkit"};
  app.footer("Config file keys and their defaults:\n\n" + defaults.str());
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  int verbosity = 0;
  bool print_config = false;
  app.add_option("--config", config_path, "experiment config (key = value under [section] headers)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed (overrides [run] seed)");
  app.add_option("--workers", workers, "worker threads (overrides [run] workers)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_flag("-v,--verbose", verbosity, "progress messages on stderr");
  app.add_flag("--print-config", print_config, "print the effective config before running");
  for (const char *name : {"mollify", "flow", "maximal", "cover", "verify"}) app.add_subcommand(name);
  app.get_subcommand("mollify")->description("u_eps and grad u_eps slices for each [commands] eps and time");
  app.get_subcommand("flow")->description("trajectory polylines from a seed lattice");
  app.get_subcommand("maximal")->description("M_Q f on a grid with a JSON summary");
  app.get_subcommand("cover")->description("greedy disjoint subfamily of a cylinder family");
  app.get_subcommand("verify")->description("full property suite; exit status 0 iff every mandatory check passes");
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc;
    rc.subcommand = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) rc.spec = load_experiment(config_path);
    if (seed) rc.spec.seed = *seed;
    if (workers) rc.spec.workers = *workers;
    rc.spec.validate();
    rc.out_dir = out_dir;
    rc.verbosity = verbosity;
    fs::create_directories(rc.out_dir);
    if (print_config) write_experiment(std::cout, rc.spec);
    return dispatch(rc);
  } catch (const precondition_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const io_error &e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 4;
  }
}
