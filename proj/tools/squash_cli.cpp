// Command-line driver: figure tables, steady state, trajectories and the validation suite.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "squash/config.hpp"
#include "squash/errors.hpp"
#include "squash/experiments.hpp"

namespace {

using namespace squash;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

struct Common {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "flat key = value config file");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", c.seed, "base seed");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (c.out) cfg.out_dir = *c.out;
  if (c.format) cfg.format = *c.format;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

void report(const std::string& path) { std::cout << "wrote " << path << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-squeezed oscillator: closed forms, master equation and quantum trajectories"};
  app.require_subcommand(1);

  Common fig1c, fig2c, valc, trajc, steadyc;
  std::vector<double> chi_list = {0.5, 1.5, 2.5};
  double g_max = 0.05;
  int g_points = 41;

  auto* fig1 = app.add_subcommand("fig1", "n_eff versus g for several chi");
  add_common(fig1, fig1c);
  fig1->add_option("--chi", chi_list, "chi values")->expected(1, -1);
  fig1->add_option("--g-max", g_max, "largest gain (grid starts at 0)");
  fig1->add_option("--g-points", g_points, "grid size")->check(CLI::PositiveNumber);

  auto* fig2 = app.add_subcommand("fig2", "uncertainty ellipses for vacuum, measurement only and feedback");
  add_common(fig2, fig2c);
  auto* val = app.add_subcommand("validate", "run the validation suite");
  add_common(val, valc);
  auto* traj = app.add_subcommand("trajectories", "conditioned trajectory ensemble with feedback");
  add_common(traj, trajc);
  auto* steady = app.add_subcommand("steady", "stationary moments three ways");
  add_common(steady, steadyc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (fig1->parsed()) {
      const RunConfig c = resolve(fig1c);
      std::vector<double> grid;
      for (int i = 0; i < g_points; ++i) grid.push_back(g_points == 1 ? 0.0 : g_max * i / (g_points - 1));
      report(write_table(fig1_table(c, chi_list, grid), c.out_dir, "fig1", c.format));
      return kOk;
    }
    if (fig2->parsed()) {
      const RunConfig c = resolve(fig2c);
      report(write_table(fig2_table(c), c.out_dir, "fig2", c.format));
      return kOk;
    }
    if (steady->parsed()) {
      const RunConfig c = resolve(steadyc);
      report(write_table(steady_table(c), c.out_dir, "steady", c.format));
      return kOk;
    }
    if (traj->parsed()) {
      const RunConfig c = resolve(trajc);
      const EnsembleComparison cmp = compare_ensemble(c, true, c.workers);
      report(write_table(trajectory_archive(cmp.trajectories), c.out_dir, "trajectories", c.format));
      report(write_table(ensemble_summary(cmp), c.out_dir, "ensemble", c.format));
      if (c.model.chi == 0.0 || c.n_traj < 2) {
        std::cout << "no measurement noise to average over; consistency not evaluated\n";
        return kOk;
      }
      const bool ok = cmp.max_z <= 3.0;
      std::printf("unraveling consistency: %s (max |z| = %.3f over %zu checkpoints, dim %d)\n", ok ? "pass" : "fail",
                  cmp.max_z, cmp.stats.times.size(), cmp.dim);
      return ok ? kOk : kCheckFailed;
    }
    if (val->parsed()) {
      const RunConfig c = resolve(valc);
      const auto records = run_validation(c);
      bool ok = true;
      for (const auto& r : records) {
        ok = ok && r.status != CheckStatus::fail;
        std::printf("%-8s %-44s expected %-13.6g actual %-13.6g tol %-9.3g %s\n", to_string(r.status).c_str(),
                    r.name.c_str(), r.expected, r.actual, r.tolerance, r.note.c_str());
      }
      report(write_table(validation_table(records), c.out_dir, "validation", c.format));
      return ok ? kOk : kCheckFailed;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const UnstableParameters& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kOk;
}
