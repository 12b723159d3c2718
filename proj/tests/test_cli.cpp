#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "squash/config.hpp"
#include "squash/errors.hpp"
#include "squash/experiments.hpp"
#include "squash/log.hpp"
#include "squash/table.hpp"

using namespace squash;
using std::numbers::pi;

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

RunConfig small_config() {
  RunConfig c;
  c.n_traj = 40;
  c.t_final = 10;
  c.workers = 1;
  c.checkpoints = 5;
  return c;
}

const CheckRecord* find(const std::vector<CheckRecord>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.model.gamma == 1e-2);
  CHECK(c.model.kappa == 1e2);
  CHECK(c.model.eta == 0.8);
  CHECK(c.model.nbar == 0.5);
  CHECK(c.model.phi == -pi / 2);
  CHECK(c.dim == 30);
  CHECK(c.format == "csv");
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(
      "# comment line\n"
      "chi = 1.5   # trailing comment\n"
      "  g=0.01\n"
      "\n"
      "dim = 40\n"
      "seed = 18446744073709551615\n"
      "format = json\n"
      "out_dir = results/run 1\n");
  CHECK(c.model.chi == 1.5);
  CHECK(c.model.g == 0.01);
  CHECK(c.dim == 40);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.format == "json");
  CHECK(c.out_dir == "results/run 1");

  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("chi = 1\nchi = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("chi = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("chi = 1.5x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dim = 3.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("chi\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("chi =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("eta = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("eta = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dim = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("format = xml\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_traj = 0\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);

  try {
    parse_config("chi = 1\n\nbogus = 2\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config round trip") {
  RunConfig c;
  c.model.chi = 0.1 + 0.2;
  c.model.phi = -1.2345678901234567;
  c.dt = 1.0 / 3.0;
  c.seed = 987654321;
  c.workers = 3;
  c.out_dir = "x/y";
  const RunConfig d = parse_config(format_config(c));
  CHECK(d.model.chi == c.model.chi);
  CHECK(d.model.phi == c.model.phi);
  CHECK(d.dt == c.dt);
  CHECK(d.seed == c.seed);
  CHECK(d.workers == 3);
  CHECK(d.out_dir == "x/y");
  CHECK(format_config(d) == format_config(c));

  const auto dir = std::filesystem::temp_directory_path() / "squash_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.cfg") << format_config(c);
  CHECK(load_config((dir / "a.cfg").string()).dt == c.dt);
}

TEST_CASE("real formatting") {
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_real(INFINITY) == "inf");
  CHECK(format_real(-INFINITY) == "-inf");
  for (double x : {0.1, 1.0 / 3, -2.0625, 1e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) {
    CHECK(num(format_real(x)) == x);
  }
}

TEST_CASE("table serialization round trips") {
  Table t;
  t.title = "demo";
  t.columns = {"label", "x", "k", "ok"};
  t.add_row({std::string("a,b"), 0.1 + 0.2, std::int64_t{-7}, true});
  t.add_row({std::string("plain"), std::nan(""), std::int64_t{42}, false});
  CHECK_THROWS(t.add_row({1.0}));

  const std::string csv = to_csv(t);
  CHECK(csv.find("# demo\n") == 0);
  CHECK(csv.find(std::string("# ") + kUnitsNote) != std::string::npos);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "label,x,k,ok");
  std::getline(in, line);
  CHECK(line == "\"a,b\",0.30000000000000004,-7,true");
  std::getline(in, line);
  CHECK(line == "plain,nan,42,false");

  const auto j = nlohmann::json::parse(to_json(t));
  CHECK(j["title"] == "demo");
  CHECK(j["units"] == kUnitsNote);
  CHECK(j["columns"].size() == 4);
  CHECK(j["rows"][0]["label"] == "a,b");
  CHECK(j["rows"][0]["x"].get<double>() == 0.1 + 0.2);
  CHECK(j["rows"][0]["k"].get<std::int64_t>() == -7);
  CHECK(j["rows"][0]["ok"] == true);
  CHECK(j["rows"][1]["x"].is_null());

  const auto dir = std::filesystem::temp_directory_path() / "squash_table_test" / "nested";
  std::filesystem::remove_all(dir);
  const std::string path = write_table(t, dir.string(), "demo", "json");
  CHECK(path == (dir / "demo.json").string());
  std::ifstream f(path);
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(buf.str() == to_json(t));
  CHECK_THROWS_AS(write_table(t, dir.string(), "demo", "xml"), std::runtime_error);
  CHECK_THROWS_AS(write_table(t, "/proc/forbidden_dir", "demo", "csv"), std::runtime_error);
}

TEST_CASE("figure 1 table") {
  RunConfig c;
  const Table t = fig1_table(c, {0.5, 1.5, 2.5}, {0.0, 0.025});
  CHECK(t.columns == std::vector<std::string>{"chi", "g", "n_eff", "stable"});
  const auto rows = csv_rows(to_csv(t));
  REQUIRE(rows.size() == 7);
  const double expect[] = {2.2708, -0.0440, -0.2292};
  int k = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][3] == "true");
    if (num(rows[i][1]) == 0.0) {
      CHECK(num(rows[i][2]) == doctest::Approx(0.5).epsilon(1e-12));
    } else {
      CHECK(std::abs(num(rows[i][2]) - expect[k++]) < 1e-4);
    }
  }

  c.model.phi = pi / 2;
  const auto flagged = csv_rows(to_csv(fig1_table(c, {2.5}, {0.0, 0.025})));
  REQUIRE(flagged.size() == 3);
  CHECK(flagged[1][3] == "true");
  CHECK(flagged[2][3] == "false");
  CHECK(flagged[2][2] == "nan");
}

TEST_CASE("figure 2 table") {
  const Table t = fig2_table(RunConfig{});
  CHECK(t.columns == std::vector<std::string>{"label", "vxx", "vpp", "vxp", "major", "minor", "angle"});
  const auto rows = csv_rows(to_csv(t));
  REQUIRE(rows.size() == 4);
  auto row = [&](int i, std::vector<double> want, double tol) {
    for (int k = 0; k < 6; ++k) CHECK(std::abs(num(rows[i][k + 1]) - want[k]) < tol);
  };
  CHECK(rows[1][0] == "vacuum");
  row(1, {0.25, 0.25, 0, 0.5, 0.5, 0}, 1e-15);
  CHECK(rows[2][0] == "measured");
  row(2, {0.5, 2.0625, 0, 1.43614, 0.70711, pi / 2}, 1e-5);
  CHECK(rows[3][0] == "feedback");
  row(3, {0.13542, 2.0625, 0, 1.43614, 0.36800, pi / 2}, 1e-5);
}

TEST_CASE("steady table") {
  ScopedWarningSink quiet([](const std::string&) {});
  const auto rows = csv_rows(to_csv(steady_table(RunConfig{})));
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][0] == "closed_form");
  CHECK(rows[2][0] == "moment_equations");
  CHECK(rows[3][0] == "master_equation");
  for (int i = 2; i <= 3; ++i) {
    CHECK(std::abs(num(rows[i][5]) - num(rows[1][5])) < 1e-3);
    CHECK(std::abs(num(rows[i][6]) - num(rows[1][6])) < 1e-3);
  }
}

TEST_CASE("trajectory archive and summary") {
  RunConfig c = small_config();
  c.n_traj = 1;
  const EnsembleComparison a = compare_ensemble(c, true, 1);
  const EnsembleComparison b = compare_ensemble(c, true, 1);
  CHECK(to_csv(trajectory_archive(a.trajectories)) == to_csv(trajectory_archive(b.trajectories)));
  CHECK(a.trajectories.size() == 1);
  const auto rows = csv_rows(to_csv(trajectory_archive(a.trajectories)));
  CHECK(rows[0] == std::vector<std::string>{"traj", "seed", "t", "x", "x2", "n", "re_aa", "im_aa", "current_binned"});
  CHECK(rows.size() == 1 + c.checkpoints + 1);

  const auto summary = csv_rows(to_csv(ensemble_summary(a)));
  CHECK(summary[0][0] == "t");
  CHECK(summary.size() == rows.size());

  // no measurement, no feedback: thermal relaxation
  c.model.chi = 0;
  c.model.g = 0;
  c.n_traj = 2;
  const EnsembleComparison th = compare_ensemble(c, true, 1);
  for (std::size_t k = 0; k < th.stats.times.size(); ++k) {
    const double t = th.stats.times[k];
    CHECK(th.stats.n.mean[k] == doctest::Approx(c.model.nbar * (1 - std::exp(-c.model.gamma * t))).epsilon(1e-3));
    CHECK(th.stats.n.standard_error[k] == 0.0);
  }
}

TEST_CASE("validation suite on a small config") {
  ScopedWarningSink quiet([](const std::string&) {});
  const std::vector<CheckRecord> rs = run_validation(small_config());
  CHECK(rs.size() >= 18);
  for (const auto& r : rs) {
    INFO(r.name << ": " << r.note);
    CHECK(r.status == CheckStatus::pass);
  }
  const Table t = validation_table(rs);
  CHECK(t.rows.size() == rs.size());
  CHECK(t.columns == std::vector<std::string>{"name", "expected", "actual", "tolerance", "status", "note"});
}

TEST_CASE("validation suite on an unstable config") {
  ScopedWarningSink quiet([](const std::string&) {});
  RunConfig c = small_config();
  c.model.phi = pi / 2;
  const std::vector<CheckRecord> rs = run_validation(c);
  int skipped = 0;
  for (const auto& r : rs) {
    CHECK(r.status != CheckStatus::fail);
    if (r.status == CheckStatus::skipped) {
      ++skipped;
      CHECK_FALSE(r.note.empty());
    }
  }
  CHECK(skipped > 0);
  REQUIRE(find(rs, "no_feedback_identity") != nullptr);
  CHECK(find(rs, "no_feedback_identity")->status == CheckStatus::pass);
  CHECK(find(rs, "fig2_values")->status == CheckStatus::pass);
  REQUIRE(find(rs, "stationary_state") != nullptr);
  CHECK(find(rs, "stationary_state")->status == CheckStatus::skipped);
}
