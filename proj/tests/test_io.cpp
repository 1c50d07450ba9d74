#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "retmap/runner.hpp"

using namespace retmap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("retmap_test_io_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, ParsesTopLevelAndParams) {
  std::istringstream in(
      "# experiment\n"
      "scenario = perturbed_circle_cosine\n"
      "command = critical-points\n"
      "\n"
      "seed = 7\n"
      "[params]\n"
      "; amplitude in d\n"
      "amplitude = 0.05\n");
  auto f = io::parse_config(in, "exp.cfg");
  EXPECT_EQ(f.top.at("scenario").value, "perturbed_circle_cosine");
  EXPECT_EQ(f.top.at("seed").line, 5);
  EXPECT_EQ(f.params.at("amplitude").value, "0.05");
  auto cfg = apply_config({}, f);
  EXPECT_EQ(cfg.command, Command::critical_points);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_DOUBLE_EQ(cfg.params.at("amplitude"), 0.05);
}

TEST(Config, ErrorsCarryLineAndField) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      apply_config({}, io::parse_config(in, "bad.cfg"));
    } catch (const io::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("scenario = a\nscenario = b\n").find("bad.cfg:2"), std::string::npos);
  EXPECT_NE(message("[other]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(message("just words\n").find("bad.cfg:1"), std::string::npos);
  auto unknown = message("scenario = x\nwobble = 3\n");
  EXPECT_NE(unknown.find("bad.cfg:2"), std::string::npos);
  EXPECT_NE(unknown.find("'wobble'"), std::string::npos);
  auto nan = message("grad_tol = fast\n");
  EXPECT_NE(nan.find("grad_tol"), std::string::npos);
  EXPECT_NE(nan.find("not a number"), std::string::npos);
  EXPECT_NE(message("starts = 0\n").find(">= 1"), std::string::npos);
  EXPECT_NE(message("command = dance\n").find("unknown command"), std::string::npos);
  EXPECT_NE(message("[params]\nrho = big\n").find("param 'rho'"), std::string::npos);
}

TEST(Config, ValidateChecksRanges) {
  RunConfig c;
  c.scenario = "concentric_circle";
  EXPECT_NO_THROW(validate(c));
  auto bad = c;
  bad.grad_tol = 0.0;
  EXPECT_THROW(validate(bad), io::ConfigError);
  bad = c;
  bad.tolerances.merge_radius = -1;
  EXPECT_THROW(validate(bad), io::ConfigError);
  bad = c;
  bad.seed_point = {0.1, 0.2};
  EXPECT_THROW(validate(bad), io::ConfigError);
  bad = c;
  bad.eps_family = {0.1};
  EXPECT_THROW(validate(bad), io::ConfigError);
  bad = c;
  bad.scenario = "nope";
  EXPECT_THROW(validate(bad), Error);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::strtod(io::format_number(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(io::format_number(0.1), "0.10000000000000001");
}

TEST(Csv, HeaderThenColumnsThenRows) {
  std::ostringstream os;
  io::HeaderBlock h;
  h.add("scenario", "demo").add("seed", "3");
  io::CsvWriter w(os, h, {"a", "b"});
  w.row({io::CsvWriter::cell(1.5), io::CsvWriter::cell(2)});
  EXPECT_EQ(os.str(), "# scenario: demo\n# seed: 3\na,b\n1.5,2\n");
  EXPECT_THROW(w.row({"1"}), std::invalid_argument);
}

TEST(Svg, RunsLegendAndFixedColours) {
  io::LabelRaster r{2, 4, {0, 0, 1, -1, 1, 1, 1, -2}};
  std::ostringstream os;
  io::write_basin_svg(os, r, {"first", "second"}, "demo <map>");
  auto svg = os.str();
  EXPECT_NE(svg.find("demo &lt;map&gt;"), std::string::npos);
  EXPECT_NE(svg.find(io::label_color(0)), std::string::npos);
  EXPECT_NE(svg.find(io::kUnresolvedColor), std::string::npos);
  EXPECT_NE(svg.find(io::kFailedColor), std::string::npos);
  EXPECT_NE(svg.find("second"), std::string::npos);
  // Row 0 has three runs, row 1 two, plus five legend swatches.
  std::size_t rects = 0;
  for (auto p = svg.find("<rect"); p != std::string::npos; p = svg.find("<rect", p + 1)) ++rects;
  EXPECT_EQ(rects, 3u + 2u + 4u);
  EXPECT_EQ(io::label_color(0), io::basin_palette()[0]);
  EXPECT_EQ(io::label_color(static_cast<int>(io::basin_palette().size())), io::basin_palette()[0]);
}

TEST(Run, SimulateWritesHeaderedTrajectoryAndIsDeterministic) {
  RunConfig c;
  c.scenario = "perturbed_circle_cosine";
  c.command = Command::simulate;
  c.lyapunov = LyapunovPolicy::record;
  c.seed_point = {2.0};
  c.seed = 11;
  c.out_dir = scratch("sim_a").string();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  auto a = slurp(fs::path(c.out_dir) / "trajectory.csv");
  for (auto key : {"# scenario: perturbed_circle_cosine", "# seed: 11", "# params:", "# tolerances:"})
    EXPECT_NE(a.find(key), std::string::npos) << key;
  auto rows = data_rows(a);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].size(), 7u);
  EXPECT_LE(std::stod(rows.back()[5]), 1e-8);

  c.out_dir = scratch("sim_b").string();
  c.jobs = 3;
  ASSERT_EQ(run(c, log), kExitOk);
  EXPECT_EQ(a, slurp(fs::path(c.out_dir) / "trajectory.csv"));
  EXPECT_EQ(slurp(fs::path(c.out_dir) / "summary.txt"),
            slurp(fs::path(scratch("sim_c")).parent_path() / "retmap_test_io_sim_a" / "summary.txt"));
}

TEST(Run, SimulateStopsOnEnergyIncreaseUnderEnforce) {
  RunConfig c;
  c.scenario = "perturbed_circle_cosine";
  c.seed_point = {1.5707963267948966};
  c.out_dir = scratch("sim_enforce").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitRunFailure);
  auto summary = slurp(fs::path(c.out_dir) / "summary.txt");
  EXPECT_NE(summary.find("termination = error"), std::string::npos);
  EXPECT_NE(summary.find("first_violation = 0,1"), std::string::npos);
}

TEST(Run, CriticalPointsTableHasTwoRows) {
  RunConfig c;
  c.scenario = "perturbed_circle_cosine";
  c.command = Command::critical_points;
  c.starts = 16;
  c.out_dir = scratch("crit").string();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  auto rows = data_rows(slurp(fs::path(c.out_dir) / "critical_points.csv"));
  ASSERT_EQ(rows.size(), 2u);
  // mu columns carry the first-order prediction.
  EXPECT_NEAR(std::stod(rows[0][6]), 0.92, 1e-6);
  EXPECT_NEAR(std::stod(rows[1][6]), 1.12, 1e-6);
}

TEST(Run, BasinsOnConcentricCircleIsGloballyCriticalWithoutSvg) {
  RunConfig c;
  c.scenario = "concentric_circle";
  c.command = Command::basins;
  c.resolution = 16;
  c.out_dir = scratch("basins_flat").string();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  EXPECT_FALSE(fs::exists(fs::path(c.out_dir) / "basins.svg"));
  EXPECT_NE(slurp(fs::path(c.out_dir) / "basins.csv").find("# globally_critical: true"), std::string::npos);
  EXPECT_NE(log.str().find("globally critical"), std::string::npos);
}

TEST(Run, BasinsOnCircleWritesSvg) {
  RunConfig c;
  c.scenario = "perturbed_circle_cosine";
  c.command = Command::basins;
  c.resolution = 24;
  c.starts = 16;
  c.out_dir = scratch("basins_circle").string();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  auto svg = slurp(fs::path(c.out_dir) / "basins.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(data_rows(slurp(fs::path(c.out_dir) / "basins.csv")).size(), 24u);
}

TEST(Run, InadmissibleScenarioPointsToCheck) {
  RunConfig c;
  c.scenario = "pathological_fold";
  c.out_dir = scratch("fold").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitRunFailure);
  EXPECT_NE(log.str().find("check-admissibility"), std::string::npos);

  c.command = Command::check_admissibility;
  c.samples = 500;
  std::ostringstream log2;
  ASSERT_EQ(run(c, log2), kExitOk) << log2.str();
  auto csv = slurp(fs::path(c.out_dir) / "admissibility.csv");
  EXPECT_NE(csv.find("# verdict: not admissible"), std::string::npos);
  EXPECT_FALSE(data_rows(csv).empty());
}

TEST(Run, ExpansionFamilyAndConstants) {
  RunConfig c;
  c.scenario = "perturbed_circle_cosine";
  c.command = Command::verify_expansion;
  c.eps_family = {0.04, 0.02};
  c.expansion_grid = 16;
  c.out_dir = scratch("exp").string();
  std::ostringstream log;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  auto summary = data_rows(slurp(fs::path(c.out_dir) / "expansion_summary.csv"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(data_rows(slurp(fs::path(c.out_dir) / "expansion.csv")).size(), 32u);

  c.command = Command::constants;
  c.grid = 32;
  ASSERT_EQ(run(c, log), kExitOk) << log.str();
  EXPECT_EQ(data_rows(slurp(fs::path(c.out_dir) / "constants.csv")).size(), 1u);

  c.scenario = "concentric_circle";
  c.command = Command::verify_expansion;
  std::ostringstream log2;
  EXPECT_EQ(run(c, log2), kExitConfigError);
  EXPECT_NE(log2.str().find("no 'eps' parameter"), std::string::npos);
}

TEST(Run, ConfigErrorsExitWithUsageStatus) {
  RunConfig c;
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitConfigError);
  EXPECT_NE(log.str().find("scenario"), std::string::npos);
}
