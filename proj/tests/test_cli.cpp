#include "oracles.hpp"

#include <rigami/rigami.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace rigami;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string output;
};

// Runs the command line tool with stderr folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(RIGAMI_CLI) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(RIGAMI_DATA) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

struct ParsedObj {
  std::vector<Vec3> v;
  std::vector<std::vector<int>> f;
};

ParsedObj parse_obj(const std::string& text) {
  static const std::regex vline(R"(v( -?[0-9]+(\.[0-9]+)?(e[-+][0-9]+)?){3})");
  static const std::regex fline(R"(f( [1-9][0-9]*){3,})");
  ParsedObj obj;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'o' || line[0] == 'g') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      EXPECT_TRUE(std::regex_match(line, vline)) << line;
      Vec3 x;
      ls >> x.x() >> x.y() >> x.z();
      obj.v.push_back(x);
    } else if (tag == "f") {
      EXPECT_TRUE(std::regex_match(line, fline)) << line;
      std::vector<int> face;
      int i;
      while (ls >> i) face.push_back(i);
      obj.f.push_back(face);
    } else {
      ADD_FAILURE() << "unexpected OBJ line: " << line;
    }
  }
  return obj;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / ("rigami_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir;
};

}  // namespace

TEST(ExportObj, UnitSquare) {
  const CreasePattern p({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {{0, 1, 2, 3}});
  const ParsedObj obj = parse_obj(export_obj(p, embed(p, FoldState(0))));
  EXPECT_EQ(obj.v.size(), 4u);
  EXPECT_EQ(obj.f.size(), 2u);
}

TEST(ExportObj, ReparsePreservesDistances) {
  const CreasePattern p = generate_miura(3, 3, 1.0, 1.0, kPi / 3);
  const Mechanism m(p);
  const int z = miura_reference_creases(p).zigzag;
  FoldSchedule s;
  s.stages.push_back({{{z, -kPi / 36}}, {}, 1});
  s.stages.push_back({{{z, -kPi / 3}}, {}, 0});
  const Embedding3D e = embed(p, run_schedule(m, flat_state_seed(m, deg2rad(1.0)), s).states.back());
  const std::string text = export_obj(p, e);
  EXPECT_EQ(export_obj(p, e), text);
  const ParsedObj obj = parse_obj(text);
  ASSERT_EQ(obj.v.size(), p.num_vertices());
  for (std::size_t i = 0; i < obj.v.size(); ++i) {
    for (std::size_t j = i + 1; j < obj.v.size(); ++j) {
      EXPECT_NEAR((obj.v[i] - obj.v[j]).norm(), (e.x[i] - e.x[j]).norm(), 1e-12);
    }
  }
  // Quads are split into two triangles with 1-based indices.
  EXPECT_EQ(obj.f.size(), 2 * p.num_facets());
  for (const auto& f : obj.f) {
    EXPECT_EQ(f.size(), 3u);
    for (int i : f) EXPECT_LE(i, static_cast<int>(p.num_vertices()));
  }
}

TEST_F(CliTest, ValidateExitCodes) {
  EXPECT_EQ(cli("validate --pattern " + data("miura_3x3.json")).code, 0);
  const std::string hole = write("hole.json", R"({
    "vertices": [[0,0],[3,0],[3,3],[0,3],[1,1],[2,1],[2,2],[1,2]],
    "creases": [[0,4,"M"],[1,5,"V"],[2,6,"M"],[3,7,"V"]],
    "boundary": [[0,1],[1,2],[2,3],[3,0],[4,5],[5,6],[6,7],[7,4]],
    "facets": [[0,1,5,4],[1,2,6,5],[2,3,7,6],[3,0,4,7]]})");
  const CliRun r = cli("validate --pattern " + hole);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("holes unsupported"), std::string::npos);
  EXPECT_EQ(cli("validate --pattern " + (dir / "missing.json").string()).code, 2);
  EXPECT_EQ(cli("validate --pattern " + write("bad.json", "{oops")).code, 2);
}

TEST_F(CliTest, InfoDegreesOfFreedom) {
  const CliRun wb = cli("info --pattern " + data("waterbomb_base.json") + " --state " + data("waterbomb_up.json"));
  ASSERT_EQ(wb.code, 0) << wb.output;
  EXPECT_EQ(nlohmann::json::parse(wb.output)["dof"], 5);

  const CliRun flat = cli("info --pattern " + data("miura_3x3.json"));
  ASSERT_EQ(flat.code, 0) << flat.output;
  EXPECT_NE(flat.output.find("warning: flat state is kinematically degenerate"), std::string::npos);
  const auto doc = nlohmann::json::parse(flat.output.substr(flat.output.find('{')));
  EXPECT_EQ(doc["state"], "flat");
  EXPECT_EQ(doc["dof_generic"], 1);
  EXPECT_GT(doc["dof"].get<int>(), 1);
  EXPECT_EQ(doc["interior_vertices"], 25);
}

TEST_F(CliTest, FoldMiura) {
  const std::string args = "fold --pattern " + data("miura_3x3.json") + " --schedule " + data("miura_schedule.json") +
                           " --seed-deg 1 --every 12 --out ";
  ASSERT_EQ(cli(args + (dir / "a").string()).code, 0);
  const auto rows = read_csv(dir / "a" / "angles.csv");
  ASSERT_EQ(rows.size(), 38u);
  const CreasePattern p = load_pattern(data("miura_3x3.json"));
  const auto ref = miura_reference_creases(p);
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const double r1 = std::stod(rows[k][static_cast<std::size_t>(ref.zigzag) + 2]);
    const double r2 = std::stod(rows[k][static_cast<std::size_t>(ref.straight) + 2]);
    EXPECT_NEAR(r1, -deg2rad(5.0 * static_cast<double>(k - 1)), 1e-9);
    EXPECT_LT(std::abs(oracle::wrap(r2 - 2.0 * std::atan(std::cos(kPi / 3) * std::tan(r1 / 2)))), 1e-8);
  }
  for (const auto& row : read_csv(dir / "a" / "residuals.csv")) {
    if (row[0] != "step") {
      EXPECT_LT(std::stod(row[2]), 1e-9);
    }
  }
  for (int k : {0, 12, 24, 36}) EXPECT_TRUE(fs::exists(dir / "a" / ("frame_00" + std::to_string(k / 10) + std::to_string(k % 10) + ".obj")));
  EXPECT_FALSE(fs::exists(dir / "a" / "frame_0001.obj"));

  // Same inputs, byte-identical tables.
  ASSERT_EQ(cli(args + (dir / "b").string()).code, 0);
  for (const char* f : {"angles.csv", "residuals.csv", "dimensions.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}

TEST_F(CliTest, FoldCraneFlagsFlatStages) {
  ASSERT_EQ(cli("fold --pattern " + data("crane.json") + " --schedule " + data("crane_schedule.json") + " --every 1000 --out " +
                (dir / "c").string())
                .code,
            0);
  const auto rows = read_csv(dir / "c" / "residuals.csv");
  ASSERT_GT(rows.size(), 3u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const bool stage_end = k + 1 == rows.size() || rows[k + 1][1] != rows[k][1];
    if (stage_end && rows[k][1] != "-1") {
      EXPECT_EQ(rows[k][4], "1") << "row " << k;
    }
  }
}

TEST_F(CliTest, FoldEmptySchedule) {
  const std::string sched = write("empty.json", R"({"stages": []})");
  ASSERT_EQ(cli("fold --pattern " + data("miura_3x3.json") + " --schedule " + sched + " --out " + (dir / "e").string()).code, 0);
  int objs = 0;
  for (const auto& f : fs::directory_iterator(dir / "e")) objs += f.path().extension() == ".obj";
  EXPECT_EQ(objs, 1);
  EXPECT_TRUE(fs::exists(dir / "e" / "frame_0000.obj"));
}

TEST_F(CliTest, RelaxWaterbombWells) {
  const std::string base = "relax --pattern " + data("waterbomb_base.json") + " --springs " +
                           data("waterbomb_symmetric_springs.json") + " --every 1000 ";
  ASSERT_EQ(cli(base + "--state " + data("waterbomb_up.json") + " --out " + (dir / "up").string()).code, 0);
  ASSERT_EQ(cli(base + "--state " + data("waterbomb_down.json") + " --out " + (dir / "down").string()).code, 0);
  const auto up = nlohmann::json::parse(slurp(dir / "up" / "final_state.json"));
  const auto down = nlohmann::json::parse(slurp(dir / "down" / "final_state.json"));
  EXPECT_LT(up["energy"].get<double>(), 1e-8);
  EXPECT_GT(down["energy"].get<double>(), 1e-3);
  EXPECT_TRUE(up["converged"].get<bool>());
  EXPECT_TRUE(down["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "up" / "energy.csv"));
  EXPECT_TRUE(fs::exists(dir / "up" / "characteristic.csv"));

  // Starting at the rest angles nothing moves.
  ASSERT_EQ(cli(base + "--out " + (dir / "rest").string()).code, 0);
  EXPECT_EQ(read_csv(dir / "rest" / "energy.csv").size(), 2u);
}

TEST_F(CliTest, RelaxTessellationCurlsUp) {
  ASSERT_EQ(cli("relax --pattern " + data("waterbomb_tessellation_5x3.json") + " --springs " +
                data("tessellation_springs_pi_2.json") + " --settings " + data("relax_settings.json") +
                " --state " + data("waterbomb_tessellation_5x3_flat.json") + " --every 100000 --out " + (dir / "t").string())
                .code,
            0);
  const CliRun m = cli("measure --pattern " + data("waterbomb_tessellation_5x3.json") + " --state " +
                    (dir / "t" / "final_state.json").string());
  ASSERT_EQ(m.code, 0) << m.output;
  const auto d = nlohmann::json::parse(m.output)["root_frame"];
  // A tube: as tall as it is wide.
  EXPECT_GT(d["H"].get<double>(), d["W"].get<double>());
}

TEST_F(CliTest, RelaxStepBudget) {
  const std::string settings = write("settings.json", R"({"max_steps": 1})");
  const CliRun r = cli("relax --pattern " + data("waterbomb_base.json") + " --springs " +
                    data("waterbomb_symmetric_springs.json") + " --state " + data("waterbomb_down.json") +
                    " --settings " + settings + " --out " + (dir / "r").string());
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, ExportAndUsage) {
  const CliRun obj = cli("export-obj --pattern " + data("waterbomb_base.json") + " --state " + data("waterbomb_up.json"));
  ASSERT_EQ(obj.code, 0);
  const ParsedObj parsed = parse_obj(obj.output);
  EXPECT_EQ(parsed.v.size(), 9u);
  EXPECT_EQ(parsed.f.size(), 8u);
  EXPECT_NE(cli("").code, 0);
  EXPECT_NE(cli("fold --pattern " + data("miura_3x3.json")).code, 0);
  const std::string bad = write("bad_state.json", R"({"rho": [0, 0]})");
  EXPECT_EQ(cli("measure --pattern " + data("miura_3x3.json") + " --state " + bad).code, 1);
}
