#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "canonmap/geodesic.hpp"
#include "canonmap/io.hpp"
#include "canonmap/mesh.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/rigid_pose.hpp"

// After Eigen: <resolv.h> defines a macro named `res`.
#include <httplib.h>

using namespace canonmap;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("canonmap_test_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with stdout/stderr captured to files; returns the exit status.
int run(const std::string& args, std::string* out = nullptr, std::string* err = nullptr) {
  const fs::path o = workdir() / "stdout.txt", e = workdir() / "stderr.txt";
  const std::string cmd = std::string(CANONMAP_EXE) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  if (out) *out = slurp(o);
  if (err) *err = slurp(e);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Turtle at subdivision 3 with parts and annotations, made once.
struct Assets {
  fs::path mesh = workdir() / "turtle.obj";
  fs::path parts = workdir() / "turtle.parts.json";
  fs::path annotations = workdir() / "turtle.annot.json";
};

const Assets& assets() {
  static const Assets a = [] {
    Assets x;
    EXPECT_EQ(run("synth-mesh --shape turtle --subdiv 3 --out " + q(x.mesh) + " --parts " + q(x.parts)), 0);
    EXPECT_EQ(run("annotate --mesh " + q(x.mesh)), 0);
    return x;
  }();
  return a;
}

std::string session() {
  const auto& a = assets();
  return "--mesh " + q(a.mesh) + " --parts " + q(a.parts);
}

}  // namespace

TEST(Cli, AnnotateIsByteIdentical) {
  const auto& a = assets();
  ASSERT_TRUE(fs::exists(a.annotations));
  const std::string first = slurp(a.annotations);
  const fs::path second = workdir() / "again.annot.json";
  ASSERT_EQ(run("annotate --mesh " + q(a.mesh) + " --out " + q(second)), 0);
  EXPECT_EQ(slurp(second), first);
  const auto doc = json::parse(first);
  EXPECT_EQ(doc["embeddings"]["dims"][0], 642);
  EXPECT_EQ(doc["embeddings"]["dims"][1], 16);
}

TEST(Cli, ExitCodes) {
  const fs::path split = workdir() / "split.obj";
  std::ofstream(split) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 5 0 0\nv 6 0 0\nv 5 1 0\nf 1 2 3\nf 4 5 6\n";
  std::string err;
  EXPECT_EQ(run("annotate --mesh " + q(split), nullptr, &err), 3);
  EXPECT_EQ(json::parse(err)["error"], "ValidationError");

  const fs::path garbage = workdir() / "garbage.obj";
  std::ofstream(garbage) << "v 0 0\nf 1 2 3\n";
  EXPECT_EQ(run("annotate --mesh " + q(garbage), nullptr, &err), 2);
  EXPECT_EQ(json::parse(err)["error"], "ParseError");

  EXPECT_EQ(run("annotate --mesh " + q(workdir() / "nope.obj"), nullptr, &err), 1);
  EXPECT_EQ(run("estimate --bogus-flag"), 2);
}

TEST(Cli, PartsDefineListDelete) {
  const auto& a = assets();
  const fs::path parts = workdir() / "authored.parts.json";
  fs::remove(parts);
  const std::string base = "--mesh " + q(a.mesh) + " --parts " + q(parts);
  std::string out;
  ASSERT_EQ(run("parts define " + base + " --seed 102 --threshold 0.04 --name belly --dry-run", &out), 0);
  const auto preview = json::parse(out);
  EXPECT_FALSE(fs::exists(parts));

  ASSERT_EQ(run("parts define " + base + " --seed 102 --threshold 0.04 --name belly"), 0);
  const auto mesh = parse_mesh(a.mesh);
  const auto graph = build_edge_graph(mesh);
  const auto loaded = load_parts(parts, mesh, graph);
  ASSERT_EQ(loaded.file.parts.size(), 1u);
  EXPECT_EQ(loaded.file.parts[0].members, grow_part(mesh, graph, 102, 0.04, "belly").members);
  EXPECT_EQ(preview["members"].get<std::vector<int>>(), loaded.file.parts[0].members);

  EXPECT_EQ(run("parts define " + base + " --seed 5 --threshold 0.01 --name belly"), 3);
  EXPECT_EQ(run("parts define " + base + " --seed 5 --threshold 0.01 --name belly --replace"), 0);
  ASSERT_EQ(run("parts list " + base, &out), 0);
  EXPECT_NE(out.find("belly"), std::string::npos);
  EXPECT_EQ(run("parts delete " + base + " --name belly"), 0);
  EXPECT_EQ(run("parts delete " + base + " --name belly"), 3);
}

TEST(Cli, SimulateIsDeterministic) {
  const fs::path cfg = workdir() / "noisy.scenario.json";
  std::ofstream(cfg) << R"({"embedding_noise": 0.01, "outlier_rate": 0.2, "rng_seed": 4})";
  const fs::path a = workdir() / "sim_a.json", b = workdir() / "sim_b.json";
  ASSERT_EQ(run("simulate " + session() + " --config " + q(cfg) + " --out " + q(a)), 0);
  ASSERT_EQ(run("simulate " + session() + " --config " + q(cfg) + " --out " + q(b)), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(workdir() / "sim_a.truth.json"), slurp(workdir() / "sim_b.truth.json"));
  ASSERT_EQ(run("simulate " + session() + " --config " + q(cfg) + " --seed 5 --out " + q(b)), 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST(Cli, EstimateMatchesEvaluateRow) {
  const fs::path cfg = workdir() / "eval.json";
  std::ofstream(cfg) << R"({"trials": 4, "seed": 11, "embedding_noise_rel": 0.5, "scenario": {"outlier_rate": 0.2}})";
  const fs::path csv = workdir() / "eval.csv";
  ASSERT_EQ(run("evaluate " + session() + " --config " + q(cfg) + " --out " + q(csv)), 0);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("trial,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), 4u);

  const fs::path obs = workdir() / "trial2.json", res = workdir() / "trial2.result.json";
  ASSERT_EQ(run("simulate " + session() + " --config " + q(cfg) + " --trial 2 --out " + q(obs)), 0);
  ASSERT_EQ(run("estimate " + session() + " --observation " + q(obs) + " --out " + q(res) + " --grasp mid"), 0);
  const auto result = io::read_json_file(res);
  const auto truth = io::read_json_file(workdir() / "trial2.truth.json");
  const auto err = pose_error(io::pose_from_json(result["object_pose"]), io::pose_from_json(truth["object_pose"]));
  EXPECT_EQ(rows[2][0], "2");
  EXPECT_EQ(rows[2][2], "ok");
  EXPECT_NEAR(std::stod(rows[2][3]), err.rotation_rad, 1e-12);
  EXPECT_NEAR(std::stod(rows[2][4]), err.translation_m, 1e-12);
  EXPECT_EQ(std::stoi(rows[2][7]), result["kept_pixels"].get<int>());
  EXPECT_EQ(result["grasp"]["strategy"], "mid");
}

TEST(Cli, EvaluateCsvIsByteIdentical) {
  std::string a, b, err;
  const std::string args = "evaluate " + session() + " --trials 3 --seed 9 --embedding-noise-rel 0.3";
  ASSERT_EQ(run(args, &a, &err), 0);
  ASSERT_EQ(run(args, &b), 0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(json::parse(err)["trials"], 3);
}

TEST(Cli, ServeAnswersOnLoopback) {
  const auto& a = assets();
  const fs::path log = workdir() / "serve.log", pidfile = workdir() / "serve.pid";
  const fs::path parts = workdir() / "served.parts.json";
  fs::remove(parts);
  const std::string cmd = std::string(CANONMAP_EXE) + " serve --mesh " + q(a.mesh) + " --parts " + q(parts) +
                          " --port 0 2>" + q(log) + " & echo $! >" + q(pidfile);
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  int port = 0;
  for (int i = 0; i < 500 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    const std::string text = slurp(log);
    const auto colon = text.rfind(':');
    if (text.find("listening") != std::string::npos && colon != std::string::npos)
      port = std::atoi(text.c_str() + colon + 1);
  }
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto r = client.Get("/api/mesh");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["vertex_count"], 642);
  r = client.Post("/api/parts", R"({"name": "belly", "seed": 102, "threshold_m": 0.04})", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  EXPECT_EQ(std::system(("kill " + slurp(pidfile)).c_str()), 0);
  std::string out;
  ASSERT_EQ(run("parts list --mesh " + q(a.mesh) + " --parts " + q(parts), &out), 0);
  EXPECT_NE(out.find("belly"), std::string::npos);
}
