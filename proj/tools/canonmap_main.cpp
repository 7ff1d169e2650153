// canonmap: command-line front end for the canonical-mapping pose pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "canonmap/annotations.hpp"
#include "canonmap/error.hpp"
#include "canonmap/eval.hpp"
#include "canonmap/geodesic.hpp"
#include "canonmap/grasp.hpp"
#include "canonmap/io.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/server.hpp"
#include "canonmap/shapes.hpp"
#include "canonmap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace canonmap;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Session {
  CanonicalMesh mesh;
  EdgeGraph graph;
  std::optional<Annotations> annotations;
  std::vector<PartDefinition> parts;
};

enum class Need { No, Optional, Required };

Session open_session(const std::string& mesh_path, std::string annot_path, const std::string& parts_path,
                     Need annotations, Need parts) {
  Session s;
  s.mesh = parse_mesh(mesh_path);
  s.graph = build_edge_graph(s.mesh);
  if (annotations != Need::No) {
    if (annot_path.empty()) annot_path = annotations_path_for(mesh_path).string();
    if (fs::exists(annot_path)) {
      s.annotations = load_annotations(annot_path);
      check_annotations_match(*s.annotations, s.mesh);
    } else if (annotations == Need::Required) {
      throw Error(ErrorCode::IoError, "annotations '" + annot_path + "' not found; run 'canonmap annotate' first");
    }
  }
  if (parts != Need::No && !parts_path.empty()) {
    if (fs::exists(parts_path)) {
      LoadedParts loaded = load_parts(parts_path, s.mesh, s.graph);
      if (loaded.members_rewritten) {
        save_parts(parts_path, loaded.file);
        std::cerr << "note: stale member lists in '" << parts_path << "' were recomputed and rewritten\n";
      }
      s.parts = std::move(loaded.file.parts);
    } else if (parts == Need::Required) {
      throw Error(ErrorCode::IoError, "parts file '" + parts_path + "' not found");
    }
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  io::write_json_file(path, doc);
}

fs::path truth_path_for(const fs::path& out) {
  fs::path p = out;
  p.replace_extension();
  p += ".truth.json";
  return p;
}

// Knobs shared by estimate and evaluate.
struct MatchFlags {
  std::string depth_mode;
  std::optional<int> k;
  std::optional<double> theta0;
  std::optional<double> theta1;
  bool no_robust = false;
  bool robust = false;

  void add(CLI::App* app) {
    app->add_option("--depth-mode", depth_mode, "sensor | pairwise")->check(CLI::IsMember({"sensor", "pairwise"}));
    app->add_option("--k", k, "candidates per pixel (default 5)")->check(CLI::PositiveNumber);
    app->add_option("--theta0", theta0, "max embedding distance (default 5x median NN distance)")
        ->check(CLI::PositiveNumber);
    app->add_option("--theta1", theta1, "max distance above the row median (default 1x median NN distance)")
        ->check(CLI::PositiveNumber);
    auto* r = app->add_flag("--robust", robust, "consensus pass before the least-squares fit");
    app->add_flag("--no-robust", no_robust, "plain least-squares fit (default)")->excludes(r);
  }

  void apply(PoseConfig& pose) const {
    if (!depth_mode.empty()) pose.depth_mode = depth_mode_from_string(depth_mode);
    if (k) pose.match.k = *k;
    if (theta0) pose.match.max_dist = *theta0;
    if (theta1) pose.match.outlier_max_dist = *theta1;
    if (robust) pose.robust = true;
    if (no_robust) pose.robust = false;
  }
};

// ---------------------------------------------------------------- commands

struct SynthMeshArgs {
  std::string shape = "turtle";
  int subdivisions = 4;
  double radius = 1.0;
  std::string out;
  std::string parts;
};

int run_synth_mesh(const SynthMeshArgs& a) {
  CanonicalMesh mesh;
  if (a.shape == "turtle") mesh = shapes::turtle(a.subdivisions);
  else if (a.shape == "icosphere") mesh = shapes::icosphere(a.subdivisions, a.radius);
  else mesh = shapes::icosahedron(a.radius);
  save_mesh(a.out, mesh);
  if (!a.parts.empty()) {
    if (a.shape != "turtle") throw Error(ErrorCode::ValidationError, "--parts is only defined for the turtle");
    const EdgeGraph graph = build_edge_graph(mesh);
    PartsFile file{checksum_hex(mesh_checksum(mesh)), {}};
    for (const auto& anchor : shapes::turtle_part_anchors())
      file.parts.push_back(
          grow_part(mesh, graph, shapes::anchor_vertex(mesh, anchor.direction), anchor.threshold_m, anchor.name));
    save_parts(a.parts, file);
  }
  std::cout << json{{"mesh", a.out}, {"vertices", mesh.vertex_count()}, {"faces", mesh.face_count()},
                    {"checksum", checksum_hex(mesh_checksum(mesh))}}
                   .dump()
            << '\n';
  return 0;
}

struct AnnotateArgs {
  std::string mesh;
  std::string out;
  int dims = 16;
  int symmetry_axis = -1;
  std::size_t dense_limit = EigenSolverOptions{}.dense_limit;
  bool geodesic_cache = false;
  std::string import_embeddings;
};

int run_annotate(const AnnotateArgs& a) {
  const CanonicalMesh mesh = parse_mesh(a.mesh);
  AnnotateOptions opts;
  opts.dims = a.dims;
  opts.symmetry_axis = a.symmetry_axis;
  opts.eigen.dense_limit = a.dense_limit;
  if (!a.import_embeddings.empty()) opts.imported = io::embedding_table_from_json(io::read_json_file(a.import_embeddings));
  Annotations ann = annotate_mesh(mesh, opts);
  const fs::path out = a.out.empty() ? annotations_path_for(a.mesh) : fs::path(a.out);
  if (a.geodesic_cache) {
    fs::path cache = out;
    cache.replace_extension();  // strip .json
    cache.replace_extension(".geo.bin");
    GeodesicTable::compute(build_edge_graph(mesh)).save(cache);
    ann.geodesic_cache = cache.filename().string();
  }
  save_annotations(out, ann);
  std::cout << json{{"annotations", out.string()},
                    {"vertices", ann.vertex_count},
                    {"dims", ann.embeddings.dims()},
                    {"embedding_nn_median", ann.embedding_nn_median}}
                   .dump()
            << '\n';
  return 0;
}

struct PartsArgs {
  std::string mesh;
  std::string parts;
  std::string name;
  int seed = -1;
  double threshold = 0.0;
  bool dry_run = false;
  bool replace = false;
};

int run_parts_define(const PartsArgs& a) {
  Session s = open_session(a.mesh, "", a.parts, Need::No, Need::Optional);
  PartDefinition part = grow_part(s.mesh, s.graph, a.seed, a.threshold, a.name);
  const json group = {{"seed", a.seed},
                      {"threshold_m", a.threshold},
                      {"members", part.members},
                      {"centroid", {part.centroid.x(), part.centroid.y(), part.centroid.z()}}};
  if (a.dry_run) {
    std::cout << group.dump() << '\n';
    return 0;
  }
  if (a.name.empty()) throw Error(ErrorCode::ValidationError, "--name is required unless --dry-run is given");
  PartRegistry registry(s.parts);
  if (a.replace) {
    registry.put(part);
  } else if (!registry.add(part)) {
    throw Error(ErrorCode::ValidationError, "part '" + a.name + "' already exists (use --replace)");
  }
  save_parts(a.parts, PartsFile{checksum_hex(mesh_checksum(s.mesh)), registry.snapshot()});
  json out = group;
  out["name"] = a.name;
  std::cout << out.dump() << '\n';
  return 0;
}

int run_parts_list(const PartsArgs& a) {
  Session s = open_session(a.mesh, "", a.parts, Need::No, Need::Required);
  json parts = json::array();
  for (const auto& p : s.parts)
    parts.push_back({{"name", p.name},
                     {"seed", p.seed},
                     {"threshold_m", p.threshold},
                     {"member_count", p.members.size()},
                     {"centroid", {p.centroid.x(), p.centroid.y(), p.centroid.z()}}});
  std::cout << json{{"parts", parts}}.dump(2) << '\n';
  return 0;
}

int run_parts_delete(const PartsArgs& a) {
  Session s = open_session(a.mesh, "", a.parts, Need::No, Need::Required);
  PartRegistry registry(s.parts);
  if (!registry.remove(a.name)) throw Error(ErrorCode::UnknownPart, "no part named '" + a.name + "'");
  save_parts(a.parts, PartsFile{checksum_hex(mesh_checksum(s.mesh)), registry.snapshot()});
  std::cout << json{{"deleted", a.name}}.dump() << '\n';
  return 0;
}

struct SimulateArgs {
  std::string mesh;
  std::string annotations;
  std::string parts;
  std::string config;
  std::optional<std::uint64_t> seed;
  int trial = -1;
  std::string out;
};

void emit_observation(const Session& s, const ScenarioConfig& scenario, const fs::path& out) {
  const SyntheticObservation synth =
      generate_observation(s.mesh, s.annotations->embeddings, s.parts, scenario);
  io::write_json_file(out, io::observation_to_json(synth.observation));
  json truth = io::truth_to_json(synth);
  truth["scenario"] = io::scenario_to_json(scenario);
  io::write_json_file(truth_path_for(out), truth);
}

int run_simulate(const SimulateArgs& a) {
  Session s = open_session(a.mesh, a.annotations, a.parts, Need::Required, Need::Optional);
  const double nn = s.annotations->embedding_nn_median;
  json doc = a.config.empty() ? json::object() : io::read_json_file(a.config);

  if (doc.is_array()) {
    // Batch: one observation per scenario, named after the scenario.
    fs::create_directories(a.out);
    json written = json::array();
    for (const auto& entry : doc) {
      ScenarioConfig scenario = io::scenario_from_json(entry);
      if (a.seed) scenario.rng_seed = *a.seed;
      const fs::path out = fs::path(a.out) / (scenario.name + ".json");
      emit_observation(s, scenario, out);
      written.push_back(out.string());
    }
    std::cout << json{{"observations", written}}.dump() << '\n';
    return 0;
  }

  ScenarioConfig scenario;
  if (a.trial >= 0 || doc.contains("trials") || doc.contains("scenario")) {
    EvaluationConfig cfg = evaluation_config_from_json(doc);
    if (a.seed) cfg.master_seed = *a.seed;
    scenario = sample_scenario(cfg, nn, std::max(a.trial, 0));
  } else {
    scenario = io::scenario_from_json(doc);
    if (a.seed) scenario.rng_seed = *a.seed;
  }
  emit_observation(s, scenario, a.out);
  std::cout << json{{"observation", a.out}, {"truth", truth_path_for(a.out).string()}}.dump() << '\n';
  return 0;
}

struct EstimateArgs {
  std::string mesh;
  std::string annotations;
  std::string parts;
  std::string observation;
  std::string out;
  std::string grasp;
  std::string grasp_part;
  MatchFlags match;
};

int run_estimate(const EstimateArgs& a) {
  Session s = open_session(a.mesh, a.annotations, a.parts, Need::Required, Need::Optional);
  const Observation obs = io::observation_from_json(io::read_json_file(a.observation));
  PoseConfig pose;
  a.match.apply(pose);
  const PoseResult result = solve_poses(obs, s.mesh, s.annotations->embeddings, s.parts, pose,
                                        s.annotations->embedding_nn_median);
  json doc = io::pose_result_to_json(result);
  doc["depth_mode"] = std::string(to_string(pose.depth_mode));

  if (!a.grasp.empty()) {
    // Grasp frames live in the world frame; without extrinsics the camera frame stands in.
    const RigidPose to_world = obs.extrinsics.value_or(RigidPose::identity());
    std::vector<NamedPose> world;
    for (const auto& p : result.parts) world.push_back({p.name, to_world * p.pose});
    GraspPose grasp;
    if (a.grasp == "mid") {
      const auto names = default_mid_grab_parts();
      grasp = mid_grab_target(to_world * result.object_pose, world, names);
    } else if (a.grasp == "highest") {
      grasp = highest_part_target(world);
    } else {
      auto it = std::find_if(world.begin(), world.end(), [&](const NamedPose& p) { return p.name == a.grasp_part; });
      if (it == world.end()) throw Error(ErrorCode::MissingPart, "no pose for part '" + a.grasp_part + "'");
      grasp = grasp_frame(it->pose);
      grasp.part = it->name;
    }
    doc["grasp"] = io::grasp_to_json(grasp);
  }
  write_json(a.out, doc);
  return 0;
}

struct EvaluateArgs {
  std::string mesh;
  std::string annotations;
  std::string parts;
  std::string config;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> rot_thresh_deg;
  std::optional<double> trans_thresh_m;
  std::optional<double> noise_rel;
  std::optional<double> outlier_rate;
  std::string out;
  std::string json_out;
  MatchFlags match;
};

int run_evaluate(const EvaluateArgs& a) {
  Session s = open_session(a.mesh, a.annotations, a.parts, Need::Required, Need::Optional);
  EvaluationConfig cfg = a.config.empty() ? EvaluationConfig{} : evaluation_config_from_json(io::read_json_file(a.config));
  if (a.trials) cfg.trials = *a.trials;
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.rot_thresh_deg) cfg.rot_thresh_rad = *a.rot_thresh_deg * kPi / 180.0;
  if (a.trans_thresh_m) cfg.trans_thresh_m = *a.trans_thresh_m;
  if (a.noise_rel) cfg.embedding_noise_rel = *a.noise_rel;
  if (a.outlier_rate) cfg.base.outlier_rate = *a.outlier_rate;
  a.match.apply(cfg.pose);
  if (cfg.trials < 1) throw Error(ErrorCode::ValidationError, "--trials must be >= 1");

  const EvaluationReport report =
      run_evaluation(s.mesh, s.annotations->embeddings, s.annotations->embedding_nn_median, s.parts, cfg);
  write_text(a.out, report_csv(report));
  if (!a.json_out.empty()) {
    json doc = report_json(report);
    doc["config"] = evaluation_config_to_json(cfg);
    io::write_json_file(a.json_out, doc);
  }
  const auto& sum = report.summary;
  std::cerr << json{{"trials", sum.trials},
                    {"failures", sum.failures},
                    {"success_rate", sum.success_rate},
                    {"rot_err_rad_median", sum.rotation_rad.median},
                    {"trans_err_m_median", sum.translation_m.median}}
                   .dump()
            << '\n';
  return 0;
}

struct ServeArgs {
  std::string mesh;
  std::string annotations;
  std::string parts;
  std::string host = "127.0.0.1";
  int port = 7878;
  std::string static_dir;
};

int run_serve(const ServeArgs& a) {
  Session s = open_session(a.mesh, a.annotations, "", Need::Optional, Need::No);
  ServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  if (!a.static_dir.empty()) opts.static_dir = a.static_dir;
  ApiServer server(opts);
  server.load(std::move(s.mesh), a.parts);
  const int port = server.bind();
  std::cerr << json{{"listening", a.host + ":" + std::to_string(port)}}.dump() << std::endl;
  server.run();
  return 0;
}

void report_error(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canonmap: canonical-mapping pose pipeline"};
  app.require_subcommand(1);

  SynthMeshArgs synth_mesh;
  auto* c_synth = app.add_subcommand("synth-mesh", "write a built-in test mesh (and turtle parts)");
  c_synth->add_option("--shape", synth_mesh.shape)->check(CLI::IsMember({"turtle", "icosphere", "icosahedron"}));
  c_synth->add_option("--subdiv", synth_mesh.subdivisions)->check(CLI::Range(0, 7));
  c_synth->add_option("--radius", synth_mesh.radius)->check(CLI::PositiveNumber);
  c_synth->add_option("--out", synth_mesh.out, "mesh path (.obj or .ply)")->required();
  c_synth->add_option("--parts", synth_mesh.parts, "also write the six turtle parts here");

  AnnotateArgs annotate;
  auto* c_annot = app.add_subcommand("annotate", "frame, symmetry and spectral embeddings for a mesh");
  c_annot->add_option("--mesh", annotate.mesh)->required();
  c_annot->add_option("--out", annotate.out, "default <mesh>.annot.json");
  c_annot->add_option("--d", annotate.dims, "embedding dimension")->check(CLI::Range(2, 1024));
  c_annot->add_option("--symmetry-axis", annotate.symmetry_axis, "0, 1, 2, or -1 for best")->check(CLI::Range(-1, 2));
  c_annot->add_option("--dense-limit", annotate.dense_limit, "largest mesh solved with the dense eigensolver");
  c_annot->add_flag("--geodesic-cache", annotate.geodesic_cache, "also write the all-pairs table (<mesh>.geo.bin)");
  c_annot->add_option("--import-embeddings", annotate.import_embeddings, "use this embedding table instead");

  PartsArgs parts;
  auto* c_parts = app.add_subcommand("parts", "define, list and delete parts");
  c_parts->require_subcommand(1);
  auto* c_define = c_parts->add_subcommand("define", "grow a part from a seed vertex");
  auto* c_list = c_parts->add_subcommand("list", "list parts");
  auto* c_delete = c_parts->add_subcommand("delete", "delete a part");
  for (auto* c : {c_define, c_list, c_delete}) {
    c->add_option("--mesh", parts.mesh)->required();
    c->add_option("--parts", parts.parts)->required();
  }
  c_define->add_option("--seed", parts.seed)->required();
  c_define->add_option("--threshold", parts.threshold, "geodesic radius, meters")->required();
  c_define->add_option("--name", parts.name);
  c_define->add_flag("--dry-run", parts.dry_run, "print the group without saving");
  c_define->add_flag("--replace", parts.replace, "overwrite an existing part of the same name");
  c_delete->add_option("--name", parts.name)->required();

  SimulateArgs simulate;
  auto* c_sim = app.add_subcommand("simulate", "synthesize an observation with ground truth");
  c_sim->add_option("--mesh", simulate.mesh)->required();
  c_sim->add_option("--annotations", simulate.annotations);
  c_sim->add_option("--parts", simulate.parts);
  c_sim->add_option("--config", simulate.config, "scenario, scenario array, or evaluation config");
  c_sim->add_option("--seed", simulate.seed);
  c_sim->add_option("--trial", simulate.trial, "reproduce this trial of an evaluation config");
  c_sim->add_option("--out", simulate.out, "observation path (directory for scenario arrays)")->required();

  EstimateArgs estimate;
  auto* c_est = app.add_subcommand("estimate", "object and part poses from an observation");
  c_est->add_option("--mesh", estimate.mesh)->required();
  c_est->add_option("--annotations", estimate.annotations);
  c_est->add_option("--parts", estimate.parts);
  c_est->add_option("--observation", estimate.observation)->required();
  c_est->add_option("--out", estimate.out, "default stdout");
  c_est->add_option("--grasp", estimate.grasp, "part | mid | highest")->check(CLI::IsMember({"part", "mid", "highest"}));
  c_est->add_option("--grasp-part", estimate.grasp_part, "part name for --grasp part");
  estimate.match.add(c_est);

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "seeded batch of synthetic trials");
  c_eval->add_option("--mesh", evaluate.mesh)->required();
  c_eval->add_option("--annotations", evaluate.annotations);
  c_eval->add_option("--parts", evaluate.parts);
  c_eval->add_option("--config", evaluate.config);
  c_eval->add_option("--trials", evaluate.trials);
  c_eval->add_option("--seed", evaluate.seed);
  c_eval->add_option("--rot-thresh-deg", evaluate.rot_thresh_deg)->check(CLI::NonNegativeNumber);
  c_eval->add_option("--trans-thresh-m", evaluate.trans_thresh_m)->check(CLI::NonNegativeNumber);
  c_eval->add_option("--embedding-noise-rel", evaluate.noise_rel, "noise std as a multiple of the median NN distance")
      ->check(CLI::NonNegativeNumber);
  c_eval->add_option("--outlier-rate", evaluate.outlier_rate)->check(CLI::Range(0.0, 1.0));
  c_eval->add_option("--out", evaluate.out, "CSV report (default stdout)");
  c_eval->add_option("--json-out", evaluate.json_out, "JSON report with per-part errors and timing");
  evaluate.match.add(c_eval);

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "HTTP API for the part selector");
  c_serve->add_option("--mesh", serve.mesh)->required();
  c_serve->add_option("--annotations", serve.annotations);
  c_serve->add_option("--parts", serve.parts)->required();
  c_serve->add_option("--host", serve.host);
  c_serve->add_option("--port", serve.port)->check(CLI::Range(0, 65535));
  c_serve->add_option("--static", serve.static_dir, "directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*c_synth) return run_synth_mesh(synth_mesh);
    if (*c_annot) return run_annotate(annotate);
    if (*c_define) return run_parts_define(parts);
    if (*c_list) return run_parts_list(parts);
    if (*c_delete) return run_parts_delete(parts);
    if (*c_sim) return run_simulate(simulate);
    if (*c_est) {
      if (estimate.grasp == "part" && estimate.grasp_part.empty())
        throw Error(ErrorCode::ValidationError, "--grasp part needs --grasp-part");
      return run_estimate(estimate);
    }
    if (*c_eval) return run_evaluate(evaluate);
    if (*c_serve) return run_serve(serve);
  } catch (const Error& e) {
    report_error(to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 1;
  }
  return 1;
}
