#include "canonmap/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "canonmap/error.hpp"
#include "canonmap/io.hpp"
#include "canonmap/parallel.hpp"

namespace canonmap {
namespace {

constexpr double kPi = 3.14159265358979323846;

// splitmix64 finalizer; decorrelates per-trial seeds from the master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ErrorStats stats(std::vector<double> v) {
  ErrorStats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.median = percentile(v, 0.5);
  s.p95 = percentile(std::move(v), 0.95);
  return s;
}

nlohmann::json stats_json(const ErrorStats& s) { return {{"mean", s.mean}, {"median", s.median}, {"p95", s.p95}}; }

}  // namespace

EvaluationConfig evaluation_config_from_json(const nlohmann::json& j) {
  try {
    EvaluationConfig cfg;
    if (j.contains("scenario")) cfg.base = io::scenario_from_json(j.at("scenario"));
    if (j.contains("sampling")) {
      const auto& s = j.at("sampling");
      if (s.contains("yaw_range_deg")) cfg.sampling.yaw_range_rad = s.at("yaw_range_deg").get<double>() * kPi / 180.0;
      if (s.contains("max_tilt_deg")) cfg.sampling.max_tilt_rad = s.at("max_tilt_deg").get<double>() * kPi / 180.0;
      cfg.sampling.xy_radius_m = s.value("xy_radius_m", cfg.sampling.xy_radius_m);
    }
    cfg.trials = j.value("trials", cfg.trials);
    cfg.master_seed = j.value("seed", cfg.master_seed);
    if (j.contains("rot_thresh_deg")) cfg.rot_thresh_rad = j.at("rot_thresh_deg").get<double>() * kPi / 180.0;
    cfg.trans_thresh_m = j.value("trans_thresh_m", cfg.trans_thresh_m);
    if (j.contains("embedding_noise_rel")) cfg.embedding_noise_rel = j.at("embedding_noise_rel").get<double>();
    if (j.contains("pose")) {
      const auto& p = j.at("pose");
      cfg.pose.match.k = p.value("k", cfg.pose.match.k);
      if (p.contains("theta0")) cfg.pose.match.max_dist = p.at("theta0").get<double>();
      if (p.contains("theta1")) cfg.pose.match.outlier_max_dist = p.at("theta1").get<double>();
      if (p.contains("depth_mode")) cfg.pose.depth_mode = depth_mode_from_string(p.at("depth_mode").get<std::string>());
      cfg.pose.min_part_pixels = p.value("min_part_pixels", cfg.pose.min_part_pixels);
      cfg.pose.robust = p.value("robust", cfg.pose.robust);
    }
    if (cfg.trials < 1) throw Error(ErrorCode::ValidationError, "trials must be >= 1");
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("evaluation config: ") + e.what());
  }
}

nlohmann::json evaluation_config_to_json(const EvaluationConfig& cfg) {
  nlohmann::json pose = {{"k", cfg.pose.match.k},
                         {"depth_mode", std::string(to_string(cfg.pose.depth_mode))},
                         {"min_part_pixels", cfg.pose.min_part_pixels},
                         {"robust", cfg.pose.robust}};
  if (cfg.pose.match.max_dist) pose["theta0"] = *cfg.pose.match.max_dist;
  if (cfg.pose.match.outlier_max_dist) pose["theta1"] = *cfg.pose.match.outlier_max_dist;
  nlohmann::json j = {{"scenario", io::scenario_to_json(cfg.base)},
                      {"sampling",
                       {{"yaw_range_deg", cfg.sampling.yaw_range_rad * 180.0 / kPi},
                        {"max_tilt_deg", cfg.sampling.max_tilt_rad * 180.0 / kPi},
                        {"xy_radius_m", cfg.sampling.xy_radius_m}}},
                      {"trials", cfg.trials},
                      {"seed", cfg.master_seed},
                      {"rot_thresh_deg", cfg.rot_thresh_rad * 180.0 / kPi},
                      {"trans_thresh_m", cfg.trans_thresh_m},
                      {"pose", std::move(pose)}};
  if (cfg.embedding_noise_rel) j["embedding_noise_rel"] = *cfg.embedding_noise_rel;
  return j;
}

ScenarioConfig sample_scenario(const EvaluationConfig& cfg, double nn_median, int index) {
  ScenarioConfig s = cfg.base;
  const std::uint64_t seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Draw order is fixed; do not reorder.
  const double yaw = (unit(rng) - 0.5) * cfg.sampling.yaw_range_rad;
  const double tilt_dir = unit(rng) * 2.0 * kPi;
  const double tilt = unit(rng) * cfg.sampling.max_tilt_rad;
  const double radius = std::sqrt(unit(rng)) * cfg.sampling.xy_radius_m;
  const double heading = unit(rng) * 2.0 * kPi;

  const Eigen::Matrix3d r = axis_angle_rotation({std::cos(tilt_dir), std::sin(tilt_dir), 0.0}, tilt) *
                            axis_angle_rotation(Eigen::Vector3d::UnitZ(), yaw);
  const RigidPose perturb(r, {radius * std::cos(heading), radius * std::sin(heading), 0.0});
  const RigidPose base_world = cfg.base.extrinsics ? *cfg.base.extrinsics * cfg.base.object_pose : cfg.base.object_pose;
  const RigidPose world = perturb * base_world;
  s.object_pose = cfg.base.extrinsics ? cfg.base.extrinsics->inverse() * world : world;
  s.rng_seed = seed;
  s.name = cfg.base.name + "-" + std::to_string(index);
  if (cfg.embedding_noise_rel) s.embedding_noise = *cfg.embedding_noise_rel * nn_median;
  return s;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

EvaluationSummary summarize(std::span<const TrialRow> rows, double rot_thresh_rad, double trans_thresh_m) {
  EvaluationSummary s;
  s.trials = static_cast<int>(rows.size());
  std::vector<double> rot, trans;
  for (const auto& row : rows) {
    if (!row.ok) {
      ++s.failures;
      continue;
    }
    rot.push_back(row.rotation_rad);
    trans.push_back(row.translation_m);
    if (row.rotation_rad < rot_thresh_rad && row.translation_m < trans_thresh_m) ++s.successes;
  }
  s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  s.rotation_rad = stats(std::move(rot));
  s.translation_m = stats(std::move(trans));
  return s;
}

EvaluationReport run_evaluation(const CanonicalMesh& mesh, const VertexEmbeddingTable& table, double nn_median,
                                std::span<const PartDefinition> parts, const EvaluationConfig& cfg) {
  EvaluationReport report;
  report.rot_thresh_rad = cfg.rot_thresh_rad;
  report.trans_thresh_m = cfg.trans_thresh_m;
  report.rows.resize(static_cast<std::size_t>(cfg.trials));

  parallel_for(report.rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      TrialRow& row = report.rows[i];
      row.trial = static_cast<int>(i);
      const auto start = std::chrono::steady_clock::now();
      try {
        const ScenarioConfig scenario = sample_scenario(cfg, nn_median, row.trial);
        row.seed = scenario.rng_seed;
        const SyntheticObservation synth = generate_observation(mesh, table, parts, scenario);
        row.pixels = static_cast<int>(synth.observation.pixel_count());
        const PoseResult result = solve_poses(synth.observation, mesh, table, parts, cfg.pose, nn_median);
        const PoseError err = pose_error(result.object_pose, synth.true_object_pose);
        row.ok = true;
        row.rotation_rad = err.rotation_rad;
        row.translation_m = err.translation_m;
        row.residual_rms = result.residual_rms;
        row.kept_pixels = result.kept_pixels;
        row.inliers = result.inlier_count;
        for (const auto& part : result.parts) {
          PartErrorRow pr{part.name, std::string(to_string(part.mode)), part.pixels, 0.0, 0.0};
          for (const auto& truth : synth.true_part_poses) {
            if (truth.name != part.name) continue;
            const PoseError pe = pose_error(part.pose, truth.pose);
            pr.rotation_rad = pe.rotation_rad;
            pr.translation_m = pe.translation_m;
          }
          row.parts.push_back(std::move(pr));
        }
      } catch (const Error& e) {
        row.ok = false;
        row.error = std::string(to_string(e.code()));
      }
      row.elapsed_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  });

  report.summary = summarize(report.rows, cfg.rot_thresh_rad, cfg.trans_thresh_m);
  return report;
}

std::string report_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# " << kReportCsvVersion << '\n';
  out << "trial,seed,status,rot_err_rad,trans_err_m,residual_rms_m,pixels,kept_pixels,inliers,fitted_parts,"
         "fallback_parts,success\n";
  for (const auto& row : report.rows) {
    int fitted = 0;
    for (const auto& p : row.parts) fitted += p.mode == "fitted";
    const bool success = row.ok && row.rotation_rad < report.rot_thresh_rad && row.translation_m < report.trans_thresh_m;
    out << row.trial << ',' << row.seed << ',' << (row.ok ? "ok" : row.error) << ',' << fmt(row.rotation_rad) << ','
        << fmt(row.translation_m) << ',' << fmt(row.residual_rms) << ',' << row.pixels << ',' << row.kept_pixels << ','
        << row.inliers << ',' << fitted << ',' << static_cast<int>(row.parts.size()) - fitted << ',' << (success ? 1 : 0)
        << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const EvaluationReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : row.parts)
      parts.push_back({{"name", p.name},
                       {"mode", p.mode},
                       {"pixels", p.pixels},
                       {"rot_err_rad", p.rotation_rad},
                       {"trans_err_m", p.translation_m}});
    nlohmann::json r = {{"trial", row.trial},
                        {"seed", row.seed},
                        {"status", row.ok ? "ok" : row.error},
                        {"rot_err_rad", row.rotation_rad},
                        {"trans_err_m", row.translation_m},
                        {"residual_rms_m", row.residual_rms},
                        {"pixels", row.pixels},
                        {"kept_pixels", row.kept_pixels},
                        {"inliers", row.inliers},
                        {"elapsed_ms", row.elapsed_ms},
                        {"parts", std::move(parts)}};
    rows.push_back(std::move(r));
  }
  const auto& s = report.summary;
  return {{"version", kReportCsvVersion},
          {"thresholds", {{"rot_rad", report.rot_thresh_rad}, {"trans_m", report.trans_thresh_m}}},
          {"summary",
           {{"trials", s.trials},
            {"failures", s.failures},
            {"successes", s.successes},
            {"success_rate", s.success_rate},
            {"rot_err_rad", stats_json(s.rotation_rad)},
            {"trans_err_m", stats_json(s.translation_m)}}},
          {"rows", std::move(rows)}};
}

}  // namespace canonmap
