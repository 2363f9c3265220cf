// Copyright 2026 The mlcalib Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlcalib/report.hpp"

#include <cstdio>
#include <sstream>

#include "json_util.hpp"

namespace mlcalib {
namespace {

using detail::json;

json errors_to_json(const ExtrinsicErrors& e) {
  return {{"translation_m", e.translation_m},
          {"rotation_deg", e.rotation_deg},
          {"mean_translation_m", e.mean_translation_m},
          {"mean_rotation_deg", e.mean_rotation_deg}};
}

ExtrinsicErrors errors_from_json(const json& j) {
  ExtrinsicErrors e;
  e.translation_m = j.at("translation_m").get<std::vector<double>>();
  e.rotation_deg = j.at("rotation_deg").get<std::vector<double>>();
  e.mean_translation_m = j.at("mean_translation_m").get<double>();
  e.mean_rotation_deg = j.at("mean_rotation_deg").get<double>();
  return e;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json j = {
      {"variant", to_string(r.variant)},
      {"extrinsics", detail::poses_to_json(r.extrinsics.transforms)},
      {"trajectory", detail::poses_to_json(r.trajectory.poses)},
      {"metric_error", {{"before", r.metric_error_before}, {"after", r.metric_error_after}}},
      {"cost_trace", r.cost_trace},
      {"correspondence_counts", r.correspondence_counts},
      {"final_cost", r.final_cost},
      {"iterations", r.iterations},
      {"convergence_reason", r.convergence_reason},
      {"wall_clock_s", r.wall_clock_s},
  };
  if (r.initial_errors && r.final_errors) {
    j["errors"] = {{"initial", errors_to_json(*r.initial_errors)},
                   {"final", errors_to_json(*r.final_errors)},
                   {"translation_trace_m", r.translation_error_trace},
                   {"rotation_trace_deg", r.rotation_error_trace}};
  }
  if (r.filter_score) {
    const FilterScore& f = *r.filter_score;
    j["filter"] = {{"precision", f.precision},
                   {"recall", f.recall},
                   {"f_score", f.f_score},
                   {"true_positives", f.true_positives},
                   {"false_positives", f.false_positives},
                   {"false_negatives", f.false_negatives}};
  }
  return j.dump(2) + "\n";
}

RunReport parse_report(const std::string& json_text) {
  RunReport r;
  try {
    const json j = json::parse(json_text);
    r.variant = variant_from_string(j.at("variant").get<std::string>());
    r.extrinsics.transforms = detail::poses_from_json(j.at("extrinsics"), "extrinsics");
    r.trajectory.poses = detail::poses_from_json(j.at("trajectory"), "trajectory");
    r.metric_error_before = j.at("metric_error").at("before").get<double>();
    r.metric_error_after = j.at("metric_error").at("after").get<double>();
    r.cost_trace = j.at("cost_trace").get<std::vector<double>>();
    r.correspondence_counts = j.at("correspondence_counts").get<std::vector<std::size_t>>();
    r.final_cost = j.at("final_cost").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.convergence_reason = j.at("convergence_reason").get<std::string>();
    r.wall_clock_s = j.at("wall_clock_s").get<double>();
    if (j.contains("errors")) {
      const json& e = j.at("errors");
      r.initial_errors = errors_from_json(e.at("initial"));
      r.final_errors = errors_from_json(e.at("final"));
      r.translation_error_trace = e.at("translation_trace_m").get<std::vector<double>>();
      r.rotation_error_trace = e.at("rotation_trace_deg").get<std::vector<double>>();
    }
    if (j.contains("filter")) {
      const json& f = j.at("filter");
      FilterScore s;
      s.precision = f.at("precision").get<double>();
      s.recall = f.at("recall").get<double>();
      s.f_score = f.at("f_score").get<double>();
      s.true_positives = f.at("true_positives").get<std::size_t>();
      s.false_positives = f.at("false_positives").get<std::size_t>();
      s.false_negatives = f.at("false_negatives").get<std::size_t>();
      r.filter_score = s;
    }
  } catch (const json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
  return r;
}

RunReport load_report(const std::filesystem::path& path) {
  return parse_report(detail::read_json_file(path).dump());
}

std::string cost_trace_table(const RunReport& r) {
  const bool with_errors = r.initial_errors.has_value();
  std::ostringstream out;
  out << "iteration\tcost\tcorrespondences";
  if (with_errors) out << "\ttranslation_error_m\trotation_error_deg";
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < r.cost_trace.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.cost_trace[k]);
    out << k + 1 << '\t' << buf << '\t'
        << (k < r.correspondence_counts.size() ? r.correspondence_counts[k] : 0);
    if (with_errors) {
      const double t = k < r.translation_error_trace.size() ? r.translation_error_trace[k] : 0.0;
      const double a = k < r.rotation_error_trace.size() ? r.rotation_error_trace[k] : 0.0;
      std::snprintf(buf, sizeof(buf), "\t%.17g\t%.17g", t, a);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  detail::write_text_file(dir / "report.json", report_to_json(report));
  detail::write_text_file(dir / "cost_trace.tsv", cost_trace_table(report));
}

}  // namespace mlcalib
