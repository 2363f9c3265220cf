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

#ifndef MLCALIB_REPORT_HPP
#define MLCALIB_REPORT_HPP

#include <filesystem>
#include <string>

#include "mlcalib/pipeline.hpp"

namespace mlcalib {

std::string report_to_json(const RunReport& report);
RunReport parse_report(const std::string& json_text);
RunReport load_report(const std::filesystem::path& path);

/// Tab-separated, one row per outer iteration:
///   iteration cost correspondences [translation_error_m rotation_error_deg]
/// The error columns appear only when the report has ground truth.
std::string cost_trace_table(const RunReport& report);

/// Writes <dir>/report.json and <dir>/cost_trace.tsv, creating `dir`.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace mlcalib

#endif  // MLCALIB_REPORT_HPP
