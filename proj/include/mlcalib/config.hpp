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

#ifndef MLCALIB_CONFIG_HPP
#define MLCALIB_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "mlcalib/pipeline.hpp"

namespace mlcalib {

/// One run: how to build (or where to find) the data, and how to calibrate
/// it. Stored as JSON with the optional sections
///
///   scene, mounts, schedule, noise, perturbation,
///   filter, segmentation, optimizer, variant, seeds
///
/// Every field has a default; unknown keys are rejected. `mounts` is either
/// a preset name ("two" or "four") or a list of
///   {"translation": [x, y, z], "yaw_deg": a, "pitch_deg": b,
///    "fov_deg": f, "max_range": r}
/// in the platform base frame.
struct RunConfig {
  SimulationSettings simulation;
  PipelineParams pipeline;
  PipelineVariant variant = PipelineVariant::kProposed;

  /// Sets the scene, render and perturbation seeds together.
  void set_seed(std::uint64_t seed);
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
/// Fully populated JSON (defaults included); parse_config accepts it back.
std::string dump_config(const RunConfig& config);

}  // namespace mlcalib

#endif  // MLCALIB_CONFIG_HPP
