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

#ifndef MLCALIB_CLOUD_IO_HPP
#define MLCALIB_CLOUD_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mlcalib/geometry.hpp"
#include "mlcalib/pipeline.hpp"

namespace mlcalib {

// Cloud files are plain text:
//
//   # columns: x y z label
//   0.5 -0.25 1 surface
//   ...
//
// The label column is optional (header `# columns: x y z`); labels are
// `surface` or `noise`. Values are written with 17 significant digits so a
// save/load round trip is exact. Rows are in acquisition order; acquisition
// indices are not stored.

class CloudParseError : public Error {
 public:
  CloudParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

PointCloud read_cloud(std::istream& in, const std::string& source = "<stream>");
void write_cloud(const PointCloud& cloud, std::ostream& out);

PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

// A dataset directory holds
//   dataset.json       sensor/timestamp counts, up_reference, initial C and S
//   ground_truth.json  true C and S (optional)
//   clouds/s<i>_t<j>.txt
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace mlcalib

#endif  // MLCALIB_CLOUD_IO_HPP
