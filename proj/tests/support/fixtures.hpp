#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mvsel/rng.hpp"
#include "mvsel/speedup.hpp"

namespace mvsel::testing {

// The three-dataset toy matrix: v1 = (2, 1, 1), v2 = (1, 2, 1),
// v3 = (1.5, 1.5, 1); baseline v0. Code sizes 100/200/300 for v1..v3.
inline SpeedupMatrix toy_matrix() {
  return SpeedupMatrix::from_speedups(0, {0, 1, 2, 3}, {1000, 100, 200, 300}, {1, 2, 3},
                                      {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1.5, 1.5, 1}});
}

// Random matrix with log-uniform speedups in [0.5, 2] and sizes in [1, 1000].
inline SpeedupMatrix random_matrix(Rng& rng, std::size_t candidates, std::size_t datasets) {
  std::vector<VersionId> ids;
  std::vector<std::uint64_t> sizes;
  std::vector<std::vector<double>> rows;
  for (std::size_t v = 0; v <= candidates; ++v) {
    ids.push_back(static_cast<VersionId>(v));
    sizes.push_back(1 + rng.below(1000));
    std::vector<double> row(datasets, 1.0);
    if (v != 0) {
      for (auto& s : row) s = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    }
    rows.push_back(std::move(row));
  }
  std::vector<DatasetId> dids(datasets);
  for (std::size_t d = 0; d < datasets; ++d) dids[d] = static_cast<DatasetId>(d);
  return SpeedupMatrix::from_speedups(0, ids, sizes, dids, rows);
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mvsel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace mvsel::testing
