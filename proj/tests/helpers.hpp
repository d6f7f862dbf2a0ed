// Copyright 2026 The mfmkit Authors
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

#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfm/mfm.hpp"

namespace testutil {

// Deterministic uniform double in [0, 1) from a raw engine; avoids
// std::uniform_real_distribution, whose output is not pinned by the
// standard across implementations.
inline double canon(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64 &rng, double lo, double hi) {
  return lo + (hi - lo) * canon(rng);
}

// Random row-stochastic matrix with every entry >= min_entry after
// normalization (draws are shifted before normalizing).
inline mfm::FidelityMatrix random_stochastic(const mfm::QubitLayout &layout,
                                             std::mt19937_64 &rng,
                                             double min_entry = 0.0) {
  const std::uint64_t d = 1ull << layout.width();
  std::vector<double> e(d * d);
  for (std::uint64_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::uint64_t j = 0; j < d; ++j) {
      double v = min_entry + canon(rng);
      e[i * d + j] = v;
      s += v;
    }
    for (std::uint64_t j = 0; j < d; ++j)
      e[i * d + j] /= s;
  }
  return mfm::FidelityMatrix::checked(layout, std::move(e));
}

// Random 1-qubit kernel with both diagonal entries in [lo, hi].
inline mfm::FidelityMatrix random_single(int qubit, std::mt19937_64 &rng,
                                         double lo = 0.8, double hi = 0.99) {
  const double f0 = uniform(rng, lo, hi);
  const double f1 = uniform(rng, lo, hi);
  return mfm::FidelityMatrix::checked(mfm::QubitLayout({qubit}),
                                      {f0, 1.0 - f0, 1.0 - f1, f1});
}

inline double max_abs_diff(const mfm::FidelityMatrix &a,
                           const mfm::FidelityMatrix &b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k)
    m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
  return m;
}

// Self-deleting scratch directory for CLI round trips.
class TempDir {
public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate =
          base / ("mfmkit-test-" + std::to_string(counter_++) + "-" +
                  std::to_string(::getpid()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("TempDir: could not create scratch directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::string file(const std::string &name) const {
    return (path_ / name).string();
  }

private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline std::string slurp(const std::string &path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run the CLI in-process and capture exit code and both streams.
struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code = mfm::cli::run(args, out, err);
  return CliResult{code, out.str(), err.str()};
}

} // namespace testutil
