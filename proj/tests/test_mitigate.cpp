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

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace mfm;
using Catch::Matchers::WithinAbs;

namespace {

// Push an ideal distribution through the kernel: q_obs(j) = sum_i q(i) K(i,j).
Distribution apply_kernel(const Distribution &ideal, const FidelityMatrix &K) {
  std::vector<double> q(K.dim(), 0.0);
  for (std::uint64_t i = 0; i < K.dim(); ++i)
    for (std::uint64_t j = 0; j < K.dim(); ++j)
      q[j] += ideal.at(i) * K.at(i, j);
  return Distribution(ideal.layout(), std::move(q), /*raw=*/true);
}

} // namespace

TEST_CASE("an identity kernel leaves the distribution alone", "[mitigate]") {
  QubitLayout q({0, 1});
  Distribution obs(q, {0.4, 0.3, 0.2, 0.1});
  auto result = mitigate(obs, FidelityMatrix::identity(q),
                         MitigationMethod::solve);
  for (std::uint64_t i = 0; i < 4; ++i)
    REQUIRE_THAT(result.distribution.at(i), WithinAbs(obs.at(i), 1e-14));
  REQUIRE_THAT(result.condition_number, WithinAbs(1.0, 1e-12));
  REQUIRE_FALSE(result.projected);
  REQUIRE_FALSE(result.distribution.is_raw());
}

TEST_CASE("solving inverts a forward application of the kernel",
          "[mitigate]") {
  std::mt19937_64 rng(31415);
  QubitLayout q({0, 1, 2});
  auto K = testutil::random_stochastic(q, rng, 0.005);
  // Draw a random ideal distribution.
  std::vector<double> p(8);
  double mass = 0.0;
  for (double &v : p) {
    v = testutil::uniform(rng, 0.01, 1.0);
    mass += v;
  }
  for (double &v : p)
    v /= mass;
  Distribution ideal(q, p);

  auto result = mitigate(apply_kernel(ideal, K), K,
                         MitigationMethod::solve);
  for (std::uint64_t i = 0; i < 8; ++i)
    REQUIRE_THAT(result.distribution.at(i), WithinAbs(ideal.at(i), 1e-10));
  REQUIRE(result.condition_number >= 1.0);
}

TEST_CASE("point masses survive the round trip", "[mitigate]") {
  QubitLayout q({0, 1});
  FidelityMatrix K = FidelityMatrix::checked(
      q, {0.92, 0.04, 0.03, 0.01, 0.02, 0.93, 0.01, 0.04, 0.05, 0.01, 0.91,
          0.03, 0.01, 0.03, 0.02, 0.94});
  for (std::uint64_t s = 0; s < 4; ++s) {
    std::vector<double> e(4, 0.0);
    e[s] = 1.0;
    Distribution ideal(q, e);
    auto result = mitigate(apply_kernel(ideal, K), K,
                           MitigationMethod::solve);
    for (std::uint64_t i = 0; i < 4; ++i)
      REQUIRE_THAT(result.distribution.at(i),
                   WithinAbs(i == s ? 1.0 : 0.0, 1e-12));
  }
}

TEST_CASE("a plain solve may report signed quasi-probabilities",
          "[mitigate]") {
  // The observed point mass (0,1) lies outside the image of the simplex
  // under this kernel, so the exact solution has a negative entry.
  QubitLayout q({0});
  auto K = FidelityMatrix::checked(q, {0.9, 0.1, 0.2, 0.8});
  Distribution obs(q, {0.0, 1.0});
  auto result = mitigate(obs, K, MitigationMethod::solve);
  REQUIRE_THAT(result.distribution.at(0),
               WithinAbs(-0.2857142857142857, 1e-12));
  REQUIRE_THAT(result.distribution.at(1),
               WithinAbs(1.2857142857142858, 1e-12));
  REQUIRE(result.distribution.is_raw());
  REQUIRE_FALSE(result.projected);
}

TEST_CASE("project-solve clips and renormalizes", "[mitigate]") {
  QubitLayout q({0});
  auto K = FidelityMatrix::checked(q, {0.9, 0.1, 0.2, 0.8});
  Distribution obs(q, {0.0, 1.0});
  auto result = mitigate(obs, K, MitigationMethod::project_solve);
  REQUIRE_THAT(result.distribution.at(0), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(result.distribution.at(1), WithinAbs(1.0, 1e-15));
  REQUIRE(result.projected);
  REQUIRE_FALSE(result.distribution.is_raw());
  REQUIRE_NOTHROW(result.distribution.validate());
}

TEST_CASE("project-solve output is always a valid distribution",
          "[mitigate]") {
  std::mt19937_64 rng(2718);
  QubitLayout q({0, 1});
  for (int t = 0; t < 30; ++t) {
    auto K = testutil::random_stochastic(q, rng, 0.002);
    std::vector<double> obs(4);
    double mass = 0.0;
    for (double &v : obs) {
      v = testutil::uniform(rng, 0.0, 1.0);
      mass += v;
    }
    for (double &v : obs)
      v /= mass;
    auto result = mitigate(Distribution(q, obs), K,
                           MitigationMethod::project_solve);
    double total = 0.0;
    for (std::uint64_t i = 0; i < 4; ++i) {
      REQUIRE(result.distribution.at(i) >= 0.0);
      total += result.distribution.at(i);
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("a singular kernel raises a numerical error", "[mitigate]") {
  QubitLayout q({0, 1});
  Distribution obs(q, {0.25, 0.25, 0.25, 0.25});
  REQUIRE_THROWS_AS(mitigate(obs, FidelityMatrix::uniform(q),
                             MitigationMethod::solve),
                    numerical_error);
  REQUIRE_THROWS_AS(mitigate(obs, FidelityMatrix::uniform(q),
                             MitigationMethod::project_solve),
                    numerical_error);
}

TEST_CASE("mismatched layouts are rejected", "[mitigate]") {
  Distribution obs(QubitLayout({0}), {0.5, 0.5});
  auto K = FidelityMatrix::identity(QubitLayout({0, 1}));
  REQUIRE_THROWS_AS(mitigate(obs, K, MitigationMethod::solve),
                    validation_error);
  auto renamed = FidelityMatrix::identity(QubitLayout({7}));
  REQUIRE_THROWS_AS(mitigate(obs, renamed, MitigationMethod::solve),
                    validation_error);
}

TEST_CASE("the condition number grows as the kernel degrades",
          "[mitigate]") {
  QubitLayout q({0});
  Distribution obs(q, {0.5, 0.5});
  auto crisp = mitigate(obs, FidelityMatrix::checked(q, {0.99, 0.01, 0.01,
                                                         0.99}),
                        MitigationMethod::solve);
  auto fuzzy = mitigate(obs, FidelityMatrix::checked(q, {0.55, 0.45, 0.45,
                                                         0.55}),
                        MitigationMethod::solve);
  REQUIRE(crisp.condition_number >= 1.0);
  REQUIRE(fuzzy.condition_number > 5.0 * crisp.condition_number);
}
