// Copyright 2026 The mfmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mfm/matrix.hpp"

namespace mfm {

enum class MitigationMethod { solve, project_solve };

struct MitigationResult {
  Distribution distribution;
  double condition_number = 0.0; // 1-norm estimate from the LU factors
  bool projected = false;
};

// Invert the readout kernel on an observed distribution. The kernel rows
// hold p(observed x_j | prepared x_i), so an observed column vector is
// K^T applied to the ideal one; we solve that transposed system.
// `project_solve` additionally clips negative entries and renormalizes.
inline MitigationResult mitigate(const Distribution &observed,
                                 const FidelityMatrix &K,
                                 MitigationMethod method) {
  if (observed.layout() != K.layout())
    throw validation_error("mitigate: distribution and kernel layouts "
                           "differ");
  const std::uint64_t d = K.dim();
  Eigen::MatrixXd At(static_cast<Eigen::Index>(d),
                     static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < d; ++i)
    for (std::uint64_t j = 0; j < d; ++j)
      At(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          K.at(i, j);
  Eigen::VectorXd q(static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < d; ++i)
    q(static_cast<Eigen::Index>(i)) = observed.at(i);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(At);
  // The estimate is NaN (not 0) when U picks up an exactly zero pivot, so
  // test the complement of "strictly positive".
  const double rcond = lu.rcond();
  Eigen::VectorXd x = lu.solve(q);
  if (!(rcond > 0.0) || !x.allFinite())
    throw numerical_error("mitigate: kernel is singular");

  MitigationResult result{
      Distribution(observed.layout(),
                   std::vector<double>(x.data(), x.data() + d),
                   /*raw=*/true),
      1.0 / rcond, false};

  if (method == MitigationMethod::project_solve) {
    std::vector<double> p(x.data(), x.data() + d);
    double mass = 0.0;
    for (double &v : p) {
      if (v < 0.0)
        v = 0.0;
      mass += v;
    }
    if (mass <= 0.0)
      throw numerical_error("mitigate: projected distribution has no mass");
    for (double &v : p)
      v /= mass;
    result.distribution = Distribution(observed.layout(), std::move(p));
    result.projected = true;
    return result;
  }

  // Plain solve: keep the exact solution. Negative round-off entries are
  // legitimate output here, so only validate when they are absent.
  bool clean = true;
  for (std::uint64_t i = 0; i < d; ++i)
    if (x(static_cast<Eigen::Index>(i)) < 0.0)
      clean = false;
  double total = x.sum();
  if (clean && std::abs(total - 1.0) <= kDefaultRowTolerance)
    result.distribution =
        Distribution(observed.layout(),
                     std::vector<double>(x.data(), x.data() + d));
  return result;
}

} // namespace mfm
