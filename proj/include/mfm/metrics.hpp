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

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfm/cumulant.hpp"
#include "mfm/matrix.hpp"

namespace mfm {

struct MetricReport {
  double dist_identity = 0.0;
  std::optional<double> dist_reference;
  std::optional<double> delta_f;
  int n_qubits = 0;
  double white_noise_bound = 0.0;
};

struct UncertaintyReport {
  std::vector<double> sigma_lambda;
  double sigma_scf = 0.0;
  double scf = 0.0;
  bool significant = false;
};

inline double dist_from_identity(const FidelityMatrix &K) {
  const std::uint64_t d = K.dim();
  double s = 0.0;
  for (std::uint64_t i = 0; i < d; ++i)
    for (std::uint64_t j = 0; j < d; ++j) {
      double v = K.at(i, j) - (i == j ? 1.0 : 0.0);
      s += v * v;
    }
  return std::sqrt(s);
}

inline double dist_between(const FidelityMatrix &K1,
                           const FidelityMatrix &K2) {
  if (K1.layout() != K2.layout())
    throw validation_error("dist_between: layouts differ (permute one "
                           "operand first)");
  const std::uint64_t d = K1.dim();
  double s = 0.0;
  for (std::uint64_t k = 0; k < d * d; ++k) {
    double v = K1.entries()[k] - K2.entries()[k];
    s += v * v;
  }
  return std::sqrt(s);
}

// RMSE of the diagonal (state fidelity) differences.
inline double delta_f(const FidelityMatrix &K1, const FidelityMatrix &K2) {
  if (K1.dim() != K2.dim())
    throw validation_error("delta_f: dimension mismatch");
  const std::uint64_t d = K1.dim();
  double s = 0.0;
  for (std::uint64_t i = 0; i < d; ++i) {
    double v = K1.at(i, i) - K2.at(i, i);
    s += v * v;
  }
  return std::sqrt(s / static_cast<double>(d));
}

// Distance from identity of the fully depolarized (uniform-row) kernel,
// the natural scale for dist_from_identity.
inline double white_noise_bound(int n) {
  if (n < 1)
    throw validation_error("white_noise_bound: n must be >= 1");
  return std::sqrt(std::pow(2.0, n) - 1.0);
}

// Shot-noise scale of a single estimated probability, as p(1-p)/n_s.
inline double sigma_p(double p, std::uint64_t n_s) {
  if (p < 0.0 || p > 1.0)
    throw validation_error("sigma_p: p outside [0, 1]");
  if (n_s < 1)
    throw validation_error("sigma_p: n_s must be >= 1");
  return p * (1.0 - p) / static_cast<double>(n_s);
}

// Upper bound on the uncertainty of one pair-cumulant entry.
inline double sigma_lambda_bound(double p_ab, double p_a, double p_b,
                                 std::uint64_t n_s) {
  if (p_ab < 0.0 || p_ab > 1.0 || p_a < 0.0 || p_a > 1.0 || p_b < 0.0 ||
      p_b > 1.0)
    throw validation_error("sigma_lambda_bound: probability outside [0, 1]");
  if (n_s < 1)
    throw validation_error("sigma_lambda_bound: n_s must be >= 1");
  return std::sqrt((p_ab + p_a + p_b) / static_cast<double>(n_s));
}

// Upper bound on the uncertainty of the scalar correlation factor:
// sqrt(sum lambda^2 sigma^2) / Lambda. A zero tensor makes that
// expression undefined, so fall back to the RMS of the per-entry sigmas;
// zero-SCF tensors can never be significant under the strict rule, so the
// fallback only has to be finite and conservative.
inline double sigma_scf_bound(const CumulantTensor &lambda) {
  if (!lambda.has_sigma())
    throw validation_error("sigma_scf_bound: tensor has no sigma array");
  double norm_sq = 0.0, weighted = 0.0, sigma_sq = 0.0;
  const auto &v = lambda.values();
  const auto &s = lambda.sigma();
  for (std::size_t k = 0; k < v.size(); ++k) {
    norm_sq += v[k] * v[k];
    weighted += v[k] * v[k] * s[k] * s[k];
    sigma_sq += s[k] * s[k];
  }
  if (norm_sq == 0.0)
    return std::sqrt(sigma_sq / static_cast<double>(v.size()));
  return std::sqrt(weighted / norm_sq);
}

inline bool significance(double scf, double sigma_scf) {
  if (scf < 0.0 || sigma_scf < 0.0)
    throw validation_error("significance: inputs must be >= 0");
  return scf > sigma_scf;
}

inline MetricReport
make_metric_report(const FidelityMatrix &K,
                   const std::optional<FidelityMatrix> &reference =
                       std::nullopt) {
  MetricReport r;
  r.dist_identity = dist_from_identity(K);
  r.n_qubits = K.width();
  r.white_noise_bound = white_noise_bound(K.width());
  if (reference) {
    r.dist_reference = dist_between(K, *reference);
    r.delta_f = delta_f(K, *reference);
  }
  return r;
}

inline UncertaintyReport make_uncertainty_report(const CumulantTensor &lambda) {
  UncertaintyReport r;
  r.sigma_lambda = lambda.sigma();
  r.scf = lambda.frobenius();
  r.sigma_scf = sigma_scf_bound(lambda);
  r.significant = significance(r.scf, r.sigma_scf);
  return r;
}

struct PairStat {
  double scf = 0.0;
  double sigma = 0.0;
};

// Symmetric n x n matrix (row-major, indexed by layout position) of the
// statistically significant correlation strengths. Insignificant pairs
// clamp to zero; `literal_absolute` instead records |scf - sigma|, which
// renders insignificant pairs as nonzero.
inline std::vector<double>
correlation_heatmap(const QubitLayout &layout,
                    const std::map<std::pair<int, int>, PairStat> &pair_results,
                    bool literal_absolute = false) {
  const int n = layout.width();
  std::vector<double> heat(static_cast<std::size_t>(n) * n, 0.0);
  std::size_t expected = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (pair_results.size() != expected)
    throw validation_error("correlation_heatmap: expected one entry per "
                           "unordered pair");
  for (const auto &[key, stat] : pair_results) {
    auto [a, b] = key;
    if (a < 0 || b < 0 || a >= n || b >= n || a >= b)
      throw validation_error("correlation_heatmap: pair key must be "
                             "ascending layout positions");
    double v = literal_absolute ? std::abs(stat.scf - stat.sigma)
                                : std::max(stat.scf - stat.sigma, 0.0);
    heat[static_cast<std::size_t>(a) * n + b] = v;
    heat[static_cast<std::size_t>(b) * n + a] = v;
  }
  return heat;
}

} // namespace mfm
