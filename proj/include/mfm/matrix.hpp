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
#include <utility>
#include <vector>

#include "mfm/bits.hpp"
#include "mfm/errors.hpp"

namespace mfm {

// Dense matrices are capped at 12 qubits (4096 x 4096 doubles).
inline constexpr int kMaxDenseWidth = 12;

inline constexpr double kDefaultRowTolerance = 1e-9;

// Row-stochastic matrix of conditional probabilities p(observed x_j |
// prepared x_i) over a layout. Entry (i, j) lives at row i, column j of a
// row-major buffer of dimension 2^width.
//
// Matrices built by the stochastic constructors are validated: entries in
// [0, 1] and row sums within row_tolerance of 1. Reconstructions may
// violate both; those carry raw = true and skip validation so diagnostics
// see the unmodified values.
class FidelityMatrix {
public:
  static FidelityMatrix checked(QubitLayout layout,
                                std::vector<double> entries,
                                double row_tolerance = kDefaultRowTolerance) {
    FidelityMatrix m(std::move(layout), std::move(entries), false,
                     row_tolerance);
    m.validate();
    return m;
  }

  static FidelityMatrix raw(QubitLayout layout, std::vector<double> entries) {
    return FidelityMatrix(std::move(layout), std::move(entries), true,
                          kDefaultRowTolerance);
  }

  static FidelityMatrix identity(QubitLayout layout) {
    std::uint64_t d = dim_for(layout);
    std::vector<double> e(d * d, 0.0);
    for (std::uint64_t i = 0; i < d; ++i)
      e[i * d + i] = 1.0;
    return FidelityMatrix(std::move(layout), std::move(e), false,
                          kDefaultRowTolerance);
  }

  // White-noise kernel: every row uniform over all outcomes.
  static FidelityMatrix uniform(QubitLayout layout) {
    std::uint64_t d = dim_for(layout);
    std::vector<double> e(d * d, 1.0 / static_cast<double>(d));
    return FidelityMatrix(std::move(layout), std::move(e), false,
                          kDefaultRowTolerance);
  }

  const QubitLayout &layout() const { return layout_; }
  int width() const { return layout_.width(); }
  std::uint64_t dim() const { return 1ull << layout_.width(); }
  bool is_raw() const { return raw_; }
  double row_tolerance() const { return row_tolerance_; }

  double at(std::uint64_t i, std::uint64_t j) const {
    return entries_[i * dim() + j];
  }
  double &at(std::uint64_t i, std::uint64_t j) {
    return entries_[i * dim() + j];
  }
  const std::vector<double> &entries() const { return entries_; }

  double row_sum(std::uint64_t i) const {
    double s = 0.0;
    for (std::uint64_t j = 0; j < dim(); ++j)
      s += at(i, j);
    return s;
  }

  // Diagonal entry f_i: probability of observing the prepared state.
  double fidelity(std::uint64_t i) const { return at(i, i); }

  void validate() const {
    std::uint64_t d = dim();
    if (entries_.size() != d * d)
      throw validation_error("FidelityMatrix: entry count does not match "
                             "2^width x 2^width");
    for (std::uint64_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::uint64_t j = 0; j < d; ++j) {
        double p = at(i, j);
        if (!(p >= 0.0 && p <= 1.0))
          throw validation_error("FidelityMatrix: entry out of [0,1] at row " +
                                 std::to_string(i));
        s += p;
      }
      if (std::abs(s - 1.0) > row_tolerance_)
        throw validation_error("FidelityMatrix: row " + std::to_string(i) +
                               " sums to " + std::to_string(s));
    }
  }

private:
  FidelityMatrix(QubitLayout layout, std::vector<double> entries, bool raw,
                 double row_tolerance)
      : layout_(std::move(layout)), entries_(std::move(entries)), raw_(raw),
        row_tolerance_(row_tolerance) {
    std::uint64_t d = dim_for(layout_);
    if (entries_.size() != d * d)
      throw validation_error("FidelityMatrix: entry count does not match "
                             "2^width x 2^width");
  }

  static std::uint64_t dim_for(const QubitLayout &layout) {
    if (layout.width() > kMaxDenseWidth)
      throw validation_error("FidelityMatrix: width above dense cap of " +
                             std::to_string(kMaxDenseWidth) + " qubits");
    return 1ull << layout.width();
  }

  QubitLayout layout_;
  std::vector<double> entries_;
  bool raw_;
  double row_tolerance_;
};

// Clip entries to [0, 1] and renormalize each row. Never applied
// implicitly; reconstruction diagnostics run on raw matrices.
inline FidelityMatrix project_stochastic(const FidelityMatrix &K) {
  std::uint64_t d = K.dim();
  std::vector<double> e(K.entries());
  for (std::uint64_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::uint64_t j = 0; j < d; ++j) {
      double &p = e[i * d + j];
      if (p < 0.0)
        p = 0.0;
      else if (p > 1.0)
        p = 1.0;
      s += p;
    }
    if (s <= 0.0)
      throw numerical_error("project_stochastic: row " + std::to_string(i) +
                            " has no positive mass");
    for (std::uint64_t j = 0; j < d; ++j)
      e[i * d + j] /= s;
  }
  return FidelityMatrix::checked(K.layout(), std::move(e));
}

// Probability vector over the outcomes of a layout. `raw` marks vectors
// coming out of an unprojected linear solve, which may hold small
// negatives.
class Distribution {
public:
  Distribution(QubitLayout layout, std::vector<double> probs, bool raw = false)
      : layout_(std::move(layout)), probs_(std::move(probs)), raw_(raw) {
    if (probs_.size() != (1ull << layout_.width()))
      throw validation_error("Distribution: length does not match 2^width");
    if (!raw_)
      validate();
  }

  const QubitLayout &layout() const { return layout_; }
  const std::vector<double> &probs() const { return probs_; }
  bool is_raw() const { return raw_; }
  double at(std::uint64_t i) const { return probs_[i]; }

  void validate() const {
    double s = 0.0;
    for (double p : probs_) {
      if (p < 0.0)
        throw validation_error("Distribution: negative probability");
      s += p;
    }
    if (std::abs(s - 1.0) > kDefaultRowTolerance)
      throw validation_error("Distribution: probabilities sum to " +
                             std::to_string(s));
  }

private:
  QubitLayout layout_;
  std::vector<double> probs_;
  bool raw_;
};

// One prepared state plus the histogram of observed words.
class CountsRecord {
public:
  CountsRecord(BitString prepared,
               std::map<std::uint64_t, std::uint64_t> counts,
               std::uint64_t shots)
      : prepared_(prepared), counts_(std::move(counts)), shots_(shots) {
    if (shots_ == 0)
      throw validation_error("CountsRecord: shots must be positive");
    std::uint64_t total = 0;
    for (const auto &[outcome, c] : counts_) {
      if (prepared_.width() < 64 && (outcome >> prepared_.width()))
        throw validation_error("CountsRecord: outcome wider than record");
      total += c;
    }
    if (total != shots_)
      throw validation_error("CountsRecord: counts sum to " +
                             std::to_string(total) + ", expected " +
                             std::to_string(shots_));
  }

  const BitString &prepared() const { return prepared_; }
  int width() const { return prepared_.width(); }
  const std::map<std::uint64_t, std::uint64_t> &counts() const {
    return counts_;
  }
  std::uint64_t shots() const { return shots_; }

private:
  BitString prepared_;
  std::map<std::uint64_t, std::uint64_t> counts_;
  std::uint64_t shots_;
};

} // namespace mfm
