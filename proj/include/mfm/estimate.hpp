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

#include <cstdint>
#include <set>
#include <vector>

#include "mfm/matrix.hpp"

namespace mfm {

// Ordered subset of a parent layout's positions.
class SubsystemSelection {
public:
  SubsystemSelection(QubitLayout parent, std::vector<int> positions)
      : parent_(std::move(parent)), positions_(std::move(positions)) {
    if (positions_.empty())
      throw validation_error("SubsystemSelection: empty selection");
    std::set<int> seen;
    for (int p : positions_) {
      if (p < 0 || p >= parent_.width())
        throw validation_error("SubsystemSelection: position out of range");
      if (!seen.insert(p).second)
        throw validation_error("SubsystemSelection: duplicate position");
    }
  }

  const QubitLayout &parent() const { return parent_; }
  const std::vector<int> &positions() const { return positions_; }
  int width() const { return static_cast<int>(positions_.size()); }

  bool is_full_identity() const {
    if (width() != parent_.width())
      return false;
    for (int p = 0; p < width(); ++p)
      if (positions_[static_cast<std::size_t>(p)] != p)
        return false;
    return true;
  }

  // Layout induced by the selected positions, in selection order.
  QubitLayout induced_layout() const {
    std::vector<int> q;
    q.reserve(positions_.size());
    for (int p : positions_)
      q.push_back(parent_.qubit_at(p));
    return QubitLayout(q);
  }

  // Parent positions not in the selection, in parent order.
  std::vector<int> complement() const {
    std::vector<int> rest;
    for (int p = 0; p < parent_.width(); ++p) {
      bool held = false;
      for (int s : positions_)
        if (s == p)
          held = true;
      if (!held)
        rest.push_back(p);
    }
    return rest;
  }

private:
  QubitLayout parent_;
  std::vector<int> positions_;
};

// Empirical MFM from one record per prepared state. Row i is the observed
// histogram for prepared state x_i divided by the (common) shot count, so
// rows are stochastic by construction.
inline FidelityMatrix build_mfm(const std::vector<CountsRecord> &records,
                                const QubitLayout &layout) {
  const int n = layout.width();
  const std::uint64_t d = 1ull << n;
  if (records.size() != d)
    throw validation_error("build_mfm: expected " + std::to_string(d) +
                           " records, got " + std::to_string(records.size()));
  std::vector<bool> seen(d, false);
  std::uint64_t shots = records.front().shots();
  std::vector<double> e(d * d, 0.0);
  for (const auto &rec : records) {
    if (rec.width() != n)
      throw validation_error("build_mfm: record width mismatch");
    if (rec.shots() != shots)
      throw validation_error("build_mfm: records disagree on shot count");
    std::uint64_t i = rec.prepared().value();
    if (seen[i])
      throw validation_error("build_mfm: duplicate prepared state " +
                             rec.prepared().to_string());
    seen[i] = true;
    for (const auto &[outcome, c] : rec.counts())
      e[i * d + outcome] = static_cast<double>(c) / static_cast<double>(shots);
  }
  for (std::uint64_t i = 0; i < d; ++i)
    if (!seen[i])
      throw validation_error("build_mfm: missing prepared state " +
                             BitString(i, n).to_string());
  return FidelityMatrix::checked(layout, std::move(e), 1e-12);
}

// Sub-MFM by marginalization: observed bits of traced qubits are summed,
// prepared bits are averaged with uniform weight 1/2^(m-k), which keeps
// the result row-stochastic.
inline FidelityMatrix marginalize(const FidelityMatrix &K,
                                  const SubsystemSelection &sel) {
  if (sel.parent() != K.layout())
    throw validation_error("marginalize: selection parent does not match "
                           "matrix layout");
  if (sel.is_full_identity())
    return K;
  const int m = K.width();
  const int k = sel.width();
  const std::uint64_t d = K.dim();
  const std::uint64_t dk = 1ull << k;
  const auto &pos = sel.positions();
  std::vector<double> e(dk * dk, 0.0);
  for (std::uint64_t i = 0; i < d; ++i) {
    std::uint64_t u = restrict_index(i, m, pos);
    for (std::uint64_t j = 0; j < d; ++j)
      e[u * dk + restrict_index(j, m, pos)] += K.at(i, j);
  }
  double w = 1.0 / static_cast<double>(1ull << (m - k));
  for (double &v : e)
    v *= w;
  if (K.is_raw())
    return FidelityMatrix::raw(sel.induced_layout(), std::move(e));
  return FidelityMatrix::checked(sel.induced_layout(), std::move(e), 1e-6);
}

// Empirical MFM of a target subsystem from full-width runs in which the
// remaining qubits act as spectators. Each record is keyed by the target
// bits of its prepared word; spectator outcome bits are summed out.
inline FidelityMatrix
extract_with_spectators(const std::vector<CountsRecord> &records,
                        const SubsystemSelection &target) {
  const int n = target.parent().width();
  const int k = target.width();
  const std::uint64_t dk = 1ull << k;
  if (records.size() != dk)
    throw validation_error("extract_with_spectators: expected " +
                           std::to_string(dk) + " records, got " +
                           std::to_string(records.size()));
  std::vector<bool> seen(dk, false);
  std::uint64_t shots = records.front().shots();
  std::vector<double> e(dk * dk, 0.0);
  for (const auto &rec : records) {
    if (rec.width() != n)
      throw validation_error("extract_with_spectators: record width does "
                             "not match parent layout");
    if (rec.shots() != shots)
      throw validation_error("extract_with_spectators: records disagree on "
                             "shot count");
    std::uint64_t u = restrict_index(rec.prepared().value(), n,
                                     target.positions());
    if (seen[u])
      throw validation_error("extract_with_spectators: duplicate target "
                             "preparation");
    seen[u] = true;
    for (const auto &[outcome, c] : rec.counts()) {
      std::uint64_t v = restrict_index(outcome, n, target.positions());
      e[u * dk + v] += static_cast<double>(c) / static_cast<double>(shots);
    }
  }
  for (std::uint64_t u = 0; u < dk; ++u)
    if (!seen[u])
      throw validation_error("extract_with_spectators: missing target "
                             "preparation " + BitString(u, k).to_string());
  return FidelityMatrix::checked(target.induced_layout(), std::move(e),
                                 1e-12);
}

// Unbiasing factor (1 - 1/n_s)^-1 for cumulants whose factor MFMs were
// extracted from the same dataset as the joint MFM. Not applied when the
// factors came from independent experiments.
inline double bias_correction_factor(std::uint64_t n_s) {
  if (n_s < 2)
    throw validation_error("bias_correction_factor: n_s must be >= 2");
  return 1.0 / (1.0 - 1.0 / static_cast<double>(n_s));
}

} // namespace mfm
