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

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mfm/cumulant.hpp"
#include "mfm/estimate.hpp"
#include "mfm/matrix.hpp"

namespace mfm::sim {

// How spectator qubits are prepared during a targeted run: mixed to the
// uniform distribution before measurement, or left in |0>.
enum class SpectatorMixing { ideal_uniform, none };

// One noise cluster: a joint confusion matrix over the selected qubits.
// When `matrix_odd` is present it replaces `matrix` for preparations
// whose cluster-restricted bits have odd parity, giving the model a
// target-state-dependent error channel.
struct ClusterNoise {
  SubsystemSelection sel;
  FidelityMatrix matrix;
  std::optional<FidelityMatrix> matrix_odd;
};

class NoiseModel {
public:
  NoiseModel(QubitLayout layout, std::vector<ClusterNoise> clusters,
             SpectatorMixing mixing = SpectatorMixing::ideal_uniform)
      : layout_(std::move(layout)), clusters_(std::move(clusters)),
        mixing_(mixing) {
    std::vector<bool> covered(static_cast<std::size_t>(layout_.width()),
                              false);
    for (const auto &c : clusters_) {
      if (c.sel.parent() != layout_)
        throw validation_error("NoiseModel: cluster selection over a "
                               "different layout");
      for (int p : c.sel.positions()) {
        if (covered[static_cast<std::size_t>(p)])
          throw validation_error("NoiseModel: clusters overlap at position " +
                                 std::to_string(p));
        covered[static_cast<std::size_t>(p)] = true;
      }
      auto check = [&](const FidelityMatrix &K) {
        if (K.layout() != c.sel.induced_layout())
          throw validation_error("NoiseModel: cluster matrix layout does "
                                 "not match the selection");
        if (K.is_raw())
          throw validation_error("NoiseModel: cluster matrix must be "
                                 "row-stochastic");
      };
      check(c.matrix);
      if (c.matrix_odd)
        check(*c.matrix_odd);
    }
    for (bool b : covered)
      if (!b)
        throw validation_error("NoiseModel: clusters do not cover the "
                               "layout");
  }

  const QubitLayout &layout() const { return layout_; }
  const std::vector<ClusterNoise> &clusters() const { return clusters_; }
  SpectatorMixing spectator_mixing() const { return mixing_; }

  // Confusion matrix the cluster actually applies, with the parity
  // selection folded into the rows.
  FidelityMatrix effective_cluster_matrix(const ClusterNoise &c) const {
    if (!c.matrix_odd)
      return c.matrix;
    const std::uint64_t d = c.matrix.dim();
    std::vector<double> entries(d * d);
    for (std::uint64_t i = 0; i < d; ++i) {
      const FidelityMatrix &src =
          (std::popcount(i) % 2 == 0) ? c.matrix : *c.matrix_odd;
      for (std::uint64_t j = 0; j < d; ++j)
        entries[i * d + j] = src.at(i, j);
    }
    return FidelityMatrix::checked(c.matrix.layout(), std::move(entries),
                                   c.matrix.row_tolerance());
  }

private:
  QubitLayout layout_;
  std::vector<ClusterNoise> clusters_;
  SpectatorMixing mixing_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Per-record stream seed; independent of the order records are drawn in.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t record,
                                 std::uint64_t domain) {
  return splitmix64(seed ^ splitmix64(record + 0x632BE59BD9B4E019ull * (domain + 1)));
}

// Canonical double in [0, 1) from one 64-bit draw; avoids
// std::uniform_real_distribution for cross-platform determinism.
inline double canonical(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t sample_row(const FidelityMatrix &K, std::uint64_t row,
                                std::mt19937_64 &rng) {
  const std::uint64_t d = K.dim();
  double u = canonical(rng);
  double acc = 0.0;
  for (std::uint64_t j = 0; j < d; ++j) {
    acc += K.at(row, j);
    if (u < acc)
      return j;
  }
  return d - 1; // guard against accumulated rounding
}

} // namespace detail

// Exact (infinite-shot) MFM of the model on a subsystem. Clusters cut by
// the selection boundary are marginalized with uniform weighting over the
// traced preparation bits.
inline FidelityMatrix true_mfm(const NoiseModel &model,
                               const SubsystemSelection &sel) {
  if (sel.parent() != model.layout())
    throw validation_error("true_mfm: selection over a different layout");
  std::vector<std::pair<FidelityMatrix, SubsystemSelection>> parts;
  parts.reserve(model.clusters().size());
  for (const auto &c : model.clusters())
    parts.emplace_back(model.effective_cluster_matrix(c), c.sel);
  FidelityMatrix full = cluster_product(parts, model.layout());
  return marginalize(full, sel);
}

// n_s independent draws from the model's row for `prepared`.
inline CountsRecord sample_counts(const NoiseModel &model,
                                  const BitString &prepared,
                                  std::uint64_t n_s, std::uint64_t seed) {
  if (prepared.width() != model.layout().width())
    throw validation_error("sample_counts: prepared width does not match "
                           "the model layout");
  if (n_s < 1)
    throw validation_error("sample_counts: n_s must be >= 1");
  const int n = model.layout().width();
  struct Draw {
    FidelityMatrix K;
    std::vector<int> positions;
    std::uint64_t row;
  };
  std::vector<Draw> draws;
  draws.reserve(model.clusters().size());
  for (const auto &c : model.clusters())
    draws.push_back({model.effective_cluster_matrix(c), c.sel.positions(),
                     restrict_index(prepared.value(), n, c.sel.positions())});
  std::mt19937_64 rng(detail::derive_seed(seed, prepared.value(), 0));
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < n_s; ++s) {
    std::uint64_t observed = 0;
    for (const auto &d : draws)
      observed = scatter_index(detail::sample_row(d.K, d.row, rng), observed,
                               n, d.positions);
    ++counts[observed];
  }
  return CountsRecord(prepared, std::move(counts), n_s);
}

// Targeted run: the target qubits are prepared in `prepared_target`; the
// spectators are mixed per the model's spectator setting and measured
// along with the targets. The record's nominal prepared word carries the
// target bits with all spectator bits zero.
inline CountsRecord spectator_run(const NoiseModel &model,
                                  const SubsystemSelection &target,
                                  const BitString &prepared_target,
                                  std::uint64_t n_s, std::uint64_t seed) {
  if (target.parent() != model.layout())
    throw validation_error("spectator_run: target over a different layout");
  if (prepared_target.width() != target.width())
    throw validation_error("spectator_run: prepared width does not match "
                           "the target");
  if (n_s < 1)
    throw validation_error("spectator_run: n_s must be >= 1");
  const int n = model.layout().width();
  const auto spectators = target.complement();
  const int n_spec = static_cast<int>(spectators.size());
  const std::uint64_t spec_mask = n_spec ? ((1ull << n_spec) - 1) : 0;
  const std::uint64_t nominal =
      scatter_index(prepared_target.value(), 0, n, target.positions());

  struct Draw {
    FidelityMatrix even;
    FidelityMatrix odd; // == even when the cluster has no odd matrix
    std::vector<int> positions;
  };
  std::vector<Draw> draws;
  draws.reserve(model.clusters().size());
  for (const auto &c : model.clusters())
    draws.push_back({c.matrix, c.matrix_odd ? *c.matrix_odd : c.matrix,
                     c.sel.positions()});

  std::mt19937_64 rng(
      detail::derive_seed(seed, prepared_target.value(), 1));
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < n_s; ++s) {
    std::uint64_t realized = nominal;
    if (n_spec > 0 && model.spectator_mixing() == SpectatorMixing::ideal_uniform)
      realized = scatter_index(rng() & spec_mask, realized, n, spectators);
    std::uint64_t observed = 0;
    for (const auto &d : draws) {
      const std::uint64_t row = restrict_index(realized, n, d.positions);
      const FidelityMatrix &K =
          (std::popcount(row) % 2 == 0) ? d.even : d.odd;
      observed =
          scatter_index(detail::sample_row(K, row, rng), observed, n,
                        d.positions);
    }
    ++counts[observed];
  }
  return CountsRecord(BitString(nominal, n), std::move(counts), n_s);
}

// One counts record per preparation state, with per-row derived seeds so
// the dataset is independent of sampling order.
inline std::vector<CountsRecord>
full_mfm_experiment(const NoiseModel &model, const QubitLayout &layout,
                    std::uint64_t n_s, std::uint64_t seed) {
  if (layout != model.layout())
    throw validation_error("full_mfm_experiment: layout does not match the "
                           "model");
  const int n = layout.width();
  if (n > kMaxDenseWidth)
    throw validation_error("full_mfm_experiment: layout wider than " +
                           std::to_string(kMaxDenseWidth) + " qubits");
  std::vector<CountsRecord> records;
  records.reserve(1ull << n);
  for (std::uint64_t i = 0; i < (1ull << n); ++i)
    records.push_back(sample_counts(model, BitString(i, n), n_s,
                                    detail::derive_seed(seed, i, 2)));
  return records;
}

// ---------------------------------------------------------------------
// Circuit-cost model
// ---------------------------------------------------------------------

enum class CostStrategy { full, singles, pairs, triples, split };

// Number of distinct preparation circuits each construction strategy
// needs: full = 2^n, singles = 2n, pairs = 4*C(n,2), triples = 8*C(n,3),
// split(k) = 2^k + 2^(n-k).
inline std::uint64_t circuit_cost(int n, CostStrategy strategy, int k = 0) {
  if (n < 1)
    throw validation_error("circuit_cost: n must be >= 1");
  if (n > 62)
    throw validation_error("circuit_cost: n too large for a 64-bit count");
  const auto u = [](int x) { return static_cast<std::uint64_t>(x); };
  switch (strategy) {
  case CostStrategy::full:
    return 1ull << n;
  case CostStrategy::singles:
    return 2 * u(n);
  case CostStrategy::pairs:
    return 4 * (u(n) * u(n - 1) / 2);
  case CostStrategy::triples:
    return n < 3 ? 0 : 8 * (u(n) * u(n - 1) * u(n - 2) / 6);
  case CostStrategy::split:
    if (k < 1 || k >= n)
      throw validation_error("circuit_cost: split requires 1 <= k < n");
    return (1ull << k) + (1ull << (n - k));
  }
  throw validation_error("circuit_cost: unknown strategy");
}

} // namespace mfm::sim
