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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfm/estimate.hpp"
#include "mfm/matrix.hpp"

namespace mfm {

// Cumulant values lambda_Q(x_j | x_i) for a qubit subset Q, indexed
// (input, output), optionally with per-entry uncertainty upper bounds.
class CumulantTensor {
public:
  CumulantTensor(SubsystemSelection subset, std::vector<double> values,
                 std::vector<double> sigma = {}, bool bias_corrected = false)
      : subset_(std::move(subset)), values_(std::move(values)),
        sigma_(std::move(sigma)), bias_corrected_(bias_corrected) {
    std::uint64_t d = 1ull << subset_.width();
    if (values_.size() != d * d)
      throw validation_error("CumulantTensor: value count does not match "
                             "2^k x 2^k");
    if (!sigma_.empty() && sigma_.size() != values_.size())
      throw validation_error("CumulantTensor: sigma shape mismatch");
    for (double v : values_)
      if (std::abs(v) > 1.0 + 1e-9 && !bias_corrected_)
        throw validation_error("CumulantTensor: value outside [-1, 1]");
  }

  const SubsystemSelection &subset() const { return subset_; }
  int order() const { return subset_.width(); }
  std::uint64_t dim() const { return 1ull << subset_.width(); }
  const std::vector<double> &values() const { return values_; }
  const std::vector<double> &sigma() const { return sigma_; }
  bool has_sigma() const { return !sigma_.empty(); }
  bool bias_corrected() const { return bias_corrected_; }

  double at(std::uint64_t input, std::uint64_t output) const {
    return values_[input * dim() + output];
  }
  double sigma_at(std::uint64_t input, std::uint64_t output) const {
    return sigma_[input * dim() + output];
  }

  // Frobenius norm over all (input, output) entries.
  double frobenius() const {
    double s = 0.0;
    for (double v : values_)
      s += v * v;
    return std::sqrt(s);
  }

private:
  SubsystemSelection subset_;
  std::vector<double> values_;
  std::vector<double> sigma_;
  bool bias_corrected_;
};

namespace detail {

// Kronecker product of raw row-major square buffers over wa and wb bits.
inline std::vector<double> kron_raw(const std::vector<double> &a, int wa,
                                    const std::vector<double> &b, int wb) {
  const std::uint64_t da = 1ull << wa;
  const std::uint64_t db = 1ull << wb;
  const std::uint64_t d = da * db;
  std::vector<double> out(d * d);
  for (std::uint64_t ia = 0; ia < da; ++ia)
    for (std::uint64_t ja = 0; ja < da; ++ja) {
      const double va = a[ia * da + ja];
      for (std::uint64_t ib = 0; ib < db; ++ib)
        for (std::uint64_t jb = 0; jb < db; ++jb)
          out[((ia << wb) | ib) * d + ((ja << wb) | jb)] =
              va * b[ib * db + jb];
    }
  return out;
}

// Index map for a bit reordering. new_order[p] names the old position
// whose bit lands at new position p.
inline std::vector<std::uint64_t>
bit_permutation_table(int width, const std::vector<int> &new_order) {
  const std::uint64_t d = 1ull << width;
  std::vector<std::uint64_t> sigma(d);
  for (std::uint64_t i = 0; i < d; ++i) {
    std::uint64_t v = 0;
    for (int p = 0; p < width; ++p) {
      int old_pos = new_order[static_cast<std::size_t>(p)];
      v = (v << 1) | ((i >> (width - 1 - old_pos)) & 1u);
    }
    sigma[i] = v;
  }
  return sigma;
}

inline std::vector<double> permute_raw(const std::vector<double> &values,
                                       int width,
                                       const std::vector<int> &new_order) {
  const std::uint64_t d = 1ull << width;
  auto sigma = bit_permutation_table(width, new_order);
  std::vector<double> out(d * d);
  for (std::uint64_t i = 0; i < d; ++i)
    for (std::uint64_t j = 0; j < d; ++j)
      out[sigma[i] * d + sigma[j]] = values[i * d + j];
  return out;
}

inline bool valid_permutation(const std::vector<int> &perm, int width) {
  if (static_cast<int>(perm.size()) != width)
    return false;
  std::vector<bool> seen(static_cast<std::size_t>(width), false);
  for (int p : perm) {
    if (p < 0 || p >= width || seen[static_cast<std::size_t>(p)])
      return false;
    seen[static_cast<std::size_t>(p)] = true;
  }
  return true;
}

// All partitions of {0..n-1} into blocks of size <= max_block, emitted
// with ascending elements inside each block and blocks ordered by their
// smallest element.
inline void
for_each_partition(int n, int max_block,
                   const std::function<void(const std::vector<std::vector<int>> &)> &fn) {
  std::vector<std::vector<int>> blocks;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::function<void()> rec = [&]() {
    int first = -1;
    for (int e = 0; e < n; ++e)
      if (!used[static_cast<std::size_t>(e)]) {
        first = e;
        break;
      }
    if (first < 0) {
      fn(blocks);
      return;
    }
    used[static_cast<std::size_t>(first)] = true;
    // singleton
    blocks.push_back({first});
    rec();
    blocks.pop_back();
    if (max_block >= 2) {
      for (int b = first + 1; b < n; ++b) {
        if (used[static_cast<std::size_t>(b)])
          continue;
        used[static_cast<std::size_t>(b)] = true;
        blocks.push_back({first, b});
        rec();
        blocks.pop_back();
        if (max_block >= 3) {
          for (int c = b + 1; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)])
              continue;
            used[static_cast<std::size_t>(c)] = true;
            blocks.push_back({first, b, c});
            rec();
            blocks.pop_back();
            used[static_cast<std::size_t>(c)] = false;
          }
        }
        used[static_cast<std::size_t>(b)] = false;
      }
    }
    used[static_cast<std::size_t>(first)] = false;
  };
  rec();
}

// Kron the block buffers in the given order, then reorder bits so the
// result is indexed by ascending target position.
inline std::vector<double> assemble_blocks(
    const std::vector<std::pair<const std::vector<double> *, std::vector<int>>>
        &blocks,
    int n) {
  std::vector<double> acc = {1.0};
  int acc_width = 0;
  std::vector<int> concat;
  for (const auto &[values, positions] : blocks) {
    acc = kron_raw(acc, acc_width, *values,
                   static_cast<int>(positions.size()));
    acc_width += static_cast<int>(positions.size());
    concat.insert(concat.end(), positions.begin(), positions.end());
  }
  std::vector<int> new_order(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    int where = -1;
    for (int c = 0; c < n; ++c)
      if (concat[static_cast<std::size_t>(c)] == p)
        where = c;
    if (where < 0)
      throw validation_error("assemble_blocks: blocks do not cover all "
                             "positions");
    new_order[static_cast<std::size_t>(p)] = where;
  }
  bool already_ordered = true;
  for (int p = 0; p < n; ++p)
    if (new_order[static_cast<std::size_t>(p)] != p)
      already_ordered = false;
  return already_ordered ? acc : permute_raw(acc, n, new_order);
}

} // namespace detail

// ---------------------------------------------------------------------
// Tensor products and qubit reordering
// ---------------------------------------------------------------------

// Kronecker product of MFMs with disjoint layouts; output layout is the
// concatenation of the factor layouts.
inline FidelityMatrix
tensor_product(const std::vector<FidelityMatrix> &factors) {
  if (factors.empty())
    throw validation_error("tensor_product: no factors");
  std::vector<int> qubits;
  std::vector<double> acc = {1.0};
  int width = 0;
  bool any_raw = false;
  for (const auto &f : factors) {
    for (int q : f.layout().qubits())
      qubits.push_back(q);
    acc = detail::kron_raw(acc, width, f.entries(), f.width());
    width += f.width();
    any_raw = any_raw || f.is_raw();
  }
  QubitLayout layout(qubits); // throws on overlapping ids
  if (any_raw)
    return FidelityMatrix::raw(layout, std::move(acc));
  return FidelityMatrix::checked(layout, std::move(acc), 1e-6);
}

// Reorder the qubits of an MFM. new_order[p] is the current position
// whose qubit moves to position p of the result.
inline FidelityMatrix permute_qubits(const FidelityMatrix &K,
                                     const std::vector<int> &new_order) {
  if (!detail::valid_permutation(new_order, K.width()))
    throw validation_error("permute_qubits: not a permutation of layout "
                           "positions");
  std::vector<int> qubits;
  qubits.reserve(new_order.size());
  for (int p : new_order)
    qubits.push_back(K.layout().qubit_at(p));
  auto entries = detail::permute_raw(K.entries(), K.width(), new_order);
  if (K.is_raw())
    return FidelityMatrix::raw(QubitLayout(qubits), std::move(entries));
  return FidelityMatrix::checked(QubitLayout(qubits), std::move(entries),
                                 K.row_tolerance());
}

// Tensor product of cluster MFMs followed by the reordering that makes
// the output index order match `target` exactly. Cluster layouts must
// partition the target's qubit set.
inline FidelityMatrix
cluster_product(const std::vector<FidelityMatrix> &clusters,
                const QubitLayout &target) {
  FidelityMatrix prod = tensor_product(clusters);
  if (prod.width() != target.width())
    throw validation_error("cluster_product: clusters do not partition the "
                           "target layout");
  std::vector<int> new_order;
  new_order.reserve(static_cast<std::size_t>(target.width()));
  for (int q : target.qubits()) {
    int pos = prod.layout().position_of(q);
    if (pos < 0)
      throw validation_error("cluster_product: qubit " + std::to_string(q) +
                             " missing from clusters");
    new_order.push_back(pos);
  }
  if (prod.layout() == target)
    return prod;
  return permute_qubits(prod, new_order);
}

inline FidelityMatrix
cluster_product(const std::vector<std::pair<FidelityMatrix, SubsystemSelection>>
                    &clusters,
                const QubitLayout &target) {
  std::vector<FidelityMatrix> mats;
  mats.reserve(clusters.size());
  for (const auto &[K, sel] : clusters) {
    if (sel.parent() != target)
      throw validation_error("cluster_product: selection parent differs "
                             "from target");
    if (sel.induced_layout() != K.layout())
      throw validation_error("cluster_product: selection and matrix layout "
                             "disagree");
    mats.push_back(K);
  }
  return cluster_product(mats, target);
}

// ---------------------------------------------------------------------
// Cumulants
// ---------------------------------------------------------------------

struct CumulantOptions {
  // When set, per-entry uncertainty upper bounds sqrt((p_AB+p_A+p_B)/n_s)
  // are attached to the tensor.
  std::optional<std::uint64_t> shots;
  // Rescale values by (1 - 1/n_s)^-1. Only valid when the factor MFMs
  // were extracted from the same dataset as the joint MFM.
  bool bias_correct = false;
};

namespace detail {

// lambda_AB(j|i) = p_AB(j|i) - p_A(j_A|i_A) p_B(j_B|i_B) over a joint
// whose layout is the concatenation A then B.
inline CumulantTensor block_cumulant(const FidelityMatrix &K_AB,
                                     const FidelityMatrix &K_A,
                                     const FidelityMatrix &K_B,
                                     const CumulantOptions &opts) {
  const int wa = K_A.width();
  const int wb = K_B.width();
  const int n = K_AB.width();
  if (n != wa + wb)
    throw validation_error("cumulant: joint width != |A| + |B|");
  for (int p = 0; p < wa; ++p)
    if (K_AB.layout().qubit_at(p) != K_A.layout().qubit_at(p))
      throw validation_error("cumulant: joint layout does not start with A");
  for (int p = 0; p < wb; ++p)
    if (K_AB.layout().qubit_at(wa + p) != K_B.layout().qubit_at(p))
      throw validation_error("cumulant: joint layout does not end with B");
  if (opts.bias_correct && !opts.shots)
    throw validation_error("cumulant: bias correction requires a shot count");

  const std::uint64_t d = K_AB.dim();
  const std::uint64_t mask_b = (1ull << wb) - 1;
  std::vector<double> values(d * d);
  std::vector<double> sigma;
  if (opts.shots)
    sigma.resize(d * d);
  for (std::uint64_t i = 0; i < d; ++i) {
    const std::uint64_t ia = i >> wb, ib = i & mask_b;
    for (std::uint64_t j = 0; j < d; ++j) {
      const std::uint64_t ja = j >> wb, jb = j & mask_b;
      const double p_joint = K_AB.at(i, j);
      const double p_a = K_A.at(ia, ja);
      const double p_b = K_B.at(ib, jb);
      values[i * d + j] = p_joint - p_a * p_b;
      if (opts.shots)
        sigma[i * d + j] = std::sqrt((p_joint + p_a + p_b) /
                                     static_cast<double>(*opts.shots));
    }
  }
  bool corrected = false;
  if (opts.bias_correct) {
    const double f = bias_correction_factor(*opts.shots);
    for (double &v : values)
      v *= f;
    corrected = true;
  }
  SubsystemSelection subset(K_AB.layout(), [n] {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p)
      all[static_cast<std::size_t>(p)] = p;
    return all;
  }());
  return CumulantTensor(std::move(subset), std::move(values),
                        std::move(sigma), corrected);
}

} // namespace detail

// Order 1: the single-qubit cumulants equal the conditional probabilities.
inline CumulantTensor cumulant1(const FidelityMatrix &K_a) {
  if (K_a.width() != 1)
    throw validation_error("cumulant1: expected a 1-qubit MFM");
  return CumulantTensor(SubsystemSelection(K_a.layout(), {0}),
                        K_a.entries());
}

// Order 2: lambda_ab(j|i) = p_ab(j|i) - p_a(j_a|i_a) p_b(j_b|i_b).
inline CumulantTensor cumulant2(const FidelityMatrix &K_ab,
                                const FidelityMatrix &K_a,
                                const FidelityMatrix &K_b,
                                const CumulantOptions &opts = {}) {
  if (K_ab.width() != 2 || K_a.width() != 1 || K_b.width() != 1)
    throw validation_error("cumulant2: expected 2-, 1-, 1-qubit MFMs");
  return detail::block_cumulant(K_ab, K_a, K_b, opts);
}

// Order 3: joint minus all pair/single factorizations plus twice the
// fully factored term, element by element. The joint layout is (a, b, c);
// pair MFMs are over (a,b), (b,c) and (c,a) in those orders.
inline CumulantTensor
cumulant3(const FidelityMatrix &K_abc, const FidelityMatrix &K_ab,
          const FidelityMatrix &K_bc, const FidelityMatrix &K_ca,
          const FidelityMatrix &K_a, const FidelityMatrix &K_b,
          const FidelityMatrix &K_c) {
  if (K_abc.width() != 3)
    throw validation_error("cumulant3: expected a 3-qubit joint MFM");
  const int qa = K_abc.layout().qubit_at(0);
  const int qb = K_abc.layout().qubit_at(1);
  const int qc = K_abc.layout().qubit_at(2);
  auto expect = [](const FidelityMatrix &K, std::vector<int> ids,
                   const char *name) {
    if (K.layout().qubits() != ids)
      throw validation_error(std::string("cumulant3: layout mismatch for ") +
                             name);
  };
  expect(K_ab, {qa, qb}, "K_ab");
  expect(K_bc, {qb, qc}, "K_bc");
  expect(K_ca, {qc, qa}, "K_ca");
  expect(K_a, {qa}, "K_a");
  expect(K_b, {qb}, "K_b");
  expect(K_c, {qc}, "K_c");

  const std::uint64_t d = 8;
  std::vector<double> values(d * d);
  auto bit = [](std::uint64_t v, int pos) { return (v >> (2 - pos)) & 1u; };
  for (std::uint64_t i = 0; i < d; ++i) {
    const std::uint64_t ia = bit(i, 0), ib = bit(i, 1), ic = bit(i, 2);
    for (std::uint64_t j = 0; j < d; ++j) {
      const std::uint64_t ja = bit(j, 0), jb = bit(j, 1), jc = bit(j, 2);
      const double pa = K_a.at(ia, ja);
      const double pb = K_b.at(ib, jb);
      const double pc = K_c.at(ic, jc);
      const double pab = K_ab.at((ia << 1) | ib, (ja << 1) | jb);
      const double pbc = K_bc.at((ib << 1) | ic, (jb << 1) | jc);
      const double pca = K_ca.at((ic << 1) | ia, (jc << 1) | ja);
      values[i * d + j] = K_abc.at(i, j) - (pa * pbc + pc * pab + pb * pca) +
                          2.0 * pa * pb * pc;
    }
  }
  SubsystemSelection subset(K_abc.layout(), {0, 1, 2});
  return CumulantTensor(std::move(subset), std::move(values));
}

// ---------------------------------------------------------------------
// Reconstruction from low-order cumulants
// ---------------------------------------------------------------------

namespace detail {

// Values of a tensor re-expressed with its qubits listed in `ids` order.
inline std::vector<double> values_in_id_order(const CumulantTensor &t,
                                              const std::vector<int> &ids) {
  const auto tensor_ids = t.subset().induced_layout().qubits();
  std::vector<int> new_order;
  new_order.reserve(ids.size());
  for (int q : ids) {
    int where = -1;
    for (std::size_t c = 0; c < tensor_ids.size(); ++c)
      if (tensor_ids[c] == q)
        where = static_cast<int>(c);
    if (where < 0)
      throw validation_error("reconstruct: tensor does not cover qubit " +
                             std::to_string(q));
    new_order.push_back(where);
  }
  bool ordered = true;
  for (std::size_t p = 0; p < new_order.size(); ++p)
    if (new_order[p] != static_cast<int>(p))
      ordered = false;
  if (ordered)
    return t.values();
  return permute_raw(t.values(), t.order(), new_order);
}

} // namespace detail

// n-qubit conditional probabilities from cumulants of order <= max_order:
// the sum over partitions of the layout positions into blocks of size
// <= max_order of the product of block cumulants. Cumulants of higher
// order are implicitly zero. Tensors are matched to layout positions by
// their qubit ids; the output is flagged raw since entries may leave
// [0, 1] when the inputs are noisy.
inline FidelityMatrix
reconstruct_from_cumulants(const std::vector<CumulantTensor> &singles,
                           const std::vector<CumulantTensor> &pairs,
                           const QubitLayout &layout, int max_order = 2,
                           const std::vector<CumulantTensor> &triples = {}) {
  const int n = layout.width();
  if (max_order != 2 && max_order != 3)
    throw validation_error("reconstruct: order must be 2 or 3");
  if (max_order == 2 && !triples.empty())
    throw validation_error("reconstruct: triple cumulants supplied at "
                           "order 2");

  // Canonical per-block value buffers keyed by ascending positions.
  std::map<std::vector<int>, std::vector<double>> block_values;
  auto insert_tensor = [&](const CumulantTensor &t, int expect_order) {
    if (t.order() != expect_order)
      throw validation_error("reconstruct: tensor order mismatch");
    std::vector<int> positions;
    const QubitLayout induced = t.subset().induced_layout();
    for (int q : induced.qubits()) {
      int p = layout.position_of(q);
      if (p < 0)
        throw validation_error("reconstruct: tensor qubit " +
                               std::to_string(q) + " not in target layout");
      positions.push_back(p);
    }
    std::vector<int> sorted = positions;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> ids_sorted;
    for (int p : sorted)
      ids_sorted.push_back(layout.qubit_at(p));
    auto values = detail::values_in_id_order(t, ids_sorted);
    if (!block_values.emplace(sorted, std::move(values)).second)
      throw validation_error("reconstruct: duplicate tensor for a block");
  };
  for (const auto &t : singles)
    insert_tensor(t, 1);
  for (const auto &t : pairs)
    insert_tensor(t, 2);
  for (const auto &t : triples)
    insert_tensor(t, 3);

  for (int p = 0; p < n; ++p)
    if (!block_values.count({p}))
      throw validation_error("reconstruct: missing single for qubit " +
                             std::to_string(layout.qubit_at(p)));
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q)
      if (!block_values.count({p, q}))
        throw validation_error("reconstruct: missing pair cumulant for "
                               "positions " + std::to_string(p) + "," +
                               std::to_string(q));
  if (max_order == 3)
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q)
        for (int r = q + 1; r < n; ++r)
          if (!block_values.count({p, q, r}))
            throw validation_error("reconstruct: missing triple cumulant");

  const std::uint64_t d = 1ull << n;
  std::vector<double> acc(d * d, 0.0);
  detail::for_each_partition(n, max_order, [&](const auto &blocks) {
    std::vector<std::pair<const std::vector<double> *, std::vector<int>>>
        assembled;
    assembled.reserve(blocks.size());
    for (const auto &b : blocks)
      assembled.emplace_back(&block_values.at(b), b);
    auto term = detail::assemble_blocks(assembled, n);
    for (std::uint64_t k = 0; k < d * d; ++k)
      acc[k] += term[k];
  });
  return FidelityMatrix::raw(layout, std::move(acc));
}

// ---------------------------------------------------------------------
// Scalar correlation factor
// ---------------------------------------------------------------------

struct ScfResult {
  CumulantTensor lambda;
  double value; // Frobenius norm of lambda
};

// Cluster cumulant between disjoint subsystems A and B plus its scalar
// correlation factor. K_AB must be ordered A then B (permute first if
// needed).
inline ScfResult scf(const FidelityMatrix &K_AB, const FidelityMatrix &K_A,
                     const FidelityMatrix &K_B,
                     const CumulantOptions &opts = {}) {
  CumulantTensor lambda = detail::block_cumulant(K_AB, K_A, K_B, opts);
  double value = lambda.frobenius();
  return ScfResult{std::move(lambda), value};
}

// Per-input-state decomposition: Lambda(x_i) is the Frobenius norm of the
// slice lambda(.|x_i). The squares sum to the full SCF squared.
inline std::vector<double> scf_by_target_state(const CumulantTensor &lambda) {
  const std::uint64_t d = lambda.dim();
  std::vector<double> out(d, 0.0);
  for (std::uint64_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::uint64_t j = 0; j < d; ++j) {
      double v = lambda.at(i, j);
      s += v * v;
    }
    out[i] = std::sqrt(s);
  }
  return out;
}

} // namespace mfm
