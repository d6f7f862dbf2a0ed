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
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mfm/errors.hpp"

namespace mfm {

// Bit-significance convention, fixed across the whole library:
//
//   layout position 0  <->  most significant bit of every rendered word
//                      <->  highest weight 2^(width-1) in matrix indices.
//
// A layout [6, 5, 10] therefore renders outcomes as "b6 b5 b10" and the
// word "011" means qubit 6 read 0, qubit 5 read 1, qubit 10 read 1.

// Ordered list of distinct physical qubit ids. The order defines bit
// significance for every BitString and matrix index built over it.
class QubitLayout {
public:
  explicit QubitLayout(std::vector<int> qubits) : qubits_(std::move(qubits)) {
    if (qubits_.empty())
      throw validation_error("QubitLayout: width must be >= 1");
    if (qubits_.size() > 63)
      throw validation_error("QubitLayout: width must be <= 63");
    std::set<int> seen;
    for (int q : qubits_) {
      if (q < 0)
        throw validation_error("QubitLayout: qubit ids must be non-negative");
      if (!seen.insert(q).second)
        throw validation_error("QubitLayout: duplicate qubit id " +
                               std::to_string(q));
    }
  }

  int width() const { return static_cast<int>(qubits_.size()); }
  const std::vector<int> &qubits() const { return qubits_; }
  int qubit_at(int position) const { return qubits_.at(position); }

  // Position of a qubit id, or -1 if absent.
  int position_of(int qubit) const {
    auto it = std::find(qubits_.begin(), qubits_.end(), qubit);
    return it == qubits_.end() ? -1
                               : static_cast<int>(it - qubits_.begin());
  }

  bool operator==(const QubitLayout &other) const {
    return qubits_ == other.qubits_;
  }
  bool operator!=(const QubitLayout &other) const { return !(*this == other); }

private:
  std::vector<int> qubits_;
};

// Fixed-width classical word over a layout. Immutable.
class BitString {
public:
  BitString(std::uint64_t value, int width) : value_(value), width_(width) {
    if (width < 1 || width > 63)
      throw validation_error("BitString: width must be in [1, 63]");
    if (value >> width)
      throw validation_error("BitString: value out of range for width " +
                             std::to_string(width));
  }

  // Parse a rendered word such as "01011" (leftmost char = position 0 = MSB).
  static BitString parse(const std::string &text) {
    if (text.empty() || text.size() > 63)
      throw validation_error("BitString: text width must be in [1, 63]");
    std::uint64_t v = 0;
    for (char c : text) {
      if (c != '0' && c != '1')
        throw validation_error("BitString: invalid character in \"" + text +
                               "\"");
      v = (v << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return BitString(v, static_cast<int>(text.size()));
  }

  std::uint64_t value() const { return value_; }
  int width() const { return width_; }

  // Bit at a layout position (position 0 = MSB).
  int bit(int position) const {
    if (position < 0 || position >= width_)
      throw validation_error("BitString: position out of range");
    return static_cast<int>((value_ >> (width_ - 1 - position)) & 1u);
  }

  std::string to_string() const {
    std::string s(static_cast<std::size_t>(width_), '0');
    for (int p = 0; p < width_; ++p)
      s[static_cast<std::size_t>(p)] = bit(p) ? '1' : '0';
    return s;
  }

  bool operator==(const BitString &other) const {
    return value_ == other.value_ && width_ == other.width_;
  }
  bool operator<(const BitString &other) const {
    return width_ != other.width_ ? width_ < other.width_
                                  : value_ < other.value_;
  }

private:
  std::uint64_t value_;
  int width_;
};

// Row/column index of a word under the significance convention.
inline std::uint64_t index_of(const BitString &x) { return x.value(); }

inline std::uint64_t index_of(const BitString &x, const QubitLayout &layout) {
  if (x.width() != layout.width())
    throw validation_error("index_of: width mismatch");
  return x.value();
}

// Sub-word of x at the given positions, in the given order. The first
// requested position becomes the MSB of the result.
inline BitString restrict_bits(const BitString &x,
                               const std::vector<int> &positions) {
  if (positions.empty())
    throw validation_error("restrict_bits: empty position list");
  std::uint64_t v = 0;
  for (int p : positions) {
    if (p < 0 || p >= x.width())
      throw validation_error("restrict_bits: position out of range");
    v = (v << 1) | static_cast<std::uint64_t>(x.bit(p));
  }
  return BitString(v, static_cast<int>(positions.size()));
}

// Index-level variant used in inner loops: extracts the sub-index of
// `index` (a width-`width` word) at `positions`.
inline std::uint64_t restrict_index(std::uint64_t index, int width,
                                    const std::vector<int> &positions) {
  std::uint64_t v = 0;
  for (int p : positions)
    v = (v << 1) | ((index >> (width - 1 - p)) & 1u);
  return v;
}

// Scatter inverse of restrict_index: places the bits of `sub` at
// `positions` of a width-`width` word whose other bits are taken
// from `base`.
inline std::uint64_t scatter_index(std::uint64_t sub, std::uint64_t base,
                                   int width,
                                   const std::vector<int> &positions) {
  std::uint64_t v = base;
  int k = static_cast<int>(positions.size());
  for (int i = 0; i < k; ++i) {
    int p = positions[static_cast<std::size_t>(i)];
    std::uint64_t bit = (sub >> (k - 1 - i)) & 1u;
    std::uint64_t mask = 1ull << (width - 1 - p);
    v = (v & ~mask) | (bit ? mask : 0u);
  }
  return v;
}

} // namespace mfm
