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
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mfm/errors.hpp"
#include "mfm/matrix.hpp"
#include "mfm/metrics.hpp"
#include "mfm/simdevice.hpp"

namespace mfm::io {

using nlohmann::json;

inline constexpr const char *kSchemaVersion = "1";

// ---------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------

inline json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw io_error(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string &path,
                            const std::string &text) {
  std::ofstream out(path);
  if (!out)
    throw io_error("cannot write " + path);
  out << text;
  if (!out)
    throw io_error("write failed for " + path);
}

inline void write_json_file(const std::string &path, const json &j) {
  write_text_file(path, j.dump(2) + "\n");
}

// Wrap nlohmann's field/type exceptions so schema problems surface as
// validation errors naming the offending field.
template <typename F> auto checked_fields(const std::string &what, F &&f) {
  try {
    return f();
  } catch (const json::exception &e) {
    throw validation_error(what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------
// Layouts and matrices
// ---------------------------------------------------------------------

inline json layout_to_json(const QubitLayout &layout) {
  return json(layout.qubits());
}

inline QubitLayout layout_from_json(const json &j) {
  return checked_fields("layout", [&] {
    return QubitLayout(j.get<std::vector<int>>());
  });
}

struct MatrixFile {
  FidelityMatrix matrix;
  bool bias_corrected = false;
  bool projected = false;
};

inline json matrix_to_json(const MatrixFile &m) {
  return json{{"schema_version", kSchemaVersion},
              {"layout", layout_to_json(m.matrix.layout())},
              {"flags",
               {{"raw", m.matrix.is_raw()},
                {"bias_corrected", m.bias_corrected},
                {"projected", m.projected}}},
              {"entries", m.matrix.entries()}};
}

inline MatrixFile matrix_from_json(const json &j) {
  return checked_fields("matrix file", [&] {
    QubitLayout layout = layout_from_json(j.at("layout"));
    auto entries = j.at("entries").get<std::vector<double>>();
    const auto &flags = j.at("flags");
    bool raw = flags.at("raw").get<bool>();
    FidelityMatrix K =
        raw ? FidelityMatrix::raw(layout, std::move(entries))
            : FidelityMatrix::checked(layout, std::move(entries), 1e-6);
    return MatrixFile{std::move(K), flags.at("bias_corrected").get<bool>(),
                      flags.at("projected").get<bool>()};
  });
}

// ---------------------------------------------------------------------
// Counts
// ---------------------------------------------------------------------

struct CountsFile {
  QubitLayout layout;
  std::uint64_t shots = 0;
  // Present for spectator runs: layout positions that were mixed rather
  // than deliberately prepared. The prepared words carry zeros there.
  std::optional<std::vector<int>> spectator_positions;
  std::vector<CountsRecord> records;
};

inline json counts_to_json(const CountsFile &f) {
  json records = json::array();
  for (const auto &r : f.records) {
    json counts = json::object();
    for (const auto &[outcome, c] : r.counts())
      counts[BitString(outcome, f.layout.width()).to_string()] = c;
    records.push_back(
        {{"prepared", r.prepared().to_string()}, {"counts", counts}});
  }
  json j{{"schema_version", kSchemaVersion},
         {"layout", layout_to_json(f.layout)},
         {"shots", f.shots},
         {"records", records}};
  if (f.spectator_positions)
    j["spectator_positions"] = *f.spectator_positions;
  return j;
}

inline CountsFile counts_from_json(const json &j) {
  return checked_fields("counts file", [&] {
    CountsFile f{layout_from_json(j.at("layout")),
                 j.at("shots").get<std::uint64_t>(), std::nullopt, {}};
    if (j.contains("spectator_positions"))
      f.spectator_positions =
          j.at("spectator_positions").get<std::vector<int>>();
    for (const auto &rec : j.at("records")) {
      BitString prepared =
          BitString::parse(rec.at("prepared").get<std::string>());
      if (prepared.width() != f.layout.width())
        throw validation_error("counts file: prepared '" +
                               prepared.to_string() +
                               "' does not match layout width");
      std::map<std::uint64_t, std::uint64_t> counts;
      for (const auto &[text, value] : rec.at("counts").items()) {
        BitString outcome = BitString::parse(text);
        if (outcome.width() != f.layout.width())
          throw validation_error("counts file: outcome '" + text +
                                 "' does not match layout width");
        counts[outcome.value()] = value.get<std::uint64_t>();
      }
      f.records.emplace_back(prepared, std::move(counts), f.shots);
    }
    return f;
  });
}

// ---------------------------------------------------------------------
// Vendor calibration
// ---------------------------------------------------------------------

struct CalibrationEntry {
  int qubit = 0;
  double p10 = 0.0; // p(measure 1 | prepared 0)
  double p01 = 0.0; // p(measure 0 | prepared 1)
};

struct CalibrationFile {
  std::vector<CalibrationEntry> entries;
};

inline json calibration_to_json(const CalibrationFile &f) {
  json entries = json::array();
  for (const auto &e : f.entries)
    entries.push_back(
        {{"qubit", e.qubit}, {"p10", e.p10}, {"p01", e.p01}});
  return json{{"schema_version", kSchemaVersion}, {"entries", entries}};
}

inline CalibrationFile calibration_from_json(const json &j) {
  return checked_fields("calibration file", [&] {
    CalibrationFile f;
    for (const auto &e : j.at("entries")) {
      CalibrationEntry entry{e.at("qubit").get<int>(),
                             e.at("p10").get<double>(),
                             e.at("p01").get<double>()};
      if (entry.p10 < 0.0 || entry.p10 > 1.0 || entry.p01 < 0.0 ||
          entry.p01 > 1.0)
        throw validation_error("calibration file: probability outside "
                               "[0, 1] for qubit " +
                               std::to_string(entry.qubit));
      f.entries.push_back(entry);
    }
    return f;
  });
}

// The 1-qubit kernel a vendor's reported flip rates induce.
inline FidelityMatrix vendor_kernel(const CalibrationEntry &e) {
  return FidelityMatrix::checked(
      QubitLayout({e.qubit}),
      {1.0 - e.p10, e.p10, e.p01, 1.0 - e.p01});
}

// ---------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------

struct DistributionFile {
  Distribution dist;
  bool projected = false;
};

inline json distribution_to_json(const DistributionFile &f) {
  return json{{"schema_version", kSchemaVersion},
              {"layout", layout_to_json(f.dist.layout())},
              {"flags", {{"raw", f.dist.is_raw()}, {"projected", f.projected}}},
              {"probs", f.dist.probs()}};
}

inline DistributionFile distribution_from_json(const json &j) {
  return checked_fields("distribution file", [&] {
    QubitLayout layout = layout_from_json(j.at("layout"));
    auto probs = j.at("probs").get<std::vector<double>>();
    const auto &flags = j.at("flags");
    return DistributionFile{
        Distribution(std::move(layout), std::move(probs),
                     flags.at("raw").get<bool>()),
        flags.at("projected").get<bool>()};
  });
}

// ---------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------

inline json model_to_json(const sim::NoiseModel &model) {
  json clusters = json::array();
  for (const auto &c : model.clusters()) {
    json cluster{{"qubits", c.matrix.layout().qubits()},
                 {"matrix", c.matrix.entries()}};
    if (c.matrix_odd)
      cluster["matrix_odd"] = c.matrix_odd->entries();
    clusters.push_back(std::move(cluster));
  }
  return json{{"schema_version", kSchemaVersion},
              {"layout", layout_to_json(model.layout())},
              {"spectator_mixing",
               model.spectator_mixing() == sim::SpectatorMixing::ideal_uniform
                   ? "ideal_uniform"
                   : "none"},
              {"clusters", clusters}};
}

inline sim::NoiseModel model_from_json(const json &j) {
  return checked_fields("model file", [&] {
    QubitLayout layout = layout_from_json(j.at("layout"));
    sim::SpectatorMixing mixing = sim::SpectatorMixing::ideal_uniform;
    if (j.contains("spectator_mixing")) {
      const std::string s = j.at("spectator_mixing").get<std::string>();
      if (s == "ideal_uniform")
        mixing = sim::SpectatorMixing::ideal_uniform;
      else if (s == "none")
        mixing = sim::SpectatorMixing::none;
      else
        throw validation_error("model file: unknown spectator_mixing '" +
                               s + "'");
    }
    std::vector<sim::ClusterNoise> clusters;
    for (const auto &c : j.at("clusters")) {
      auto ids = c.at("qubits").get<std::vector<int>>();
      std::vector<int> positions;
      for (int q : ids) {
        int p = layout.position_of(q);
        if (p < 0)
          throw validation_error("model file: cluster qubit " +
                                 std::to_string(q) + " not in layout");
        positions.push_back(p);
      }
      SubsystemSelection sel(layout, positions);
      QubitLayout cluster_layout(ids);
      FidelityMatrix matrix = FidelityMatrix::checked(
          cluster_layout, c.at("matrix").get<std::vector<double>>());
      std::optional<FidelityMatrix> odd;
      if (c.contains("matrix_odd"))
        odd = FidelityMatrix::checked(
            cluster_layout, c.at("matrix_odd").get<std::vector<double>>());
      clusters.push_back({std::move(sel), std::move(matrix), std::move(odd)});
    }
    return sim::NoiseModel(std::move(layout), std::move(clusters), mixing);
  });
}

// ---------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------

inline json metric_report_to_json(const MetricReport &r) {
  json j{{"dist_identity", r.dist_identity},
         {"n_qubits", r.n_qubits},
         {"white_noise_bound", r.white_noise_bound}};
  if (r.dist_reference)
    j["dist_reference"] = *r.dist_reference;
  if (r.delta_f)
    j["delta_f"] = *r.delta_f;
  return j;
}

inline json uncertainty_report_to_json(const UncertaintyReport &r) {
  return json{{"scf", r.scf},
              {"sigma_scf", r.sigma_scf},
              {"significant", r.significant}};
}

// ---------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------

namespace detail {
inline std::string format_double(double v) {
  // Shortest representation that round-trips, via the JSON serializer.
  return json(v).dump();
}
} // namespace detail

// n x n heatmap; header row carries the qubit ids.
inline std::string heatmap_csv(const QubitLayout &layout,
                               const std::vector<double> &heat) {
  const int n = layout.width();
  if (heat.size() != static_cast<std::size_t>(n) * n)
    throw validation_error("heatmap_csv: matrix size does not match layout");
  std::ostringstream out;
  for (int c = 0; c < n; ++c)
    out << (c ? "," : "") << layout.qubit_at(c);
  out << "\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c)
      out << (c ? "," : "")
          << detail::format_double(heat[static_cast<std::size_t>(r) * n + c]);
    out << "\n";
  }
  return out.str();
}

// Per-state fidelity diagonal: (state, f) or (state, f_reference,
// f_reconstructed) when a reference kernel is given.
inline std::string fidelity_csv(const FidelityMatrix &K,
                                const FidelityMatrix *reference = nullptr) {
  if (reference && reference->dim() != K.dim())
    throw validation_error("fidelity_csv: dimension mismatch");
  std::ostringstream out;
  out << (reference ? "state,f_reference,f_reconstructed\n" : "state,f\n");
  for (std::uint64_t i = 0; i < K.dim(); ++i) {
    out << BitString(i, K.width()).to_string();
    if (reference)
      out << "," << detail::format_double(reference->at(i, i));
    out << "," << detail::format_double(K.at(i, i)) << "\n";
  }
  return out.str();
}

// Circuit-cost curves for n = 1..n_max. The split column uses k = n/2
// and is empty at n = 1 where no split exists.
inline std::string cost_curve_csv(int n_max) {
  if (n_max < 1)
    throw validation_error("cost_curve_csv: n_max must be >= 1");
  std::ostringstream out;
  out << "n,full,singles,pairs,triples,split_half\n";
  for (int n = 1; n <= n_max; ++n) {
    out << n << "," << sim::circuit_cost(n, sim::CostStrategy::full) << ","
        << sim::circuit_cost(n, sim::CostStrategy::singles) << ","
        << sim::circuit_cost(n, sim::CostStrategy::pairs) << ","
        << sim::circuit_cost(n, sim::CostStrategy::triples) << ",";
    if (n >= 2)
      out << sim::circuit_cost(n, sim::CostStrategy::split, n / 2);
    out << "\n";
  }
  return out.str();
}

// Minimal CSV reader for the formats emitted above (numeric cells plus a
// header line); used by round-trip checks.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable parse_csv(const std::string &text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.push_back("");
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

} // namespace mfm::io
