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
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "mfm/cumulant.hpp"
#include "mfm/estimate.hpp"
#include "mfm/io.hpp"
#include "mfm/matrix.hpp"
#include "mfm/metrics.hpp"
#include "mfm/mitigate.hpp"
#include "mfm/simdevice.hpp"

namespace mfm::cli {

// Exit codes form a stable contract: 0 success, 2 validation error,
// 3 numerical error, 4 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

namespace detail {

using io::json;

// A jointly measured sub-MFM plus the shot count behind it.
struct MeasuredJoint {
  FidelityMatrix K;
  std::uint64_t shots = 0;
};

// Turn one counts file into a measured MFM: spectator files are
// extracted onto the complement of the declared spectator positions,
// plain files are built directly over their own layout.
inline MeasuredJoint measured_from_file(const io::CountsFile &f) {
  if (f.spectator_positions) {
    std::vector<int> spect = *f.spectator_positions;
    std::sort(spect.begin(), spect.end());
    std::vector<int> target;
    for (int p = 0; p < f.layout.width(); ++p)
      if (!std::binary_search(spect.begin(), spect.end(), p))
        target.push_back(p);
    SubsystemSelection sel(f.layout, target);
    return {extract_with_spectators(f.records, sel), f.shots};
  }
  return {build_mfm(f.records, f.layout), f.shots};
}

// Reorder an MFM so its qubit ids ascend.
inline FidelityMatrix sorted_by_id(const FidelityMatrix &K) {
  std::vector<int> ids = K.layout().qubits();
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (sorted == ids)
    return K;
  std::vector<int> new_order;
  for (int q : sorted)
    new_order.push_back(K.layout().position_of(q));
  return permute_qubits(K, new_order);
}

// Entrywise averages of every marginal of order <= max_order seen across
// the measured joints, keyed by ascending qubit ids. Averaging keeps rows
// stochastic and uses all available data for each subsystem.
inline std::map<std::vector<int>, FidelityMatrix>
consensus_marginals(const std::vector<MeasuredJoint> &joints, int max_order) {
  std::map<std::vector<int>, std::pair<std::vector<double>, int>> acc;
  for (const auto &joint : joints) {
    const int w = joint.K.width();
    std::vector<std::vector<int>> subsets;
    for (int a = 0; a < w; ++a) {
      subsets.push_back({a});
      if (max_order < 2)
        continue;
      for (int b = a + 1; b < w; ++b) {
        subsets.push_back({a, b});
        if (max_order < 3)
          continue;
        for (int c = b + 1; c < w; ++c)
          subsets.push_back({a, b, c});
      }
    }
    for (const auto &positions : subsets) {
      FidelityMatrix marg = sorted_by_id(marginalize(
          joint.K, SubsystemSelection(joint.K.layout(), positions)));
      auto &slot = acc[marg.layout().qubits()];
      if (slot.second == 0)
        slot.first = marg.entries();
      else
        for (std::size_t k = 0; k < slot.first.size(); ++k)
          slot.first[k] += marg.entries()[k];
      slot.second += 1;
    }
  }
  std::map<std::vector<int>, FidelityMatrix> out;
  for (auto &[ids, slot] : acc) {
    for (double &v : slot.first)
      v /= slot.second;
    out.emplace(ids, FidelityMatrix::checked(QubitLayout(ids),
                                             std::move(slot.first), 1e-6));
  }
  return out;
}

inline const FidelityMatrix &
require_marginal(const std::map<std::vector<int>, FidelityMatrix> &m,
                 const std::vector<int> &ids, const char *what) {
  auto it = m.find(ids);
  if (it == m.end()) {
    std::string key;
    for (std::size_t i = 0; i < ids.size(); ++i)
      key += (i ? "," : "") + std::to_string(ids[i]);
    throw validation_error(std::string("no input data covers the ") + what +
                           " {" + key + "}");
  }
  return it->second;
}

inline std::vector<int> parse_id_list(const std::string &text) {
  std::vector<int> ids;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      ids.push_back(std::stoi(cell, &used));
      if (used != cell.size())
        throw validation_error("");
    } catch (const std::exception &) {
      throw validation_error("cannot parse qubit id '" + cell + "'");
    }
  }
  if (ids.empty())
    throw validation_error("empty qubit id list");
  return ids;
}

inline std::uint64_t common_shots(const std::vector<MeasuredJoint> &joints) {
  std::uint64_t shots = joints.front().shots;
  for (const auto &j : joints)
    if (j.shots != shots)
      throw validation_error("input files disagree on shot counts; one "
                             "common n_s is required here");
  return shots;
}

// ---------------------------------------------------------------------
// Command bodies (throw mfm errors; run() maps them to exit codes)
// ---------------------------------------------------------------------

inline void cmd_build_full(const std::string &counts_path,
                           const std::string &output,
                           const std::string &metrics_path,
                           std::ostream &out) {
  io::CountsFile f = io::counts_from_json(io::read_json_file(counts_path));
  if (f.spectator_positions)
    throw validation_error("build-full expects plain full-layout counts; "
                           "this file declares spectator positions");
  FidelityMatrix K = build_mfm(f.records, f.layout);
  io::write_json_file(output, io::matrix_to_json({K, false, false}));
  json report = io::metric_report_to_json(make_metric_report(K));
  if (!metrics_path.empty())
    io::write_json_file(metrics_path, report);
  out << report.dump(2) << "\n";
}

inline void cmd_vendor_kernel(const std::string &cal_path,
                              const std::string &layout_text,
                              const std::string &output, std::ostream &out) {
  io::CalibrationFile cal =
      io::calibration_from_json(io::read_json_file(cal_path));
  if (cal.entries.empty())
    throw validation_error("calibration file has no entries");
  std::map<int, io::CalibrationEntry> by_id;
  std::vector<int> ids;
  for (const auto &e : cal.entries) {
    if (!by_id.emplace(e.qubit, e).second)
      throw validation_error("calibration file lists qubit " +
                             std::to_string(e.qubit) + " twice");
    ids.push_back(e.qubit);
  }
  if (!layout_text.empty())
    ids = parse_id_list(layout_text);
  std::vector<FidelityMatrix> factors;
  for (int q : ids) {
    auto it = by_id.find(q);
    if (it == by_id.end())
      throw validation_error("calibration file has no entry for qubit " +
                             std::to_string(q));
    factors.push_back(io::vendor_kernel(it->second));
  }
  FidelityMatrix K = tensor_product(factors);
  io::write_json_file(output, io::matrix_to_json({K, false, false}));
  out << io::metric_report_to_json(make_metric_report(K)).dump(2) << "\n";
}

inline void cmd_reconstruct(const std::string &mode,
                            const std::string &layout_text,
                            const std::vector<std::string> &inputs,
                            const std::string &output, bool bias,
                            bool project, const std::string &reference,
                            const std::string &fidelities,
                            const std::string &metrics_path,
                            std::ostream &out) {
  QubitLayout target(parse_id_list(layout_text));
  std::optional<FidelityMatrix> ref;
  if (!reference.empty()) {
    FidelityMatrix R =
        io::matrix_from_json(io::read_json_file(reference)).matrix;
    if (R.layout() != target)
      R = cluster_product(std::vector<FidelityMatrix>{R}, target);
    ref = std::move(R);
  }

  FidelityMatrix result = FidelityMatrix::identity(target);
  if (mode == "cluster") {
    std::vector<FidelityMatrix> mats;
    for (const auto &path : inputs) {
      io::CountsFile f = io::counts_from_json(io::read_json_file(path));
      if (f.spectator_positions)
        throw validation_error("cluster mode expects isolated cluster "
                               "files, not spectator runs: " + path);
      mats.push_back(build_mfm(f.records, f.layout));
    }
    result = cluster_product(mats, target);
  } else {
    const int order = (mode == "cumulant3") ? 3 : 2;
    std::vector<MeasuredJoint> joints;
    for (const auto &path : inputs) {
      io::CountsFile f = io::counts_from_json(io::read_json_file(path));
      if (f.spectator_positions && f.layout != target)
        throw validation_error("spectator file layout differs from "
                               "--layout: " + path);
      joints.push_back(measured_from_file(f));
      for (int q : joints.back().K.layout().qubits())
        if (target.position_of(q) < 0)
          throw validation_error(path + " covers qubit " +
                                 std::to_string(q) + " outside --layout");
    }
    if (joints.empty())
      throw validation_error("no input files given");
    auto cons = consensus_marginals(joints, order);
    std::vector<int> ids = target.qubits();
    std::sort(ids.begin(), ids.end());
    CumulantOptions opts;
    if (bias) {
      opts.shots = common_shots(joints);
      opts.bias_correct = true;
    }
    std::vector<CumulantTensor> singles, pair_tensors, triple_tensors;
    for (int a : ids)
      singles.push_back(cumulant1(require_marginal(cons, {a}, "qubit")));
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        int a = ids[i], b = ids[j];
        pair_tensors.push_back(cumulant2(
            require_marginal(cons, {a, b}, "pair"),
            require_marginal(cons, {a}, "qubit"),
            require_marginal(cons, {b}, "qubit"), opts));
      }
    if (order == 3)
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j)
          for (std::size_t k = j + 1; k < ids.size(); ++k) {
            int a = ids[i], b = ids[j], c = ids[k];
            FidelityMatrix K_ca = permute_qubits(
                require_marginal(cons, {a, c}, "pair"), {1, 0});
            triple_tensors.push_back(
                cumulant3(require_marginal(cons, {a, b, c}, "triple"),
                          require_marginal(cons, {a, b}, "pair"),
                          require_marginal(cons, {b, c}, "pair"), K_ca,
                          require_marginal(cons, {a}, "qubit"),
                          require_marginal(cons, {b}, "qubit"),
                          require_marginal(cons, {c}, "qubit")));
          }
    result = reconstruct_from_cumulants(singles, pair_tensors, target, order,
                                        triple_tensors);
  }

  json report;
  report["raw"] = io::metric_report_to_json(make_metric_report(result, ref));
  FidelityMatrix artifact = result;
  bool projected = false;
  if (project) {
    artifact = project_stochastic(result);
    projected = true;
    report["projected"] =
        io::metric_report_to_json(make_metric_report(artifact, ref));
  }
  io::write_json_file(output, io::matrix_to_json({artifact, bias, projected}));
  if (!fidelities.empty())
    io::write_text_file(fidelities,
                        io::fidelity_csv(artifact, ref ? &*ref : nullptr));
  if (!metrics_path.empty())
    io::write_json_file(metrics_path, report);
  out << report.dump(2) << "\n";
}

inline void cmd_scf(const std::vector<std::string> &inputs,
                    bool clusters_mode, const std::string &split_text,
                    bool per_state, bool bias, const std::string &layout_text,
                    const std::string &report_path,
                    const std::string &heatmap_path, bool literal_absolute,
                    std::ostream &out) {
  json report{{"schema_version", io::kSchemaVersion}};
  auto per_state_json = [](const CumulantTensor &lambda) {
    json j = json::object();
    auto values = scf_by_target_state(lambda);
    const int w = lambda.subset().width();
    for (std::uint64_t i = 0; i < values.size(); ++i)
      j[BitString(i, w).to_string()] = values[i];
    return j;
  };

  if (clusters_mode) {
    if (inputs.size() != 1)
      throw validation_error("--clusters expects exactly one full counts "
                             "file");
    if (split_text.empty())
      throw validation_error("--clusters requires --split A/B (qubit id "
                             "lists)");
    auto slash = split_text.find('/');
    if (slash == std::string::npos)
      throw validation_error("--split must look like 0,1/2,3");
    std::vector<int> ids_a = parse_id_list(split_text.substr(0, slash));
    std::vector<int> ids_b = parse_id_list(split_text.substr(slash + 1));
    io::CountsFile f = io::counts_from_json(io::read_json_file(inputs[0]));
    if (f.spectator_positions)
      throw validation_error("--clusters expects a plain full counts file");
    FidelityMatrix K = build_mfm(f.records, f.layout);
    std::vector<int> new_order;
    for (int q : ids_a)
      new_order.push_back(K.layout().position_of(q));
    for (int q : ids_b)
      new_order.push_back(K.layout().position_of(q));
    for (int p : new_order)
      if (p < 0)
        throw validation_error("--split names a qubit outside the file "
                               "layout");
    FidelityMatrix K_AB = permute_qubits(K, new_order);
    const int wa = static_cast<int>(ids_a.size());
    std::vector<int> pos_a(static_cast<std::size_t>(wa));
    for (int p = 0; p < wa; ++p)
      pos_a[static_cast<std::size_t>(p)] = p;
    std::vector<int> pos_b;
    for (int p = wa; p < K_AB.width(); ++p)
      pos_b.push_back(p);
    FidelityMatrix K_A = marginalize(K_AB, SubsystemSelection(K_AB.layout(), pos_a));
    FidelityMatrix K_B = marginalize(K_AB, SubsystemSelection(K_AB.layout(), pos_b));
    CumulantOptions opts;
    opts.shots = f.shots;
    opts.bias_correct = bias;
    ScfResult res = scf(K_AB, K_A, K_B, opts);
    UncertaintyReport ur = make_uncertainty_report(res.lambda);
    json entry{{"qubits_a", ids_a}, {"qubits_b", ids_b}};
    entry.update(io::uncertainty_report_to_json(ur));
    if (per_state)
      entry["per_state"] = per_state_json(res.lambda);
    report["mode"] = "clusters";
    report["shots"] = f.shots;
    report["clusters"] = json::array({entry});
  } else {
    if (inputs.empty())
      throw validation_error("no input files given");
    struct Entry {
      std::vector<int> ids;
      double scf_value;
      double sigma;
      bool significant;
      json per_state;
    };
    std::vector<Entry> entries;
    std::vector<int> union_ids;
    json pairs = json::array();
    std::uint64_t shots_out = 0;
    for (const auto &path : inputs) {
      io::CountsFile f = io::counts_from_json(io::read_json_file(path));
      MeasuredJoint mj = measured_from_file(f);
      if (mj.K.width() != 2)
        throw validation_error(path + ": scf pair mode expects 2-qubit "
                               "data, got " +
                               std::to_string(mj.K.width()) + " qubits");
      FidelityMatrix K_ab = sorted_by_id(mj.K);
      FidelityMatrix K_a =
          marginalize(K_ab, SubsystemSelection(K_ab.layout(), {0}));
      FidelityMatrix K_b =
          marginalize(K_ab, SubsystemSelection(K_ab.layout(), {1}));
      CumulantOptions opts;
      opts.shots = mj.shots;
      opts.bias_correct = bias;
      ScfResult res = scf(K_ab, K_a, K_b, opts);
      UncertaintyReport ur = make_uncertainty_report(res.lambda);
      Entry e{K_ab.layout().qubits(), ur.scf, ur.sigma_scf, ur.significant,
              json()};
      json entry{{"qubits", e.ids}};
      entry.update(io::uncertainty_report_to_json(ur));
      if (per_state)
        entry["per_state"] = per_state_json(res.lambda);
      pairs.push_back(std::move(entry));
      entries.push_back(std::move(e));
      for (int q : entries.back().ids)
        union_ids.push_back(q);
      shots_out = mj.shots;
    }
    report["mode"] = "pairs";
    report["shots"] = shots_out;
    report["pairs"] = std::move(pairs);

    if (!heatmap_path.empty()) {
      std::sort(union_ids.begin(), union_ids.end());
      union_ids.erase(std::unique(union_ids.begin(), union_ids.end()),
                      union_ids.end());
      QubitLayout heat_layout(layout_text.empty()
                                  ? union_ids
                                  : parse_id_list(layout_text));
      std::map<std::pair<int, int>, PairStat> stats;
      for (const auto &e : entries) {
        int pa = heat_layout.position_of(e.ids[0]);
        int pb = heat_layout.position_of(e.ids[1]);
        if (pa < 0 || pb < 0)
          throw validation_error("pair covers a qubit outside the heatmap "
                                 "layout");
        if (pa > pb)
          std::swap(pa, pb);
        if (!stats.emplace(std::make_pair(pa, pb),
                           PairStat{e.scf_value, e.sigma})
                 .second)
          throw validation_error("duplicate input for one qubit pair");
      }
      auto heat = correlation_heatmap(heat_layout, stats, literal_absolute);
      io::write_text_file(heatmap_path, io::heatmap_csv(heat_layout, heat));
    }
  }

  if (!report_path.empty())
    io::write_json_file(report_path, report);
  out << report.dump(2) << "\n";
}

inline void cmd_mitigate(const std::string &dist_path,
                         const std::string &matrix_path,
                         const std::string &method, const std::string &output,
                         std::ostream &out, std::ostream &err) {
  io::DistributionFile df =
      io::distribution_from_json(io::read_json_file(dist_path));
  FidelityMatrix K =
      io::matrix_from_json(io::read_json_file(matrix_path)).matrix;
  if (K.layout() != df.dist.layout())
    K = cluster_product(std::vector<FidelityMatrix>{K}, df.dist.layout());
  MitigationMethod m = (method == "project-solve")
                           ? MitigationMethod::project_solve
                           : MitigationMethod::solve;
  MitigationResult res = mitigate(df.dist, K, m);
  io::write_json_file(output,
                      io::distribution_to_json({res.distribution,
                                                res.projected}));
  if (res.condition_number > 1e8)
    err << "warning: kernel condition number " << res.condition_number
        << "; mitigated distribution is unreliable\n";
  out << json{{"condition_number", res.condition_number},
              {"projected", res.projected}}
             .dump(2)
      << "\n";
}

inline void cmd_simulate(const std::string &model_path,
                         const std::string &experiment, std::uint64_t shots,
                         std::uint64_t seed, const std::string &out_dir,
                         std::ostream &out) {
  sim::NoiseModel model = io::model_from_json(io::read_json_file(model_path));
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw io_error("cannot create directory " + out_dir);
  std::vector<std::string> files;
  auto emit = [&](const std::string &name, const io::CountsFile &f) {
    std::string path = (fs::path(out_dir) / name).string();
    io::write_json_file(path, io::counts_to_json(f));
    files.push_back(path);
  };

  if (experiment == "full") {
    auto records = sim::full_mfm_experiment(model, model.layout(), shots, seed);
    emit("counts_full.json",
         {model.layout(), shots, std::nullopt, std::move(records)});
  } else if (experiment == "pairs-with-spectators") {
    const int n = model.layout().width();
    if (n < 2)
      throw validation_error("pairs-with-spectators needs >= 2 qubits");
    std::uint64_t pair_index = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q, ++pair_index) {
        SubsystemSelection target(model.layout(), {p, q});
        std::uint64_t pair_seed = sim::detail::derive_seed(seed, pair_index, 4);
        std::vector<CountsRecord> records;
        for (std::uint64_t t = 0; t < 4; ++t)
          records.push_back(sim::spectator_run(model, target, BitString(t, 2),
                                               shots, pair_seed));
        io::CountsFile f{model.layout(), shots, target.complement(),
                         std::move(records)};
        emit("counts_pair_" +
                 std::to_string(model.layout().qubit_at(p)) + "_" +
                 std::to_string(model.layout().qubit_at(q)) + ".json",
             f);
      }
  } else if (experiment == "clusters") {
    std::uint64_t cluster_index = 0;
    for (const auto &c : model.clusters()) {
      QubitLayout sub_layout = c.matrix.layout();
      std::vector<int> all(static_cast<std::size_t>(sub_layout.width()));
      for (int p = 0; p < sub_layout.width(); ++p)
        all[static_cast<std::size_t>(p)] = p;
      sim::NoiseModel sub(sub_layout,
                          {{SubsystemSelection(sub_layout, all), c.matrix,
                            c.matrix_odd}},
                          model.spectator_mixing());
      auto records = sim::full_mfm_experiment(
          sub, sub_layout, shots,
          sim::detail::derive_seed(seed, cluster_index++, 5));
      std::string name = "counts_cluster";
      for (int q : sub_layout.qubits())
        name += "_" + std::to_string(q);
      emit(name + ".json", {sub_layout, shots, std::nullopt, std::move(records)});
    }
  } else {
    throw validation_error("unknown experiment '" + experiment + "'");
  }
  out << json{{"experiment", experiment},
              {"seed", seed},
              {"shots", shots},
              {"files", files}}
             .dump(2)
      << "\n";
}

inline void cmd_cost(int n, const std::string &strategy, int k, int curve,
                     const std::string &output, std::ostream &out) {
  if (curve > 0) {
    std::string csv = io::cost_curve_csv(curve);
    if (!output.empty())
      io::write_text_file(output, csv);
    else
      out << csv;
    return;
  }
  if (n < 1 || strategy.empty())
    throw validation_error("cost needs either --curve N or both -n and "
                           "--strategy");
  sim::CostStrategy s;
  if (strategy == "full")
    s = sim::CostStrategy::full;
  else if (strategy == "singles")
    s = sim::CostStrategy::singles;
  else if (strategy == "pairs")
    s = sim::CostStrategy::pairs;
  else if (strategy == "triples")
    s = sim::CostStrategy::triples;
  else if (strategy == "split")
    s = sim::CostStrategy::split;
  else
    throw validation_error("unknown strategy '" + strategy + "'");
  out << sim::circuit_cost(n, s, k) << "\n";
}

} // namespace detail

inline int run(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err) {
  CLI::App app{"measurement fidelity matrix toolkit"};
  app.name("mfm");
  app.require_subcommand(1);

  // build-full
  std::string bf_counts, bf_output, bf_metrics;
  auto *build = app.add_subcommand(
      "build-full", "Build an MFM directly from a full counts file");
  build->add_option("counts", bf_counts, "counts JSON file")->required();
  build->add_option("-o,--output", bf_output, "matrix artifact path")
      ->required();
  build->add_option("--metrics", bf_metrics, "also write the metric report "
                                             "to this path");

  // vendor-kernel
  std::string vk_cal, vk_layout, vk_output;
  auto *vendor = app.add_subcommand(
      "vendor-kernel",
      "Tensor per-qubit kernels from reported readout flip rates");
  vendor->add_option("calibration", vk_cal, "calibration JSON file")
      ->required();
  vendor->add_option("--layout", vk_layout,
                     "comma-separated qubit ids (default: file order)");
  vendor->add_option("-o,--output", vk_output, "matrix artifact path")
      ->required();

  // reconstruct
  std::string rc_mode, rc_layout, rc_output, rc_reference, rc_fidelities,
      rc_metrics;
  std::vector<std::string> rc_inputs;
  bool rc_bias = false, rc_project = false;
  auto *recon = app.add_subcommand(
      "reconstruct", "Approximate an n-qubit MFM from subsystem data");
  recon->add_option("inputs", rc_inputs, "counts files")->required();
  recon
      ->add_option("--mode", rc_mode,
                   "cumulant2 | cumulant3 | cluster")
      ->required()
      ->check(CLI::IsMember({"cumulant2", "cumulant3", "cluster"}));
  recon->add_option("--layout", rc_layout, "target qubit ids")->required();
  recon->add_option("-o,--output", rc_output, "matrix artifact path")
      ->required();
  recon->add_flag("--bias-correct", rc_bias,
                  "apply the finite-shot cumulant bias factor");
  recon->add_flag("--project", rc_project,
                  "clip+renormalize the reconstruction to a stochastic "
                  "matrix");
  recon->add_option("--reference", rc_reference,
                    "reference matrix file for comparison metrics");
  recon->add_option("--emit-fidelities", rc_fidelities,
                    "write per-state fidelity CSV to this path");
  recon->add_option("--metrics", rc_metrics,
                    "also write the metric report to this path");

  // scf
  std::vector<std::string> scf_inputs;
  std::string scf_split, scf_layout, scf_report, scf_heatmap;
  bool scf_clusters = false, scf_per_state = false, scf_bias = false,
       scf_literal = false;
  auto *scf_cmd = app.add_subcommand(
      "scf", "Scalar correlation factors with significance");
  scf_cmd->add_option("inputs", scf_inputs, "counts files")->required();
  scf_cmd->add_flag("--clusters", scf_clusters,
                    "treat the input as one joint file split into two "
                    "clusters");
  scf_cmd->add_option("--split", scf_split,
                      "cluster split as qubit id lists, e.g. 0,1/2,3");
  scf_cmd->add_flag("--per-state", scf_per_state,
                    "decompose each SCF by input state");
  scf_cmd->add_flag("--bias-correct", scf_bias,
                    "apply the finite-shot cumulant bias factor");
  scf_cmd->add_option("--layout", scf_layout,
                      "heatmap qubit ids (default: union of pair ids)");
  scf_cmd->add_option("-o,--output", scf_report, "report JSON path");
  scf_cmd->add_option("--heatmap", scf_heatmap, "heatmap CSV path");
  scf_cmd->add_flag("--literal-absolute", scf_literal,
                    "heatmap uses |scf - sigma| instead of clamping "
                    "insignificant pairs to zero");

  // mitigate
  std::string mt_dist, mt_matrix, mt_method = "solve", mt_output;
  auto *mit = app.add_subcommand(
      "mitigate", "Invert a readout kernel on an observed distribution");
  mit->add_option("distribution", mt_dist, "distribution JSON file")
      ->required();
  mit->add_option("matrix", mt_matrix, "MFM artifact file")->required();
  mit->add_option("--method", mt_method, "solve | project-solve")
      ->check(CLI::IsMember({"solve", "project-solve"}));
  mit->add_option("-o,--output", mt_output, "mitigated distribution path")
      ->required();

  // simulate
  std::string sm_model, sm_experiment = "full", sm_outdir = ".";
  std::uint64_t sm_shots = 8192, sm_seed = 0;
  auto *simc = app.add_subcommand(
      "simulate", "Sample counts files from a correlated-noise model");
  simc->add_option("model", sm_model, "noise model JSON file")->required();
  simc->add_option("--experiment", sm_experiment,
                   "full | pairs-with-spectators | clusters")
      ->check(CLI::IsMember({"full", "pairs-with-spectators", "clusters"}));
  simc->add_option("--shots", sm_shots, "shots per prepared state");
  simc->add_option("--seed", sm_seed, "base RNG seed")
      ->envname("MFMKIT_SEED");
  simc->add_option("--out-dir", sm_outdir, "output directory");

  // cost
  int cost_n = 0, cost_k = 0, cost_curve = 0;
  std::string cost_strategy, cost_output;
  auto *cost = app.add_subcommand(
      "cost", "Circuit counts for MFM construction strategies");
  cost->add_option("-n,--qubits", cost_n, "number of qubits");
  cost->add_option("--strategy", cost_strategy,
                   "full | singles | pairs | triples | split");
  cost->add_option("--k", cost_k, "split point for --strategy split");
  cost->add_option("--curve", cost_curve,
                   "emit a CSV of all strategies for n = 1..N");
  cost->add_option("-o,--output", cost_output, "CSV path (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (build->parsed())
      detail::cmd_build_full(bf_counts, bf_output, bf_metrics, out);
    else if (vendor->parsed())
      detail::cmd_vendor_kernel(vk_cal, vk_layout, vk_output, out);
    else if (recon->parsed())
      detail::cmd_reconstruct(rc_mode, rc_layout, rc_inputs, rc_output,
                              rc_bias, rc_project, rc_reference,
                              rc_fidelities, rc_metrics, out);
    else if (scf_cmd->parsed())
      detail::cmd_scf(scf_inputs, scf_clusters, scf_split, scf_per_state,
                      scf_bias, scf_layout, scf_report, scf_heatmap,
                      scf_literal, out);
    else if (mit->parsed())
      detail::cmd_mitigate(mt_dist, mt_matrix, mt_method, mt_output, out, err);
    else if (simc->parsed())
      detail::cmd_simulate(sm_model, sm_experiment, sm_shots, sm_seed,
                           sm_outdir, out);
    else if (cost->parsed())
      detail::cmd_cost(cost_n, cost_strategy, cost_k, cost_curve, cost_output,
                       out);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const validation_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const io_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const numerical_error &e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

} // namespace mfm::cli
