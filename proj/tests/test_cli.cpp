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

#include <cstdlib>
#include <map>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace mfm;
using nlohmann::json;
using testutil::run_cli;
using Catch::Matchers::ContainsSubstring;

namespace {

using Histogram = std::map<std::uint64_t, std::uint64_t>;
using Row = std::pair<std::uint64_t, Histogram>;

void write_counts(const std::string &path, const QubitLayout &layout,
                  std::uint64_t shots, const std::vector<Row> &rows) {
  io::CountsFile f{layout, shots, std::nullopt, {}};
  for (const auto &[prep, counts] : rows)
    f.records.emplace_back(BitString(prep, layout.width()), counts, shots);
  io::write_json_file(path, io::counts_to_json(f));
}

void write_matrix(const std::string &path, const FidelityMatrix &K) {
  io::write_json_file(path, io::matrix_to_json({K, false, false}));
}

FidelityMatrix read_matrix(const std::string &path) {
  return io::matrix_from_json(io::read_json_file(path)).matrix;
}

// Exactly factorizable pair statistics: every joint count is the product
// of the per-qubit marginals times the shot count, so all cumulants on
// this data vanish up to rounding in the division.
const std::vector<Row> kPairRows{
    {0, {{0, 72}, {1, 18}, {2, 8}, {3, 2}}},
    {1, {{0, 27}, {1, 63}, {2, 3}, {3, 7}}},
    {2, {{0, 16}, {1, 4}, {2, 64}, {3, 16}}},
    {3, {{0, 6}, {1, 14}, {2, 24}, {3, 56}}}};
const std::vector<Row> kQ0Rows{{0, {{0, 90}, {1, 10}}},
                               {1, {{0, 20}, {1, 80}}}};
const std::vector<Row> kQ1Rows{{0, {{0, 80}, {1, 20}}},
                               {1, {{0, 30}, {1, 70}}}};

FidelityMatrix pair_truth() {
  auto K0 = FidelityMatrix::checked(QubitLayout({0}), {0.9, 0.1, 0.2, 0.8});
  auto K1 = FidelityMatrix::checked(QubitLayout({1}), {0.8, 0.2, 0.3, 0.7});
  return tensor_product({K0, K1});
}

} // namespace

TEST_CASE("help and argument errors use the exit-code contract", "[cli]") {
  REQUIRE(run_cli({"--help"}).code == 0);
  auto help = run_cli({"--help"});
  REQUIRE_THAT(help.out, ContainsSubstring("build-full"));
  REQUIRE_THAT(help.out, ContainsSubstring("mitigate"));
  REQUIRE_THAT(help.out, ContainsSubstring("simulate"));

  REQUIRE(run_cli({}).code == 2);
  REQUIRE(run_cli({"no-such-command"}).code == 2);
  REQUIRE(run_cli({"cost", "--bogus-flag"}).code == 2);
}

TEST_CASE("file problems map to exit code 4, schema problems to 2",
          "[cli]") {
  testutil::TempDir dir;
  auto missing = run_cli({"build-full", dir.file("absent.json"), "-o",
                          dir.file("out.json")});
  REQUIRE(missing.code == 4);
  REQUIRE_THAT(missing.err, ContainsSubstring("cannot open"));

  io::write_text_file(dir.file("bad.json"), "{ not json");
  auto malformed = run_cli({"build-full", dir.file("bad.json"), "-o",
                            dir.file("out.json")});
  REQUIRE(malformed.code == 4);

  io::write_json_file(dir.file("nofield.json"),
                      json{{"layout", {0}}, {"records", json::array()}});
  auto nofield = run_cli({"build-full", dir.file("nofield.json"), "-o",
                          dir.file("out.json")});
  REQUIRE(nofield.code == 2);
  REQUIRE_THAT(nofield.err, ContainsSubstring("counts file"));
}

TEST_CASE("build-full reproduces the exact empirical matrix", "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("counts.json"), QubitLayout({0}), 10000,
               {{0, {{0, 9800}, {1, 200}}}, {1, {{0, 500}, {1, 9500}}}});
  auto res = run_cli({"build-full", dir.file("counts.json"), "-o",
                      dir.file("mfm.json"), "--metrics",
                      dir.file("metrics.json")});
  REQUIRE(res.code == 0);
  auto K = read_matrix(dir.file("mfm.json"));
  REQUIRE(K.at(0, 0) == 0.98);
  REQUIRE(K.at(0, 1) == 0.02);
  REQUIRE(K.at(1, 0) == 0.05);
  REQUIRE(K.at(1, 1) == 0.95);

  auto report = json::parse(res.out);
  REQUIRE(report.at("n_qubits").get<int>() == 1);
  REQUIRE(report == io::read_json_file(dir.file("metrics.json")));
}

TEST_CASE("build-full reports malformed record sets", "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("short.json"), QubitLayout({0, 1}), 100,
               {{0, {{0, 100}}}, {1, {{1, 100}}}, {2, {{2, 100}}}});
  auto res = run_cli({"build-full", dir.file("short.json"), "-o",
                      dir.file("out.json")});
  REQUIRE(res.code == 2);
  REQUIRE_THAT(res.err, ContainsSubstring("expected 4 records"));
}

TEST_CASE("vendor-kernel tensors per-qubit kernels in layout order",
          "[cli]") {
  testutil::TempDir dir;
  io::write_json_file(
      dir.file("cal.json"),
      io::calibration_to_json(
          {{{0, 0.02, 0.05}, {1, 0.0, 0.0}}}));

  auto res = run_cli({"vendor-kernel", dir.file("cal.json"), "--layout",
                      "0,1", "-o", dir.file("k.json")});
  REQUIRE(res.code == 0);
  auto K = read_matrix(dir.file("k.json"));
  REQUIRE(K.layout() == QubitLayout({0, 1}));
  REQUIRE(K.at(0, 0) == 0.98);
  REQUIRE(K.at(2, 0) == 0.05); // prepared 10: flip on qubit 0, ideal qubit 1
  REQUIRE(K.at(1, 1) == 0.98);

  auto swapped = run_cli({"vendor-kernel", dir.file("cal.json"), "--layout",
                          "1,0", "-o", dir.file("k2.json")});
  REQUIRE(swapped.code == 0);
  auto K2 = read_matrix(dir.file("k2.json"));
  REQUIRE(K2.layout() == QubitLayout({1, 0}));
  REQUIRE(K2.at(1, 1) == 0.95); // LSB is now qubit 0

  auto absent = run_cli({"vendor-kernel", dir.file("cal.json"), "--layout",
                         "0,7", "-o", dir.file("k3.json")});
  REQUIRE(absent.code == 2);
  REQUIRE_THAT(absent.err, ContainsSubstring("no entry for qubit 7"));
}

TEST_CASE("reconstruct with pairwise cumulants recovers a product kernel",
          "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("q0.json"), QubitLayout({0}), 100, kQ0Rows);
  write_counts(dir.file("q1.json"), QubitLayout({1}), 100, kQ1Rows);
  write_counts(dir.file("pair.json"), QubitLayout({0, 1}), 100, kPairRows);
  write_matrix(dir.file("ref.json"), pair_truth());

  auto res = run_cli({"reconstruct", dir.file("q0.json"), dir.file("q1.json"),
                      dir.file("pair.json"), "--mode", "cumulant2",
                      "--layout", "0,1", "-o", dir.file("recon.json"),
                      "--reference", dir.file("ref.json"), "--project",
                      "--emit-fidelities", dir.file("fid.csv")});
  REQUIRE(res.code == 0);

  auto K = read_matrix(dir.file("recon.json"));
  REQUIRE(testutil::max_abs_diff(K, pair_truth()) <= 1e-12);
  auto flags = io::read_json_file(dir.file("recon.json")).at("flags");
  REQUIRE(flags.at("projected").get<bool>());

  auto report = json::parse(res.out);
  REQUIRE(report.at("raw").at("dist_reference").get<double>() <= 1e-12);
  REQUIRE(report.contains("projected"));

  auto fid = io::parse_csv(testutil::slurp(dir.file("fid.csv")));
  REQUIRE(fid.header ==
          std::vector<std::string>{"state", "f_reference",
                                   "f_reconstructed"});
  REQUIRE(fid.rows.size() == 4);
}

TEST_CASE("reconstruct requires pair coverage in cumulant mode", "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("q0.json"), QubitLayout({0}), 100, kQ0Rows);
  write_counts(dir.file("q1.json"), QubitLayout({1}), 100, kQ1Rows);
  auto res = run_cli({"reconstruct", dir.file("q0.json"), dir.file("q1.json"),
                      "--mode", "cumulant2", "--layout", "0,1", "-o",
                      dir.file("out.json")});
  REQUIRE(res.code == 2);
  REQUIRE_THAT(res.err, ContainsSubstring("pair {0,1}"));
}

TEST_CASE("reconstruct rejects data outside the target layout", "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("q9.json"), QubitLayout({9}), 100, kQ0Rows);
  auto res = run_cli({"reconstruct", dir.file("q9.json"), "--mode",
                      "cumulant2", "--layout", "0,1", "-o",
                      dir.file("out.json")});
  REQUIRE(res.code == 2);
  REQUIRE_THAT(res.err, ContainsSubstring("outside --layout"));
}

TEST_CASE("third-order reconstruction inverts a full 3-qubit measurement",
          "[cli]") {
  testutil::TempDir dir;
  // Arbitrary correlated counts: any 3-qubit kernel is reproduced exactly
  // once third-order cumulants are kept.
  std::mt19937_64 rng(60601);
  std::vector<Row> rows;
  for (std::uint64_t i = 0; i < 8; ++i) {
    Histogram h;
    std::uint64_t left = 1000;
    for (std::uint64_t j = 0; j < 7; ++j) {
      std::uint64_t c = std::min<std::uint64_t>(left, rng() % 220);
      if (c > 0)
        h[j] = c;
      left -= c;
    }
    h[7] = left + (h.count(7) ? h[7] : 0);
    rows.push_back({i, h});
  }
  write_counts(dir.file("full.json"), QubitLayout({0, 1, 2}), 1000, rows);

  auto direct = run_cli({"build-full", dir.file("full.json"), "-o",
                         dir.file("direct.json")});
  REQUIRE(direct.code == 0);
  auto recon = run_cli({"reconstruct", dir.file("full.json"), "--mode",
                        "cumulant3", "--layout", "0,1,2", "-o",
                        dir.file("recon.json")});
  REQUIRE(recon.code == 0);
  REQUIRE(testutil::max_abs_diff(read_matrix(dir.file("direct.json")),
                                 read_matrix(dir.file("recon.json"))) <=
          1e-10);
}

TEST_CASE("cluster reconstruction reorders factors onto the target layout",
          "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("q1.json"), QubitLayout({1}), 100, kQ1Rows);
  write_counts(dir.file("q0.json"), QubitLayout({0}), 100, kQ0Rows);
  auto res = run_cli({"reconstruct", dir.file("q1.json"), dir.file("q0.json"),
                      "--mode", "cluster", "--layout", "0,1", "-o",
                      dir.file("out.json")});
  REQUIRE(res.code == 0);
  REQUIRE(testutil::max_abs_diff(read_matrix(dir.file("out.json")),
                                 pair_truth()) <= 1e-12);
}

TEST_CASE("scf on factorizable data is insignificant and zeroes the "
          "heatmap",
          "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("pair.json"), QubitLayout({0, 1}), 100, kPairRows);
  auto res = run_cli({"scf", dir.file("pair.json"), "--per-state",
                      "--heatmap", dir.file("heat.csv"), "-o",
                      dir.file("report.json")});
  REQUIRE(res.code == 0);

  auto report = json::parse(res.out);
  REQUIRE(report.at("mode") == "pairs");
  REQUIRE(report.at("shots").get<std::uint64_t>() == 100);
  const auto &pair = report.at("pairs").at(0);
  REQUIRE(pair.at("qubits") == json::array({0, 1}));
  REQUIRE(pair.at("scf").get<double>() <= 1e-14);
  REQUIRE_FALSE(pair.at("significant").get<bool>());
  for (const auto &[state, v] : pair.at("per_state").items())
    REQUIRE(v.get<double>() <= 1e-14);
  REQUIRE(report == io::read_json_file(dir.file("report.json")));

  auto heat = io::parse_csv(testutil::slurp(dir.file("heat.csv")));
  REQUIRE(heat.header == std::vector<std::string>{"0", "1"});
  for (const auto &row : heat.rows)
    for (const auto &cell : row)
      REQUIRE(cell == "0.0");
}

TEST_CASE("scf cluster mode splits one joint file", "[cli]") {
  testutil::TempDir dir;
  write_counts(dir.file("pair.json"), QubitLayout({0, 1}), 100, kPairRows);
  auto res = run_cli({"scf", dir.file("pair.json"), "--clusters", "--split",
                      "1/0"});
  REQUIRE(res.code == 0);
  auto report = json::parse(res.out);
  REQUIRE(report.at("mode") == "clusters");
  const auto &entry = report.at("clusters").at(0);
  REQUIRE(entry.at("qubits_a") == json::array({1}));
  REQUIRE(entry.at("qubits_b") == json::array({0}));
  REQUIRE(entry.at("scf").get<double>() <= 1e-14);

  auto bad = run_cli({"scf", dir.file("pair.json"), "--clusters", "--split",
                      "0,1"});
  REQUIRE(bad.code == 2);
  REQUIRE_THAT(bad.err, ContainsSubstring("--split"));
}

TEST_CASE("mitigate round-trips through an identity kernel", "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0, 1});
  io::write_json_file(
      dir.file("dist.json"),
      io::distribution_to_json({Distribution(q, {0.4, 0.3, 0.2, 0.1}),
                                false}));
  write_matrix(dir.file("id.json"), FidelityMatrix::identity(q));
  auto res = run_cli({"mitigate", dir.file("dist.json"), dir.file("id.json"),
                      "-o", dir.file("out.json")});
  REQUIRE(res.code == 0);
  auto out = io::distribution_from_json(io::read_json_file(dir.file(
      "out.json")));
  REQUIRE(out.dist.probs() == std::vector<double>{0.4, 0.3, 0.2, 0.1});
  auto stats = json::parse(res.out);
  REQUIRE(stats.at("condition_number").get<double>() ==
          Catch::Approx(1.0).margin(1e-9));
  REQUIRE_FALSE(stats.at("projected").get<bool>());
}

TEST_CASE("mitigate accepts a kernel stored in another qubit order",
          "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0, 1});
  io::write_json_file(
      dir.file("dist.json"),
      io::distribution_to_json({Distribution(q, {0.4, 0.3, 0.2, 0.1}),
                                false}));
  write_matrix(dir.file("swapped.json"),
               FidelityMatrix::identity(QubitLayout({1, 0})));
  auto res = run_cli({"mitigate", dir.file("dist.json"),
                      dir.file("swapped.json"), "-o", dir.file("out.json")});
  REQUIRE(res.code == 0);

  write_matrix(dir.file("alien.json"),
               FidelityMatrix::identity(QubitLayout({5})));
  auto alien = run_cli({"mitigate", dir.file("dist.json"),
                        dir.file("alien.json"), "-o", dir.file("o2.json")});
  REQUIRE(alien.code == 2);
}

TEST_CASE("mitigating with a singular kernel exits with the numerical "
          "code",
          "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0});
  io::write_json_file(
      dir.file("dist.json"),
      io::distribution_to_json({Distribution(q, {0.5, 0.5}), false}));
  write_matrix(dir.file("flat.json"), FidelityMatrix::uniform(q));
  auto res = run_cli({"mitigate", dir.file("dist.json"),
                      dir.file("flat.json"), "-o", dir.file("out.json")});
  REQUIRE(res.code == 3);
  REQUIRE_THAT(res.err, ContainsSubstring("singular"));
}

TEST_CASE("simulate writes deterministic full-experiment counts", "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0, 1});
  auto K0 = FidelityMatrix::checked(QubitLayout({0}), {0.9, 0.1, 0.1, 0.9});
  auto K1 = FidelityMatrix::checked(QubitLayout({1}), {0.85, 0.15, 0.1,
                                                       0.9});
  sim::NoiseModel model(q, {{SubsystemSelection(q, {0}), K0, std::nullopt},
                            {SubsystemSelection(q, {1}), K1, std::nullopt}});
  io::write_json_file(dir.file("model.json"), io::model_to_json(model));

  auto run = [&](const std::string &sub, const std::string &seed) {
    return run_cli({"simulate", dir.file("model.json"), "--experiment",
                    "full", "--shots", "512", "--seed", seed, "--out-dir",
                    dir.file(sub)});
  };
  REQUIRE(run("a", "11").code == 0);
  REQUIRE(run("b", "11").code == 0);
  REQUIRE(run("c", "12").code == 0);
  auto a = testutil::slurp(dir.file("a") + "/counts_full.json");
  REQUIRE(a == testutil::slurp(dir.file("b") + "/counts_full.json"));
  REQUIRE(a != testutil::slurp(dir.file("c") + "/counts_full.json"));

  auto f = io::counts_from_json(io::read_json_file(dir.file("a") +
                                                   "/counts_full.json"));
  REQUIRE(f.records.size() == 4);
  REQUIRE(f.shots == 512);
  REQUIRE_NOTHROW(build_mfm(f.records, f.layout));
}

TEST_CASE("the seed falls back to the environment variable", "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0});
  sim::NoiseModel model(
      q, {{SubsystemSelection(q, {0}),
           FidelityMatrix::checked(q, {0.9, 0.1, 0.2, 0.8}), std::nullopt}});
  io::write_json_file(dir.file("model.json"), io::model_to_json(model));

  ::setenv("MFMKIT_SEED", "4242", 1);
  auto env_run = run_cli({"simulate", dir.file("model.json"), "--shots",
                          "256", "--out-dir", dir.file("env")});
  ::unsetenv("MFMKIT_SEED");
  REQUIRE(env_run.code == 0);
  auto flag_run = run_cli({"simulate", dir.file("model.json"), "--shots",
                           "256", "--seed", "4242", "--out-dir",
                           dir.file("flag")});
  REQUIRE(flag_run.code == 0);
  REQUIRE(testutil::slurp(dir.file("env") + "/counts_full.json") ==
          testutil::slurp(dir.file("flag") + "/counts_full.json"));
}

TEST_CASE("simulate emits one spectator file per pair", "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0, 1, 2});
  std::vector<sim::ClusterNoise> clusters;
  for (int p = 0; p < 3; ++p)
    clusters.push_back(
        {SubsystemSelection(q, {p}),
         FidelityMatrix::checked(QubitLayout({p}), {0.95, 0.05, 0.05, 0.95}),
         std::nullopt});
  sim::NoiseModel model(q, std::move(clusters));
  io::write_json_file(dir.file("model.json"), io::model_to_json(model));

  auto res = run_cli({"simulate", dir.file("model.json"), "--experiment",
                      "pairs-with-spectators", "--shots", "128", "--seed",
                      "9", "--out-dir", dir.file("out")});
  REQUIRE(res.code == 0);
  auto files = json::parse(res.out).at("files");
  REQUIRE(files.size() == 3);

  auto f = io::counts_from_json(
      io::read_json_file(dir.file("out") + "/counts_pair_0_2.json"));
  REQUIRE(f.layout == q);
  REQUIRE(f.spectator_positions.has_value());
  REQUIRE(*f.spectator_positions == std::vector<int>{1});
  REQUIRE(f.records.size() == 4);
}

TEST_CASE("simulate splits cluster experiments by cluster", "[cli]") {
  testutil::TempDir dir;
  QubitLayout q({0, 1, 2});
  auto pairK = FidelityMatrix::checked(
      QubitLayout({0, 1}),
      {0.9, 0.04, 0.04, 0.02, 0.03, 0.9, 0.02, 0.05, 0.05, 0.02, 0.9, 0.03,
       0.02, 0.04, 0.04, 0.9});
  auto single = FidelityMatrix::checked(QubitLayout({2}),
                                        {0.95, 0.05, 0.03, 0.97});
  sim::NoiseModel model(q, {{SubsystemSelection(q, {0, 1}), pairK,
                             std::nullopt},
                            {SubsystemSelection(q, {2}), single,
                             std::nullopt}});
  io::write_json_file(dir.file("model.json"), io::model_to_json(model));

  auto res = run_cli({"simulate", dir.file("model.json"), "--experiment",
                      "clusters", "--shots", "64", "--seed", "3",
                      "--out-dir", dir.file("out")});
  REQUIRE(res.code == 0);
  auto pair_file = io::counts_from_json(
      io::read_json_file(dir.file("out") + "/counts_cluster_0_1.json"));
  REQUIRE(pair_file.layout == QubitLayout({0, 1}));
  REQUIRE(pair_file.records.size() == 4);
  auto single_file = io::counts_from_json(
      io::read_json_file(dir.file("out") + "/counts_cluster_2.json"));
  REQUIRE(single_file.records.size() == 2);
}

TEST_CASE("cost answers point queries and emits curves", "[cli]") {
  REQUIRE(run_cli({"cost", "-n", "5", "--strategy", "full"}).out == "32\n");
  REQUIRE(run_cli({"cost", "-n", "5", "--strategy", "pairs"}).out == "40\n");
  REQUIRE(run_cli({"cost", "-n", "5", "--strategy", "split", "--k", "2"})
              .out == "12\n");

  auto curve = run_cli({"cost", "--curve", "3"});
  REQUIRE(curve.code == 0);
  auto table = io::parse_csv(curve.out);
  REQUIRE(table.rows.size() == 3);
  REQUIRE(table.rows[2][1] == "8");

  testutil::TempDir dir;
  auto filed = run_cli({"cost", "--curve", "3", "-o", dir.file("c.csv")});
  REQUIRE(filed.code == 0);
  REQUIRE(testutil::slurp(dir.file("c.csv")) == curve.out);

  REQUIRE(run_cli({"cost"}).code == 2);
  REQUIRE(run_cli({"cost", "-n", "5", "--strategy", "warp"}).code == 2);
}
