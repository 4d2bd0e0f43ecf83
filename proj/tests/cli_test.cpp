//
// Copyright 2026 The mialab Authors
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
//
// End-to-end checks of the command-line tool. The binary path arrives via
// the MIALAB_CLI environment variable (set by CMake).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace {

std::string cli_path() {
  const char* path = std::getenv("MIALAB_CLI");
  if (path == nullptr) {
    ADD_FAILURE() << "MIALAB_CLI is not set";
    return {};
  }
  return path;
}

std::string temp_dir() {
  static const std::string dir = [] {
    std::string d = ::testing::TempDir();
    if (!d.empty() && d.back() != '/') d += '/';
    return d + "mialab_cli";
  }();
  static const bool made = [&] {
    return std::system(("mkdir -p " + dir).c_str()) == 0;
  }();
  (void)made;
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  std::stringstream ss;
  ss << file.rdbuf();
  return ss.str();
}

int count_lines_with(const std::string& text, const std::string& needle) {
  int count = 0;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find(needle) != std::string::npos) ++count;
  }
  return count;
}

TEST(CliParams, EmitsGammaTable) {
  const std::string out = temp_dir() + "/params.csv";
  ASSERT_EQ(run("params --k 10 --delta 0.2 --eps-a 0.5 --eps-e 0.25 --out " + out), 0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("# command = params"), std::string::npos);
  EXPECT_NE(text.find("distribution,component,gamma,mean,variance"), std::string::npos);
  EXPECT_NE(text.find("out,0,2,"), std::string::npos);
  EXPECT_NE(text.find("in,0,2.3999999999999999,"), std::string::npos);
  EXPECT_EQ(count_lines_with(text, "out,"), 10);
}

TEST(CliParams, InvalidProfileNamesTheInequality) {
  const std::string err = temp_dir() + "/params_err.txt";
  const std::string cmd = cli_path() +
                          " params --k 10 --delta 0.2 --eps-a 0.1 --eps-e 0.25 2> " + err +
                          " >/dev/null";
  const int status = WEXITSTATUS(std::system(cmd.c_str()));
  EXPECT_EQ(status, 2);
  const std::string text = slurp(err);
  EXPECT_NE(text.find("Δ/(1+Δ)"), std::string::npos);
}

TEST(CliBounds, OrderedModes) {
  const std::string out = temp_dir() + "/bounds.csv";
  ASSERT_EQ(run("bounds --modes cv,tlc,ds --q 0.2 --temperature 1e6 --out " + out), 0);
  const std::string text = slurp(out);
  // CV first, then TLC, then DS; DS at huge temperature is tiny.
  std::stringstream ss(text);
  std::string line;
  std::vector<double> exact;
  while (std::getline(ss, line)) {
    if (line.rfind("CV,", 0) == 0 || line.rfind("TLC,", 0) == 0 || line.rfind("DS,", 0) == 0) {
      const auto first = line.find(',');
      const auto second = line.find(',', first + 1);
      exact.push_back(std::stod(line.substr(first + 1, second - first - 1)));
    }
  }
  ASSERT_EQ(exact.size(), 3u);
  EXPECT_GE(exact[0], exact[1]);
  EXPECT_GE(exact[1], exact[2]);
  EXPECT_LE(exact[2], 1e-3 * exact[0]);
}

TEST(CliBounds, ZeroDeltaGivesZeroRows) {
  const std::string out = temp_dir() + "/bounds0.csv";
  ASSERT_EQ(run("bounds --delta 0 --modes cv,tlc --out " + out), 0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("CV,0,0,"), std::string::npos);
  EXPECT_NE(text.find("TLC,0,0,"), std::string::npos);
}

TEST(CliBounds, BetaLbCurveLiesBelowDiagonal) {
  const std::string out = temp_dir() + "/beta_lb.csv";
  ASSERT_EQ(run("bounds --beta-lb --modes cv --alpha-points 99 --out " + out), 0);
  const std::string text = slurp(out);
  std::stringstream ss(text);
  std::string line;
  int rows = 0;
  while (std::getline(ss, line)) {
    if (line.rfind("CV,", 0) != 0) continue;
    ++rows;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    const double alpha = std::stod(line.substr(first + 1, second - first - 1));
    const double beta = std::stod(line.substr(second + 1));
    ASSERT_LE(beta, alpha + 1e-12);
  }
  EXPECT_EQ(rows, 99);
}

TEST(CliSimulate, DeterministicAcrossRunsAndThreads) {
  const std::string a = temp_dir() + "/sim_a.csv";
  const std::string b = temp_dir() + "/sim_b.csv";
  const std::string c = temp_dir() + "/sim_c.csv";
  const std::string args =
      "simulate --modes cv,ds --q 0.2 --samples 100000 --seed 42 --alpha-points 999";
  ASSERT_EQ(run(args + " --threads 1 --out " + a), 0);
  ASSERT_EQ(run(args + " --threads 1 --out " + b), 0);
  ASSERT_EQ(run(args + " --threads 8 --out " + c), 0);
  const std::string ta = slurp(a);
  ASSERT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b));
  EXPECT_EQ(ta, slurp(c));
}

TEST(CliSimulate, JsonMirrorsCsvColumns) {
  const std::string out = temp_dir() + "/sim.json";
  ASSERT_EQ(run("simulate --modes cv --samples 100000 --seed 7 --format json --out " + out),
            0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("\"config\""), std::string::npos);
  EXPECT_NE(text.find("\"columns\": [\"mode\", \"alpha\", \"beta\", \"avg_advantage\", "
                      "\"adv_at_0.999\", \"clamped_components\"]"),
            std::string::npos);
}

TEST(CliDeltaFactor, LimitsMatchTheory) {
  const std::string out = temp_dir() + "/delta.csv";
  ASSERT_EQ(run("delta-factor --k 2 --q-values 0,0.5,1 --temperatures 0.0001,1e6 --out " + out),
            0);
  const std::string text = slurp(out);
  std::stringstream ss(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 6u);
  // T = 1e-4: q = 0 -> ~0, q = 0.5 -> ~1, q = 1 -> ~0.
  EXPECT_LE(rows[0][2], 1e-3);
  EXPECT_GE(rows[1][2], 0.999);
  EXPECT_LE(rows[2][2], 1e-3);
  // T = 1e6: everything ~0; at interior q the larger temperature is
  // dominated by the smaller one. (At q in {0,1} both temperatures saturate
  // the channel and the tiny residuals are not ordered.)
  for (int i = 3; i < 6; ++i) {
    EXPECT_LE(rows[i][2], 1e-3);
  }
  EXPECT_LE(rows[4][2], rows[1][2] + 1e-6);
}

TEST(CliSetsize, DeterministicLimitsAndMonotone) {
  const std::string out = temp_dir() + "/setsize.csv";
  ASSERT_EQ(run("setsize --q-values 0,0.3,0.6,1 --temperatures 0 --samples 20000 --out " + out),
            0);
  const std::string text = slurp(out);
  std::stringstream ss(text);
  std::string line;
  std::vector<double> sizes;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    sizes.push_back(std::stod(cells[2]));
  }
  ASSERT_EQ(sizes.size(), 4u);
  EXPECT_DOUBLE_EQ(sizes[0], 10.0);  // q = 0 includes everything
  EXPECT_DOUBLE_EQ(sizes[3], 0.0);   // q = 1 empties the set
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    EXPECT_LE(sizes[i], sizes[i - 1] + 1e-12);
  }
}

TEST(CliGenAndFit, RoundTripRecoversParameters) {
  const std::string data = temp_dir() + "/gen.csv";
  const std::string fit = temp_dir() + "/fit.csv";
  ASSERT_EQ(run("gen --hypothesis out --n 100000 --seed 11 --out " + data), 0);
  // Small-shape Dirichlet components carry real mass below the default
  // clamp of 1e-6; a tighter clamp keeps the synthetic round trip faithful.
  ASSERT_EQ(run("fit --input " + data + " --model dirichlet --clamp 1e-12 --out " + fit), 0);
  const std::string text = slurp(fit);
  std::stringstream ss(text);
  std::string line;
  std::vector<double> gamma;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'c') continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    gamma.push_back(std::stod(cells[1]));
    EXPECT_EQ(cells[4], "true");  // converged
  }
  ASSERT_EQ(gamma.size(), 10u);
  EXPECT_NEAR(gamma[0], 2.0, 0.05 * 2.0);
  for (int i = 1; i < 10; ++i) EXPECT_NEAR(gamma[i], 0.5 / 2.25, 0.05 * 0.5 / 2.25);
}

TEST(CliGenAndFit, PairModeEmitsProfileEstimates) {
  const std::string data_out = temp_dir() + "/gen_out.csv";
  const std::string data_in = temp_dir() + "/gen_in.csv";
  const std::string fit = temp_dir() + "/fit_pair.csv";
  ASSERT_EQ(run("gen --hypothesis out --n 100000 --seed 21 --out " + data_out), 0);
  ASSERT_EQ(run("gen --hypothesis in --n 100000 --seed 22 --out " + data_in), 0);
  ASSERT_EQ(run("fit --input-out " + data_out + " --input-in " + data_in +
                " --p-star 0.5 --clamp 1e-12 --out " + fit),
            0);
  const std::string text = slurp(fit);
  std::stringstream ss(text);
  std::string line;
  double delta_hat = -1, eps_e_hat = -1;
  while (std::getline(ss, line)) {
    if (line.rfind("delta_hat,", 0) == 0) delta_hat = std::stod(line.substr(10));
    if (line.rfind("eps_e_hat,", 0) == 0) eps_e_hat = std::stod(line.substr(10));
  }
  EXPECT_NEAR(delta_hat, 0.2, 0.02);
  EXPECT_NEAR(eps_e_hat, 0.25, 0.025);
}

TEST(CliGen, SameSeedGivesIdenticalFiles) {
  const std::string a = temp_dir() + "/gen_a.csv";
  const std::string b = temp_dir() + "/gen_b.csv";
  ASSERT_EQ(run("gen --hypothesis in --n 500 --seed 9 --out " + a), 0);
  ASSERT_EQ(run("gen --hypothesis in --n 500 --seed 9 --out " + b), 0);
  const std::string ta = slurp(a);
  ASSERT_FALSE(ta.empty());
  EXPECT_EQ(ta, slurp(b));
}

TEST(CliFit, MalformedFileExitsWithInputError) {
  const std::string bad = temp_dir() + "/bad.csv";
  {
    std::ofstream f(bad);
    f << "p0,p1\n0.5,0.6\n";  // row sums to 1.1
  }
  EXPECT_EQ(run("fit --input " + bad + " --no-renormalize"), 2);
}

TEST(CliSweep, EmitsLongFormatRows) {
  const std::string out = temp_dir() + "/sweep.csv";
  ASSERT_EQ(run("sweep --param delta --values 0.1,0.2 --modes cv,tlc "
                "--samples 100000 --seed 5 --out " + out),
            0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("parameter,value,mode,bound_exact,bound_approx,sim_avg_adv,"
                      "sim_adv_at_0.999"),
            std::string::npos);
  EXPECT_EQ(count_lines_with(text, "delta,"), 4);  // 2 values x 2 modes
}

TEST(CliSweep, InvalidPointsReportedAndSkipped) {
  const std::string out = temp_dir() + "/sweep_skip.csv";
  // eps-a = 0.05 violates delta/(1+delta) < eps_a at delta = 0.2.
  ASSERT_EQ(run("sweep --param eps-a --values 0.05,0.5 --modes cv "
                "--samples 100000 --out " + out),
            0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("# skipped_"), std::string::npos);
  EXPECT_EQ(count_lines_with(text, "eps-a,"), 1);
}

TEST(CliConfigFile, FlagsOverrideFileValues) {
  const std::string cfg = temp_dir() + "/run.cfg";
  {
    std::ofstream f(cfg);
    f << "[params]\nk=10\ndelta=0.3\neps-a=0.5\neps-e=0.25\n";
  }
  const std::string a = temp_dir() + "/cfg_a.csv";
  const std::string b = temp_dir() + "/cfg_b.csv";
  ASSERT_EQ(run("--config " + cfg + " params --out " + a), 0);
  ASSERT_EQ(run("--config " + cfg + " params --delta 0.2 --out " + b), 0);
  EXPECT_NE(slurp(a).find("delta = 0.29999999999999999"), std::string::npos);
  EXPECT_NE(slurp(b).find("delta = 0.20000000000000001"), std::string::npos);
}

TEST(CliExitCodes, UnknownFlagIsInputError) {
  EXPECT_EQ(run("params --no-such-flag"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
}

}  // namespace
