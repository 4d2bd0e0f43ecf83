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
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mialab/error.hpp"
#include "mialab/numerics.hpp"
#include "mialab/rng.hpp"
#include "mialab/tradeoff.hpp"
#include "mialab/uncertainty.hpp"

namespace mialab {

// Empirical confidence vectors, stored row-major. `label` tags which
// hypothesis produced the rows; `source` is free-form provenance.
class ConfidenceDataset {
 public:
  ConfidenceDataset(int k, Hypothesis label, std::string source)
      : k_(k), label_(label), source_(std::move(source)) {
    if (k < 2) throw ValidationError("dataset: class count must be >= 2");
  }

  int k() const { return k_; }
  Hypothesis label() const { return label_; }
  void set_label(Hypothesis h) { label_ = h; }
  const std::string& source() const { return source_; }
  std::size_t rows() const { return data_.size() / static_cast<std::size_t>(k_); }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }

  void append_row(std::span<const double> row) {
    if (row.size() != static_cast<std::size_t>(k_)) {
      throw ValidationError("dataset: row length mismatch");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }

 private:
  int k_;
  Hypothesis label_;
  std::string source_;
  std::vector<double> data_;
};

// Maximum-likelihood fit output. `converged` means the stationarity residual
// dropped below the requested tolerance; `degenerate_data` flags a component
// that is constant across rows (the likelihood has no interior maximum).
struct FitResult {
  std::vector<double> gamma_hat;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double tolerance_achieved = 0.0;
  bool degenerate_data = false;
  std::vector<double> ll_trace;
};

namespace detail {

inline std::string trim_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  return line;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

// Reads the confidence CSV format: a header line `p0,p1,...,p{K-1}` followed
// by one comma-separated row of K decimal floats per line. Leading lines
// starting with '#' are skipped (files written by the CLI carry their run
// configuration there). With `renormalize` set, components below `clamp` are
// raised to the clamp and every row is rescaled to sum one; without it, rows
// must already sum to one within 1e-3 and are stored as-is. Errors name the
// offending physical line.
inline ConfidenceDataset ingest_csv(std::istream& stream, const std::string& source,
                                    double clamp = 1e-6, bool renormalize = true) {
  if (!(clamp > 0.0) || !(clamp < 0.1)) {
    throw ValidationError("ingest_csv: clamp must lie in (0, 0.1)");
  }
  std::string line;
  std::size_t line_no = 0;
  // Header (after optional comment lines).
  std::vector<std::string> header;
  for (;;) {
    if (!std::getline(stream, line)) {
      throw ValidationError(source + ": missing header line");
    }
    ++line_no;
    line = detail::trim_cr(line);
    if (!line.empty() && line[0] == '#') continue;
    header = detail::split_csv_line(line);
    break;
  }
  const int k = static_cast<int>(header.size());
  if (k < 2) {
    throw ValidationError(source + ": line " + std::to_string(line_no) +
                          ": malformed header, need at least two columns");
  }
  for (int i = 0; i < k; ++i) {
    if (header[i] != "p" + std::to_string(i)) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": malformed header, expected column p" + std::to_string(i));
    }
  }

  ConfidenceDataset dataset(k, Hypothesis::kOut, source);
  std::vector<double> row(k);
  while (std::getline(stream, line)) {
    ++line_no;
    line = detail::trim_cr(line);
    if (line.empty()) {
      // A blank trailing line is permitted; blank interior lines are not.
      if (stream.peek() == std::char_traits<char>::eof()) break;
      throw ValidationError(source + ": line " + std::to_string(line_no) + ": blank row");
    }
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != k) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": expected " + std::to_string(k) + " fields, got " +
                            std::to_string(fields.size()));
    }
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      std::size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(fields[i], &consumed);
      } catch (const std::exception&) {
        throw ValidationError(source + ": line " + std::to_string(line_no) +
                              ": field " + std::to_string(i) + " is not a number");
      }
      if (consumed != fields[i].size() || !std::isfinite(value)) {
        throw ValidationError(source + ": line " + std::to_string(line_no) +
                              ": field " + std::to_string(i) + " is not a number");
      }
      if (value < 0.0 || value > 1.0) {
        throw ValidationError(source + ": line " + std::to_string(line_no) +
                              ": component outside [0,1]");
      }
      row[i] = value;
      sum += value;
    }
    if (renormalize) {
      double clamped_sum = 0.0;
      for (double& x : row) {
        if (x < clamp) x = clamp;
        clamped_sum += x;
      }
      for (double& x : row) x /= clamped_sum;
    } else if (std::abs(sum - 1.0) > 1e-3) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": row sums to " + std::to_string(sum) +
                            ", off by more than 1e-3");
    }
    dataset.append_row(row);
  }
  return dataset;
}

inline ConfidenceDataset ingest_csv(const std::string& path, double clamp = 1e-6,
                                    bool renormalize = true) {
  std::ifstream file(path);
  if (!file) {
    throw ValidationError("ingest_csv: cannot open " + path);
  }
  return ingest_csv(file, path, clamp, renormalize);
}

// Writes the confidence CSV format; `comments` go first as '#' lines.
inline void write_confidence_csv(const ConfidenceDataset& dataset, std::ostream& out,
                                 std::span<const std::string> comments = {}) {
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (int i = 0; i < dataset.k(); ++i) {
    out << (i == 0 ? "p" : ",p") << i;
  }
  out << "\n";
  char buf[40];
  for (std::size_t r = 0; r < dataset.rows(); ++r) {
    const auto row = dataset.row(r);
    for (int i = 0; i < dataset.k(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i == 0 ? "" : ",") << buf;
    }
    out << "\n";
  }
}

// Draws n rows from the chosen side of the pair.
inline ConfidenceDataset generate_dataset(const DirichletPair& pair, Hypothesis hypothesis,
                                          std::uint64_t n, RngStream rng) {
  validate_pair(pair);
  if (n < 1) throw ValidationError("generate_dataset: need n >= 1");
  const std::vector<double>& gamma =
      (hypothesis == Hypothesis::kOut) ? pair.gamma_out : pair.gamma_in;
  ConfidenceDataset dataset(pair.k(), hypothesis, "synthetic");
  std::vector<double> row(pair.k());
  for (std::uint64_t i = 0; i < n; ++i) {
    sample_dirichlet(gamma, rng, row);
    dataset.append_row(row);
  }
  return dataset;
}

// Dirichlet maximum-likelihood fit by the digamma fixed point
//   gamma_k <- psi_inv( psi(sum gamma) + mean ln p_k ),
// initialized by moment matching on the first component. The stationarity
// residual max_k |psi(gamma_k) - psi(sum) - mean ln p_k| is the convergence
// criterion, and the log-likelihood ascends monotonically along the
// iteration (recorded in ll_trace).
inline FitResult fit_dirichlet(const ConfidenceDataset& data, double tol = 1e-10,
                               int max_iter = 1000) {
  if (!(tol > 0.0)) throw ValidationError("fit_dirichlet: tolerance must be positive");
  const int k = data.k();
  const std::size_t n = data.rows();
  if (n < static_cast<std::size_t>(k) + 1) {
    throw ValidationError("fit_dirichlet: need at least K+1 rows");
  }

  FitResult result;
  // Column statistics; observations at or below the log floor are clamped.
  std::vector<double> mean_log(k, 0.0);
  std::vector<double> mean(k, 0.0);
  std::vector<double> col_min(k, 1.0);
  std::vector<double> col_max(k, 0.0);
  double sum0_sq = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = data.row(r);
    for (int i = 0; i < k; ++i) {
      const double x = std::max(row[i], kLogFloor);
      mean_log[i] += std::log(x);
      mean[i] += row[i];
      col_min[i] = std::min(col_min[i], row[i]);
      col_max[i] = std::max(col_max[i], row[i]);
    }
    sum0_sq += row[0] * row[0];
  }
  for (int i = 0; i < k; ++i) {
    mean_log[i] /= static_cast<double>(n);
    mean[i] /= static_cast<double>(n);
    if (col_max[i] - col_min[i] < 1e-12) result.degenerate_data = true;
  }

  // Moment-matching start: total mass from the first component's variance.
  const double var0 = sum0_sq / static_cast<double>(n) - mean[0] * mean[0];
  double total = 0.0;
  if (var0 > 0.0 && mean[0] > 0.0 && mean[0] < 1.0) {
    total = mean[0] * (1.0 - mean[0]) / var0 - 1.0;
  }
  if (!(total > 0.0) || !std::isfinite(total)) total = static_cast<double>(k);
  std::vector<double> gamma(k);
  for (int i = 0; i < k; ++i) {
    gamma[i] = std::clamp(mean[i] * total, 1e-8, 1e12);
  }

  std::vector<double> col_log_sum(k);
  for (int i = 0; i < k; ++i) col_log_sum[i] = mean_log[i] * static_cast<double>(n);
  auto log_likelihood = [&](const std::vector<double>& g) {
    double acc = -static_cast<double>(n) * log_multivariate_beta(g);
    for (int i = 0; i < k; ++i) acc += (g[i] - 1.0) * col_log_sum[i];
    return acc;
  };
  auto residual = [&](const std::vector<double>& g) {
    double s = 0.0;
    for (double x : g) s += x;
    const double psi_s = digamma(s);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      worst = std::max(worst, std::abs(digamma(g[i]) - psi_s - mean_log[i]));
    }
    return worst;
  };

  result.ll_trace.push_back(log_likelihood(gamma));
  double res = residual(gamma);
  int iter = 0;
  while (res > tol && iter < max_iter) {
    double s = 0.0;
    for (double x : gamma) s += x;
    const double psi_s = digamma(s);
    for (int i = 0; i < k; ++i) {
      gamma[i] = std::clamp(digamma_inverse(psi_s + mean_log[i]), 1e-12, 1e12);
    }
    ++iter;
    res = residual(gamma);
    result.ll_trace.push_back(log_likelihood(gamma));
  }

  result.gamma_hat = std::move(gamma);
  result.iterations = iter;
  result.tolerance_achieved = res;
  result.converged = res <= tol && !result.degenerate_data;
  result.log_likelihood = result.ll_trace.back();
  return result;
}

// Two-parameter Beta fit of the true-label confidence: rows collapse to
// (p0, 1-p0) and the Dirichlet machinery runs with K = 2.
inline FitResult fit_beta_tlc(const ConfidenceDataset& data, double tol = 1e-10,
                              int max_iter = 1000) {
  ConfidenceDataset reduced(2, data.label(), data.source());
  std::vector<double> row(2);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const double p0 = data.row(r)[0];
    row[0] = p0;
    row[1] = 1.0 - p0;
    reduced.append_row(row);
  }
  return fit_dirichlet(reduced, tol, max_iter);
}

}  // namespace mialab
