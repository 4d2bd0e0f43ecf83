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
// Command-line front end: profiles in, CSV/JSON tables out. Subcommands:
// params | bounds | simulate | delta-factor | setsize | fit | gen | sweep.
// Every emitted file embeds the run configuration (as '#' comments in CSV,
// as a sibling "config" object in JSON), so outputs are re-derivable from
// themselves. Outputs are byte-identical for a fixed (config, seed) across
// runs and thread counts; the thread count is an execution detail and is
// deliberately not part of the embedded configuration.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mialab/bounds.hpp"
#include "mialab/error.hpp"
#include "mialab/fitting.hpp"
#include "mialab/lira.hpp"
#include "mialab/parallel.hpp"
#include "mialab/rng.hpp"
#include "mialab/tradeoff.hpp"
#include "mialab/uncertainty.hpp"

namespace {

using mialab::AdvantageBounds;
using mialab::ComputationError;
using mialab::ConfidenceDataset;
using mialab::DirichletPair;
using mialab::Disclosure;
using mialab::DisclosureMode;
using mialab::DivergencePair;
using mialab::FitResult;
using mialab::Hypothesis;
using mialab::TradeoffCurve;
using mialab::UncertaintyProfile;
using mialab::ValidationError;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_u64(std::uint64_t x) { return std::to_string(x); }

// One output table plus the configuration block embedded in every file.
struct ConfigEntry {
  std::string key;
  std::string value;
  bool quoted = false;  // JSON: emit as string rather than raw token
};

struct Table {
  std::vector<std::string> columns;
  std::vector<bool> quoted;  // per column
  std::vector<std::vector<std::string>> rows;

  void add_columns(std::initializer_list<std::pair<const char*, bool>> defs) {
    for (const auto& [name, q] : defs) {
      columns.emplace_back(name);
      quoted.push_back(q);
    }
  }
};

struct Output {
  std::vector<ConfigEntry> config;
  Table table;

  void config_str(const std::string& key, const std::string& value) {
    config.push_back({key, value, true});
  }
  void config_num(const std::string& key, double value) {
    config.push_back({key, fmt17(value), false});
  }
  void config_int(const std::string& key, std::uint64_t value) {
    config.push_back({key, fmt_u64(value), false});
  }
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

void write_csv(std::ostream& os, const Output& out) {
  for (const auto& e : out.config) {
    os << "# " << e.key << " = " << e.value << "\n";
  }
  const Table& t = out.table;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << t.columns[i];
  }
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << row[i];
    }
    os << "\n";
  }
}

void write_json(std::ostream& os, const Output& out) {
  os << "{\n  \"config\": {";
  for (std::size_t i = 0; i < out.config.size(); ++i) {
    const auto& e = out.config[i];
    os << (i ? ", " : "") << "\"" << json_escape(e.key) << "\": ";
    if (e.quoted) {
      os << "\"" << json_escape(e.value) << "\"";
    } else {
      os << e.value;
    }
  }
  os << "},\n  \"columns\": [";
  const Table& t = out.table;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? ", " : "") << "\"" << json_escape(t.columns[i]) << "\"";
  }
  os << "],\n  \"rows\": [\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << "    [";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      os << (i ? ", " : "");
      if (t.rows[r][i].empty()) {
        os << "null";
      } else if (t.quoted[i]) {
        os << "\"" << json_escape(t.rows[r][i]) << "\"";
      } else {
        os << t.rows[r][i];
      }
    }
    os << "]" << (r + 1 < t.rows.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
}

// Writes through a temporary file so failures never leave partial output.
class OutputSink {
 public:
  OutputSink(std::string path, std::string format)
      : path_(std::move(path)), format_(std::move(format)) {}

  void write(const Output& out) const {
    if (path_.empty()) {
      emit(std::cout, out);
      return;
    }
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream file(tmp, std::ios::binary);
      if (!file) throw ComputationError("cannot open output file " + tmp);
      emit(file, out);
      if (!file) {
        file.close();
        std::remove(tmp.c_str());
        throw ComputationError("failed writing " + tmp);
      }
    }
    if (std::rename(tmp.c_str(), path_.c_str()) != 0) {
      std::remove(tmp.c_str());
      throw ComputationError("cannot move output into place at " + path_);
    }
  }

  void write_raw(const std::string& payload) const {
    if (path_.empty()) {
      std::cout << payload;
      return;
    }
    const std::string tmp = path_ + ".tmp";
    {
      std::ofstream file(tmp, std::ios::binary);
      if (!file) throw ComputationError("cannot open output file " + tmp);
      file << payload;
      if (!file) {
        file.close();
        std::remove(tmp.c_str());
        throw ComputationError("failed writing " + tmp);
      }
    }
    if (std::rename(tmp.c_str(), path_.c_str()) != 0) {
      std::remove(tmp.c_str());
      throw ComputationError("cannot move output into place at " + path_);
    }
  }

 private:
  void emit(std::ostream& os, const Output& out) const {
    if (format_ == "json") {
      write_json(os, out);
    } else {
      write_csv(os, out);
    }
  }

  std::string path_;
  std::string format_;
};

// Flags shared by every analysis subcommand.
struct CommonFlags {
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000000;
  int alpha_points = 999;
  std::string out_path;
  std::string format = "csv";
  std::string threads = "1";

  int resolved_threads() const {
    if (threads == "auto") return mialab::resolve_threads(0);
    try {
      const int t = std::stoi(threads);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw ValidationError("--threads must be a positive count or 'auto'");
  }
};

struct ProfileFlags {
  UncertaintyProfile profile{10, 0.2, 0.5, 0.25};  // headline defaults
};

struct DsFlags {
  double q = 0.2;
  double temperature = 0.0;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--seed", flags->seed, "Base RNG seed");
  cmd->add_option("--samples", flags->samples, "Monte Carlo sample count per hypothesis");
  cmd->add_option("--alpha-points", flags->alpha_points,
                  "Number of interior TNR grid points");
  cmd->add_option("--out", flags->out_path, "Output path (default: stdout)");
  cmd->add_option("--format", flags->format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", flags->threads, "Worker threads (count or 'auto')");
}

void add_profile_flags(CLI::App* cmd, ProfileFlags* flags) {
  cmd->add_option("--k", flags->profile.k, "Class count K");
  cmd->add_option("--delta", flags->profile.delta, "Relative calibration error");
  cmd->add_option("--eps-a", flags->profile.eps_a, "Aleatoric uncertainty");
  cmd->add_option("--eps-e", flags->profile.eps_e, "Epistemic uncertainty");
}

void add_ds_flags(CLI::App* cmd, DsFlags* flags) {
  cmd->add_option("--q", flags->q, "DS confidence threshold");
  cmd->add_option("--temperature", flags->temperature,
                  "DS randomization temperature (0 = deterministic)");
}

std::vector<DisclosureMode> parse_modes(const std::string& csv, const DsFlags& ds) {
  std::vector<DisclosureMode> modes;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string lower = item;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "cv") {
      modes.push_back(DisclosureMode::cv());
    } else if (lower == "tlc") {
      modes.push_back(DisclosureMode::tlc());
    } else if (lower == "ds") {
      modes.push_back(DisclosureMode::ds(ds.q, ds.temperature));
    } else {
      throw ValidationError("unknown mode '" + item + "' (expected cv, tlc, ds)");
    }
  }
  if (modes.empty()) throw ValidationError("--modes must name at least one mode");
  return modes;
}

std::vector<double> parse_value_list(const std::string& csv, const char* what) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t consumed = 0;
      values.push_back(std::stod(item, &consumed));
      if (consumed != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw ValidationError(std::string(what) + ": empty list");
  return values;
}

void embed_profile_config(Output& out, const UncertaintyProfile& p) {
  out.config_int("k", static_cast<std::uint64_t>(p.k));
  out.config_num("delta", p.delta);
  out.config_num("eps_a", p.eps_a);
  out.config_num("eps_e", p.eps_e);
}

// Observation-channel divergences used by the trade-off lower bound. The DS
// channel contracts the CV divergences by at most delta^2 (strong data
// processing), which is the analytic route to its bound curve.
DivergencePair mode_divergences(const UncertaintyProfile& profile, const DisclosureMode& mode) {
  const DirichletPair pair = mialab::profile_to_pair(profile);
  if (mode.tag == Disclosure::kCv) {
    return mialab::pair_divergences(pair);
  }
  if (mode.tag == Disclosure::kTlc) {
    DirichletPair two;
    two.gamma_out = {pair.gamma_out[0], pair.sum_out() - pair.gamma_out[0]};
    two.gamma_in = {pair.gamma_in[0], pair.sum_in() - pair.gamma_in[0]};
    return mialab::pair_divergences(two);
  }
  const DivergencePair cv = mialab::pair_divergences(pair);
  const double f = mialab::delta_factor(mode.temperature, mode.q, profile.k);
  return {f * f * cv.d_out_in, f * f * cv.d_in_out};
}

std::string mode_label(const DisclosureMode& mode) { return mialab::to_string(mode.tag); }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_params(const ProfileFlags& pf, const CommonFlags& cf) {
  const DirichletPair pair = mialab::profile_to_pair(pf.profile);
  const mialab::MomentPair means = mialab::pair_means(pair);
  const mialab::MomentPair vars = mialab::pair_variances(pair);

  Output out;
  out.config_str("command", "params");
  embed_profile_config(out, pf.profile);
  out.config_str("format", cf.format);
  out.table.add_columns({{"distribution", true},
                         {"component", false},
                         {"gamma", false},
                         {"mean", false},
                         {"variance", false}});
  for (int i = 0; i < pair.k(); ++i) {
    out.table.rows.push_back({"out", std::to_string(i), fmt17(pair.gamma_out[i]),
                              fmt17(means.out[i]), fmt17(vars.out[i])});
  }
  for (int i = 0; i < pair.k(); ++i) {
    out.table.rows.push_back({"in", std::to_string(i), fmt17(pair.gamma_in[i]),
                              fmt17(means.in[i]), fmt17(vars.in[i])});
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_bounds(const ProfileFlags& pf, const CommonFlags& cf, const DsFlags& ds,
               const std::string& modes_csv, bool beta_lb) {
  const std::vector<DisclosureMode> modes = parse_modes(modes_csv, ds);
  mialab::validate_profile(pf.profile);

  Output out;
  out.config_str("command", beta_lb ? "bounds.beta_lb" : "bounds");
  embed_profile_config(out, pf.profile);
  out.config_str("modes", modes_csv);
  out.config_num("q", ds.q);
  out.config_num("temperature", ds.temperature);
  out.config_str("format", cf.format);

  if (beta_lb) {
    out.config_int("alpha_points", static_cast<std::uint64_t>(cf.alpha_points));
    out.table.add_columns({{"mode", true}, {"alpha", false}, {"beta_lb", false}});
    const std::vector<double> alphas = mialab::interior_alpha_grid(cf.alpha_points);
    for (const DisclosureMode& mode : modes) {
      const TradeoffCurve curve = mialab::beta_lb_curve(mode_divergences(pf.profile, mode), alphas);
      for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
        out.table.rows.push_back(
            {mode_label(mode), fmt17(curve.alpha[i]), fmt17(curve.beta[i])});
      }
    }
  } else {
    out.table.add_columns({{"mode", true},
                           {"bound_exact", false},
                           {"bound_approx", false},
                           {"raw_exact", false},
                           {"raw_approx", false}});
    for (const DisclosureMode& mode : modes) {
      const AdvantageBounds b = mialab::advantage_ub(pf.profile, mode);
      out.table.rows.push_back({mode_label(mode), fmt17(b.exact), fmt17(b.approx),
                                fmt17(b.raw_exact), fmt17(b.raw_approx)});
    }
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_simulate(const ProfileFlags& pf, const CommonFlags& cf, const DsFlags& ds,
                 const std::string& modes_csv) {
  const std::vector<DisclosureMode> modes = parse_modes(modes_csv, ds);
  const DirichletPair pair = mialab::profile_to_pair(pf.profile);
  const std::vector<double> alphas = mialab::interior_alpha_grid(cf.alpha_points);
  const int threads = cf.resolved_threads();

  Output out;
  out.config_str("command", "simulate");
  embed_profile_config(out, pf.profile);
  out.config_str("modes", modes_csv);
  out.config_num("q", ds.q);
  out.config_num("temperature", ds.temperature);
  out.config_int("samples", cf.samples);
  out.config_int("seed", cf.seed);
  out.config_int("alpha_points", static_cast<std::uint64_t>(cf.alpha_points));
  out.config_str("format", cf.format);

  out.table.add_columns({{"mode", true},
                         {"alpha", false},
                         {"beta", false},
                         {"avg_advantage", false},
                         {"adv_at_0.999", false},
                         {"clamped_components", false}});
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const DisclosureMode& mode = modes[m];
    const TradeoffCurve curve = mialab::simulate_tradeoff(
        pair, mode, cf.samples, alphas, mialab::RngStream(cf.seed, m), threads);
    const double avg = mialab::avg_advantage(curve);
    const bool has_high_tnr = 0.999 >= curve.alpha.front() && 0.999 <= curve.alpha.back();
    const std::string adv_high =
        has_high_tnr ? fmt17(mialab::advantage_at(curve, 0.999)) : std::string();
    for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
      out.table.rows.push_back({mode_label(mode), fmt17(curve.alpha[i]),
                                fmt17(curve.beta[i]), fmt17(avg), adv_high,
                                fmt_u64(curve.clamped_components)});
    }
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_delta_factor(const CommonFlags& cf, int k, const std::string& q_values,
                     const std::string& temperatures) {
  const std::vector<double> qs = parse_value_list(q_values, "--q-values");
  const std::vector<double> ts = parse_value_list(temperatures, "--temperatures");

  Output out;
  out.config_str("command", "delta-factor");
  out.config_int("k", static_cast<std::uint64_t>(k));
  out.config_str("q_values", q_values);
  out.config_str("temperatures", temperatures);
  out.config_str("format", cf.format);
  out.table.add_columns({{"temperature", false}, {"q", false}, {"delta", false}});
  for (double t : ts) {
    for (double q : qs) {
      out.table.rows.push_back({fmt17(t), fmt17(q), fmt17(mialab::delta_factor(t, q, k))});
    }
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_setsize(const ProfileFlags& pf, const CommonFlags& cf, const std::string& q_values,
                const std::string& temperatures) {
  const std::vector<double> qs = parse_value_list(q_values, "--q-values");
  const std::vector<double> ts = parse_value_list(temperatures, "--temperatures");
  const DirichletPair pair = mialab::profile_to_pair(pf.profile);

  Output out;
  out.config_str("command", "setsize");
  embed_profile_config(out, pf.profile);
  out.config_str("q_values", q_values);
  out.config_str("temperatures", temperatures);
  out.config_int("samples", cf.samples);
  out.config_int("seed", cf.seed);
  out.config_str("format", cf.format);
  out.table.add_columns({{"temperature", false},
                         {"q", false},
                         {"size_out", false},
                         {"size_in", false},
                         {"size_avg", false}});
  std::uint64_t task = 0;
  for (double t : ts) {
    for (double q : qs) {
      const double so = mialab::expected_set_size(
          pair, q, t, Hypothesis::kOut, cf.samples, mialab::RngStream(cf.seed, task++));
      const double si = mialab::expected_set_size(
          pair, q, t, Hypothesis::kIn, cf.samples, mialab::RngStream(cf.seed, task++));
      out.table.rows.push_back(
          {fmt17(t), fmt17(q), fmt17(so), fmt17(si), fmt17(0.5 * (so + si))});
    }
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_gen(const ProfileFlags& pf, const CommonFlags& cf, const std::string& hypothesis,
            std::uint64_t n) {
  Hypothesis h;
  if (hypothesis == "out") {
    h = Hypothesis::kOut;
  } else if (hypothesis == "in") {
    h = Hypothesis::kIn;
  } else {
    throw ValidationError("--hypothesis must be 'out' or 'in'");
  }
  const DirichletPair pair = mialab::profile_to_pair(pf.profile);
  const ConfidenceDataset data =
      mialab::generate_dataset(pair, h, n, mialab::RngStream(cf.seed, 0));
  std::vector<std::string> comments = {
      "command = gen",
      "k = " + std::to_string(pf.profile.k),
      "delta = " + fmt17(pf.profile.delta),
      "eps_a = " + fmt17(pf.profile.eps_a),
      "eps_e = " + fmt17(pf.profile.eps_e),
      "hypothesis = " + hypothesis,
      "n = " + fmt_u64(n),
      "seed = " + fmt_u64(cf.seed),
  };
  std::ostringstream buffer;
  mialab::write_confidence_csv(data, buffer, comments);
  OutputSink(cf.out_path, "csv").write_raw(buffer.str());
  return 0;
}

int cmd_fit(const CommonFlags& cf, const std::string& input, const std::string& input_out,
            const std::string& input_in, double p_star, const std::string& model,
            double clamp, bool renormalize, double tol, int max_iter) {
  const bool pair_mode = !input_out.empty() || !input_in.empty();
  if (pair_mode && (input_out.empty() || input_in.empty())) {
    throw ValidationError("pair mode needs both --input-out and --input-in");
  }
  if (!pair_mode && input.empty()) {
    throw ValidationError("fit needs --input, or --input-out plus --input-in");
  }
  auto run_fit = [&](const ConfidenceDataset& data) {
    return model == "beta" ? mialab::fit_beta_tlc(data, tol, max_iter)
                           : mialab::fit_dirichlet(data, tol, max_iter);
  };

  Output out;
  out.config_str("command", "fit");
  out.config_str("model", model);
  out.config_num("clamp", clamp);
  out.config_str("renormalize", renormalize ? "true" : "false");
  out.config_num("tol", tol);
  out.config_int("max_iter", static_cast<std::uint64_t>(max_iter));
  out.config_str("format", cf.format);

  if (!pair_mode) {
    out.config_str("input", input);
    const FitResult fit = run_fit(mialab::ingest_csv(input, clamp, renormalize));
    out.table.add_columns({{"component", false},
                           {"gamma_hat", false},
                           {"log_likelihood", false},
                           {"iterations", false},
                           {"converged", true},
                           {"tolerance_achieved", false},
                           {"degenerate_data", true}});
    for (std::size_t i = 0; i < fit.gamma_hat.size(); ++i) {
      out.table.rows.push_back({std::to_string(i), fmt17(fit.gamma_hat[i]),
                                fmt17(fit.log_likelihood), std::to_string(fit.iterations),
                                fit.converged ? "true" : "false",
                                fmt17(fit.tolerance_achieved),
                                fit.degenerate_data ? "true" : "false"});
    }
    OutputSink(cf.out_path, cf.format).write(out);
    return 0;
  }

  if (!(p_star > 0.0 && p_star <= 1.0)) {
    throw ValidationError("pair mode needs --p-star in (0,1]");
  }
  out.config_str("input_out", input_out);
  out.config_str("input_in", input_in);
  out.config_num("p_star", p_star);
  const FitResult fo = run_fit(mialab::ingest_csv(input_out, clamp, renormalize));
  const FitResult fi = run_fit(mialab::ingest_csv(input_in, clamp, renormalize));
  double sum_out = 0.0, sum_in = 0.0;
  for (double g : fo.gamma_hat) sum_out += g;
  for (double g : fi.gamma_hat) sum_in += g;
  // The equal-mass modeling assumption is not imposed during fitting; the
  // in-fit is rescaled onto the out-fit's mass before inversion and the raw
  // mismatch is reported as a model-adequacy diagnostic.
  DirichletPair fitted;
  fitted.gamma_out = fo.gamma_hat;
  fitted.gamma_in = fi.gamma_hat;
  for (double& g : fitted.gamma_in) g *= sum_out / sum_in;
  const UncertaintyProfile est = mialab::infer_profile(fitted, p_star);

  out.table.add_columns({{"name", true}, {"value", false}});
  auto add = [&](const std::string& name, const std::string& value) {
    out.table.rows.push_back({name, value});
  };
  for (std::size_t i = 0; i < fo.gamma_hat.size(); ++i) {
    add("gamma_out_" + std::to_string(i), fmt17(fo.gamma_hat[i]));
  }
  for (std::size_t i = 0; i < fi.gamma_hat.size(); ++i) {
    add("gamma_in_" + std::to_string(i), fmt17(fi.gamma_hat[i]));
  }
  add("sum_out", fmt17(sum_out));
  add("sum_in", fmt17(sum_in));
  add("sum_mismatch_rel", fmt17(std::abs(sum_out - sum_in) / std::max(sum_out, sum_in)));
  add("converged_out", fo.converged ? "1" : "0");
  add("converged_in", fi.converged ? "1" : "0");
  add("delta_hat", fmt17(est.delta));
  add("eps_a_hat", fmt17(est.eps_a));
  add("eps_e_hat", fmt17(est.eps_e));
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

int cmd_sweep(const ProfileFlags& pf, const CommonFlags& cf, const DsFlags& ds,
              const std::string& modes_csv, const std::string& param,
              const std::string& values_csv) {
  const std::vector<double> values = parse_value_list(values_csv, "--values");
  const std::vector<double> alphas = mialab::interior_alpha_grid(cf.alpha_points);
  const int threads = cf.resolved_threads();

  Output out;
  out.config_str("command", "sweep");
  embed_profile_config(out, pf.profile);
  out.config_str("modes", modes_csv);
  out.config_num("q", ds.q);
  out.config_num("temperature", ds.temperature);
  out.config_str("swept_parameter", param);
  out.config_str("values", values_csv);
  out.config_int("samples", cf.samples);
  out.config_int("seed", cf.seed);
  out.config_int("alpha_points", static_cast<std::uint64_t>(cf.alpha_points));
  out.config_str("format", cf.format);
  out.table.add_columns({{"parameter", true},
                         {"value", false},
                         {"mode", true},
                         {"bound_exact", false},
                         {"bound_approx", false},
                         {"sim_avg_adv", false},
                         {"sim_adv_at_0.999", false}});

  std::uint64_t cell = 0;
  for (double value : values) {
    UncertaintyProfile profile = pf.profile;
    DsFlags cell_ds = ds;
    if (param == "delta") {
      profile.delta = value;
    } else if (param == "eps-a") {
      profile.eps_a = value;
    } else if (param == "eps-e") {
      profile.eps_e = value;
    } else if (param == "q") {
      cell_ds.q = value;
    } else if (param == "temperature") {
      cell_ds.temperature = value;
    } else if (param == "k") {
      profile.k = static_cast<int>(value);
      if (static_cast<double>(profile.k) != value) {
        throw ValidationError("--param k requires integer values");
      }
    } else {
      throw ValidationError("--param must be one of delta, eps-a, eps-e, q, temperature, k");
    }

    // A cell is committed whole or skipped whole, never half-emitted.
    std::vector<std::vector<std::string>> cell_rows;
    try {
      mialab::validate_profile(profile);
      const std::vector<DisclosureMode> modes = parse_modes(modes_csv, cell_ds);
      const DirichletPair pair = mialab::profile_to_pair(profile);
      for (const DisclosureMode& mode : modes) {
        mialab::validate_mode(mode);
        const AdvantageBounds b = mialab::advantage_ub(profile, mode);
        const TradeoffCurve curve = mialab::simulate_tradeoff(
            pair, mode, cf.samples, alphas, mialab::RngStream(cf.seed, cell++), threads);
        const double avg = mialab::avg_advantage(curve);
        const bool has_high_tnr =
            0.999 >= curve.alpha.front() && 0.999 <= curve.alpha.back();
        cell_rows.push_back(
            {param, fmt17(value), mode_label(mode), fmt17(b.exact), fmt17(b.approx),
             fmt17(avg),
             has_high_tnr ? fmt17(mialab::advantage_at(curve, 0.999)) : std::string()});
      }
    } catch (const ValidationError& e) {
      // Invalid sweep points are reported and skipped, never silently dropped.
      std::cerr << "sweep: skipping " << param << " = " << fmt17(value) << ": " << e.what()
                << "\n";
      out.config_str("skipped_" + fmt17(value), e.what());
      continue;
    }
    for (auto& row : cell_rows) out.table.rows.push_back(std::move(row));
  }
  OutputSink(cf.out_path, cf.format).write(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-model analysis of likelihood-ratio membership inference"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value file mirroring the flags; flags override");
  app.allow_config_extras(CLI::config_extras_mode::error);

  CommonFlags common;
  ProfileFlags profile;
  DsFlags ds;
  std::string modes_csv = "cv,tlc,ds";

  // params
  CLI::App* params = app.add_subcommand("params", "Dirichlet parameters, means, variances");
  add_profile_flags(params, &profile);
  add_common_flags(params, &common);

  // bounds
  bool beta_lb = false;
  CLI::App* bounds = app.add_subcommand("bounds", "Analytical advantage bounds");
  add_profile_flags(bounds, &profile);
  add_common_flags(bounds, &common);
  add_ds_flags(bounds, &ds);
  bounds->add_option("--modes", modes_csv, "Comma-separated disclosure modes");
  bounds->add_flag("--beta-lb", beta_lb, "Emit the trade-off lower-bound curve instead");

  // simulate
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trade-off curves");
  add_profile_flags(simulate, &profile);
  add_common_flags(simulate, &common);
  add_ds_flags(simulate, &ds);
  simulate->add_option("--modes", modes_csv, "Comma-separated disclosure modes");

  // delta-factor
  int df_k = 2;
  std::string q_values = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1";
  std::string temperatures = "0.0001,0.02,0.05,0.1,0.2";
  CLI::App* delta_factor = app.add_subcommand("delta-factor", "DS proportionality factor table");
  add_common_flags(delta_factor, &common);
  delta_factor->add_option("--k", df_k, "Class count K");
  delta_factor->add_option("--q-values", q_values, "Comma-separated thresholds");
  delta_factor->add_option("--temperatures", temperatures, "Comma-separated temperatures");

  // setsize
  std::string ss_temperatures = "0";
  CLI::App* setsize = app.add_subcommand("setsize", "Expected decision-set size table");
  add_profile_flags(setsize, &profile);
  add_common_flags(setsize, &common);
  setsize->add_option("--q-values", q_values, "Comma-separated thresholds");
  setsize->add_option("--temperatures", ss_temperatures, "Comma-separated temperatures");

  // fit
  std::string fit_input, fit_input_out, fit_input_in;
  std::string fit_model = "dirichlet";
  double fit_p_star = 0.0;
  double fit_clamp = 1e-6;
  bool fit_no_renormalize = false;
  double fit_tol = 1e-10;
  int fit_max_iter = 1000;
  CLI::App* fit = app.add_subcommand("fit", "Maximum-likelihood model fit");
  add_common_flags(fit, &common);
  fit->add_option("--input", fit_input, "Confidence CSV to fit");
  fit->add_option("--input-out", fit_input_out, "Out-hypothesis CSV (pair mode)");
  fit->add_option("--input-in", fit_input_in, "In-hypothesis CSV (pair mode)");
  fit->add_option("--p-star", fit_p_star, "Ground-truth true-label probability (pair mode)");
  fit->add_option("--model", fit_model, "Model family")
      ->check(CLI::IsMember({"dirichlet", "beta"}));
  fit->add_option("--clamp", fit_clamp, "Component clamp applied during ingestion");
  fit->add_flag("--no-renormalize", fit_no_renormalize, "Reject rows that do not sum to one");
  fit->add_option("--tol", fit_tol, "Stationarity tolerance");
  fit->add_option("--max-iter", fit_max_iter, "Fixed-point iteration cap");

  // gen
  std::string gen_hypothesis = "out";
  std::uint64_t gen_n = 1000;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic confidence CSV");
  add_profile_flags(gen, &profile);
  add_common_flags(gen, &common);
  gen->add_option("--hypothesis", gen_hypothesis, "out or in");
  gen->add_option("--n", gen_n, "Number of rows");

  // sweep
  std::string sweep_param = "delta";
  std::string sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "Bounds plus simulation across a parameter");
  add_profile_flags(sweep, &profile);
  add_common_flags(sweep, &common);
  add_ds_flags(sweep, &ds);
  sweep->add_option("--modes", modes_csv, "Comma-separated disclosure modes");
  sweep->add_option("--param", sweep_param, "Swept parameter")
      ->check(CLI::IsMember({"delta", "eps-a", "eps-e", "q", "temperature", "k"}));
  sweep->add_option("--values", sweep_values, "Comma-separated swept values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // input error
  }

  try {
    if (params->parsed()) return cmd_params(profile, common);
    if (bounds->parsed()) return cmd_bounds(profile, common, ds, modes_csv, beta_lb);
    if (simulate->parsed()) return cmd_simulate(profile, common, ds, modes_csv);
    if (delta_factor->parsed()) return cmd_delta_factor(common, df_k, q_values, temperatures);
    if (setsize->parsed()) return cmd_setsize(profile, common, q_values, ss_temperatures);
    if (fit->parsed()) {
      return cmd_fit(common, fit_input, fit_input_out, fit_input_in, fit_p_star, fit_model,
                     fit_clamp, !fit_no_renormalize, fit_tol, fit_max_iter);
    }
    if (gen->parsed()) return cmd_gen(profile, common, gen_hypothesis, gen_n);
    if (sweep->parsed()) {
      return cmd_sweep(profile, common, ds, modes_csv, sweep_param, sweep_values);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
