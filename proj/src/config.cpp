// Copyright 2026 The dnehb Authors.
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

#include "dnehb/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "dnehb/errors.hpp"

namespace dnehb {

std::vector<std::uint64_t> ExperimentConfig::default_seeds(std::size_t count, std::uint64_t offset) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = offset + i;
  return s;
}

void ExperimentConfig::validate() const {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be > 0");
  if (max_iterations < 1) throw InputError("max_iterations must be >= 1");
  if (seeds.empty()) throw InputError("seed list is empty");
  if (!(density >= 0.0 && density <= 1.0)) throw InputError("density must lie in [0, 1]");
  if (alpha.empty() || beta.empty()) throw InputError("alpha and beta need at least one value");
  for (double a : alpha) {
    if (!(a > 0.0)) throw InputError("alpha values must be > 0");
  }
  for (double b : beta) {
    if (!(b >= 0.0)) throw InputError("beta values must be >= 0");
  }
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (feasibility_horizon_cap < 1) throw InputError("feasibility_horizon_cap must be >= 1");
  if (!game_path) {
    if (sampling.firms < 2) throw InputError("need at least two firms");
    if (sampling.dimension < sampling.firms || sampling.dimension > sampling.firms * sampling.markets) {
      throw InputError("dimension must lie in [firms, firms * markets]");
    }
  }
}

std::vector<double> per_agent(const std::vector<double>& values, std::size_t agents, const char* what) {
  if (values.size() == 1) return std::vector<double>(agents, values.front());
  if (values.size() != agents) {
    throw InputError(fmt::format("{} needs 1 or {} values, got {}", what, agents, values.size()));
  }
  return values;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  Reader(std::string source, std::size_t line, std::string key)
      : source_(std::move(source)), line_(line), key_(std::move(key)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError(fmt::format("{}:{}: {}: {}", source_, line_, key_, msg));
  }

  double real(const std::string& s) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("not a number: '" + s + "'");
    return v;
  }

  std::uint64_t count(const std::string& s) const {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("not a nonnegative integer: '" + s + "'");
    return v;
  }

  std::size_t size(const std::string& s) const {
    // Accept scientific notation such as 1e5 for iteration counts.
    const double v = real(s);
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) fail("not a count: '" + s + "'");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> reals(const std::string& s) const {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) out.push_back(real(item));
    if (out.empty()) fail("empty list");
    return out;
  }

  std::pair<double, double> range(const std::string& s) const {
    const std::vector<double> v = reals(s);
    if (v.size() != 2 || !(v[0] <= v[1])) fail("expected 'lo, hi' with lo <= hi");
    return {v[0], v[1]};
  }

  bool boolean(const std::string& s) const {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail("not a boolean: '" + s + "'");
  }

 private:
  std::string source_;
  std::size_t line_;
  std::string key_;
};

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::optional<std::size_t> seed_count;
  std::uint64_t seed_offset = 0;
  std::optional<std::vector<std::uint64_t>> seed_list;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Reader r(source, lineno, key);
    if (value.empty()) r.fail("missing value");
    if (!seen.emplace(key, lineno).second) r.fail("duplicate key");

    CournotSampling& s = cfg.sampling;
    if (key == "game") {
      cfg.game_path = value;
    } else if (key == "firms") {
      s.firms = r.size(value);
    } else if (key == "markets") {
      s.markets = r.size(value);
    } else if (key == "dimension") {
      s.dimension = r.size(value);
    } else if (key == "q_diag") {
      std::tie(s.q_diag_lo, s.q_diag_hi) = r.range(value);
    } else if (key == "q_linear") {
      std::tie(s.q_lin_lo, s.q_lin_hi) = r.range(value);
    } else if (key == "price_intercept") {
      std::tie(s.intercept_lo, s.intercept_hi) = r.range(value);
    } else if (key == "price_slope") {
      std::tie(s.slope_lo, s.slope_hi) = r.range(value);
    } else if (key == "alpha") {
      cfg.alpha = r.reals(value);
    } else if (key == "beta") {
      cfg.beta = r.reals(value);
    } else if (key == "density") {
      cfg.density = r.real(value);
    } else if (key == "epsilon") {
      cfg.epsilon = r.real(value);
    } else if (key == "max_iterations") {
      cfg.max_iterations = r.size(value);
    } else if (key == "seeds") {
      seed_count = r.size(value);
    } else if (key == "seed_offset") {
      seed_offset = r.count(value);
      cfg.seed_offset = seed_offset;
    } else if (key == "seed_list") {
      std::vector<std::uint64_t> list;
      for (const std::string& item : split_list(value)) list.push_back(r.count(item));
      seed_list = std::move(list);
    } else if (key == "trace") {
      cfg.trace = r.boolean(value);
    } else if (key == "plot_seeds") {
      cfg.plot_seeds = r.size(value);
    } else if (key == "horizon") {
      cfg.horizon = r.size(value);
    } else if (key == "feasibility_horizon_cap") {
      cfg.feasibility_horizon_cap = r.size(value);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else {
      r.fail("unknown key");
    }
  }
  if (seed_list) {
    cfg.seeds = *seed_list;
  } else {
    cfg.seeds = ExperimentConfig::default_seeds(seed_count.value_or(100), seed_offset);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  ExperimentConfig cfg = parse_config(in, path.string());
  if (cfg.game_path && cfg.game_path->is_relative()) cfg.game_path = path.parent_path() / *cfg.game_path;
  return cfg;
}

}  // namespace dnehb
