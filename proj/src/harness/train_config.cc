// Copyright 2026 The SCST Lab Authors.
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

#include "scst/train_config.h"

#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "scst/error.h"

namespace scst {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "seed",
      "model.arch",
      "model.hidden",
      "model.max_len",
      "xe.epochs",
      "xe.batch_size",
      "xe.learning_rate",
      "xe.anneal_factor",
      "xe.anneal_period",
      "xe.ss_increment",
      "xe.ss_period",
      "xe.ss_max",
      "rl.epochs",
      "rl.batch_size",
      "rl.learning_rate",
      "rl.anneal_factor",
      "rl.anneal_period",
      "rl.estimator",
      "rl.reward",
      "rl.select_metric",
      "rl.true_scst_lookahead",
      "rl.baseline_learning_rate",
      "rl.mixer_initial",
      "rl.mixer_step",
  };
  return k;
}

void check_keys(const pt::ptree& tree, const std::string& prefix) {
  for (const auto& [key, child] : tree) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (child.empty()) {
      if (!known_keys().count(full)) throw ConfigError("unknown config key '" + full + "'");
    } else {
      check_keys(child, full);
    }
  }
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  std::istringstream in(*node);
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + *node + "'");
  }
  return value;
}

std::string get_str(const pt::ptree& tree, const std::string& key, const std::string& fallback) {
  return tree.get<std::string>(key, fallback);
}

const char* short_metric(MetricKind k) {
  switch (k) {
    case MetricKind::kCiderD: return "cider";
    case MetricKind::kBleu4: return "bleu";
    case MetricKind::kRougeL: return "rouge";
  }
  return "cider";
}

}  // namespace

double XeConfig::feedback_prob(int epochs_completed) const {
  if (ss_period <= 0 || epochs_completed <= 0) return 0.0;
  const double p = ss_increment * static_cast<double>(epochs_completed / ss_period);
  return std::min(ss_max, p);
}

void TrainConfig::validate() const {
  xe.adam.validate();
  rl.adam.validate();
  if (xe.epochs < 0 || rl.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (xe.batch_size < 1 || rl.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (xe.ss_increment < 0.0 || xe.ss_max < 0.0 || xe.ss_max > 1.0) {
    throw ConfigError("scheduled sampling probabilities must lie in [0, 1]");
  }
  if (rl.true_scst_lookahead < 1) throw ConfigError("rl.true_scst_lookahead must be >= 1");
  if (!(rl.baseline_learning_rate > 0.0)) {
    throw ConfigError("rl.baseline_learning_rate must be positive");
  }
  if (model.hidden < 1 || model.max_len < 1) {
    throw ConfigError("model.hidden and model.max_len must be >= 1");
  }
}

TrainConfig load_train_config(const std::string& path, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  if (!path.empty()) {
    try {
      pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(e.what());
    }
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not key=value");
    }
    tree.put(o.substr(0, eq), o.substr(eq + 1));
  }
  check_keys(tree, "");

  TrainConfig c;
  c.seed = get<std::uint64_t>(tree, "seed", c.seed);
  try {
    c.model.arch = parse_arch(get_str(tree, "model.arch", arch_name(c.model.arch)));
    c.rl.estimator =
        parse_estimator(get_str(tree, "rl.estimator", estimator_name(c.rl.estimator)));
    c.rl.reward = parse_metric(get_str(tree, "rl.reward", short_metric(c.rl.reward)));
    c.rl.select_metric =
        parse_metric(get_str(tree, "rl.select_metric", short_metric(c.rl.select_metric)));
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
  c.model.hidden = get(tree, "model.hidden", c.model.hidden);
  c.model.max_len = get(tree, "model.max_len", c.model.max_len);

  c.xe.epochs = get(tree, "xe.epochs", c.xe.epochs);
  c.xe.batch_size = get(tree, "xe.batch_size", c.xe.batch_size);
  c.xe.adam.learning_rate = get(tree, "xe.learning_rate", c.xe.adam.learning_rate);
  c.xe.adam.anneal_factor = get(tree, "xe.anneal_factor", c.xe.adam.anneal_factor);
  c.xe.adam.anneal_period = get(tree, "xe.anneal_period", c.xe.adam.anneal_period);
  c.xe.ss_increment = get(tree, "xe.ss_increment", c.xe.ss_increment);
  c.xe.ss_period = get(tree, "xe.ss_period", c.xe.ss_period);
  c.xe.ss_max = get(tree, "xe.ss_max", c.xe.ss_max);

  c.rl.epochs = get(tree, "rl.epochs", c.rl.epochs);
  c.rl.batch_size = get(tree, "rl.batch_size", c.rl.batch_size);
  c.rl.adam.learning_rate = get(tree, "rl.learning_rate", c.rl.adam.learning_rate);
  c.rl.adam.anneal_factor = get(tree, "rl.anneal_factor", c.rl.adam.anneal_factor);
  c.rl.adam.anneal_period = get(tree, "rl.anneal_period", c.rl.adam.anneal_period);
  c.rl.true_scst_lookahead = get(tree, "rl.true_scst_lookahead", c.rl.true_scst_lookahead);
  c.rl.baseline_learning_rate =
      get(tree, "rl.baseline_learning_rate", c.rl.baseline_learning_rate);
  c.rl.mixer_initial = get(tree, "rl.mixer_initial", c.rl.mixer_initial);
  c.rl.mixer_step = get(tree, "rl.mixer_step", c.rl.mixer_step);
  c.validate();
  return c;
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "seed = " << c.seed << "\n\n[model]\narch = " << arch_name(c.model.arch)
    << "\nhidden = " << c.model.hidden << "\nmax_len = " << c.model.max_len << "\n\n[xe]\n"
    << "epochs = " << c.xe.epochs << "\nbatch_size = " << c.xe.batch_size
    << "\nlearning_rate = " << c.xe.adam.learning_rate
    << "\nanneal_factor = " << c.xe.adam.anneal_factor
    << "\nanneal_period = " << c.xe.adam.anneal_period
    << "\nss_increment = " << c.xe.ss_increment << "\nss_period = " << c.xe.ss_period
    << "\nss_max = " << c.xe.ss_max << "\n\n[rl]\nepochs = " << c.rl.epochs
    << "\nbatch_size = " << c.rl.batch_size << "\nlearning_rate = " << c.rl.adam.learning_rate
    << "\nanneal_factor = " << c.rl.adam.anneal_factor
    << "\nanneal_period = " << c.rl.adam.anneal_period
    << "\nestimator = " << estimator_name(c.rl.estimator)
    << "\nreward = " << short_metric(c.rl.reward)
    << "\nselect_metric = " << short_metric(c.rl.select_metric)
    << "\ntrue_scst_lookahead = " << c.rl.true_scst_lookahead
    << "\nbaseline_learning_rate = " << c.rl.baseline_learning_rate
    << "\nmixer_initial = " << c.rl.mixer_initial << "\nmixer_step = " << c.rl.mixer_step
    << "\n";
  return o.str();
}

}  // namespace scst
