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

// Command-line driver. Everything goes through the C interface; diagnostics
// go to stderr and the exit code is the failing status (0 on success).

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scst/scst_c.h"

namespace {

struct Failure {
  scst_status status;
  std::string message;
};

void check(scst_status s) {
  if (s != SCST_OK) throw Failure{s, scst_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw Failure{SCST_ERR_USAGE, message}; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= s.size()) {
    const size_t comma = s.find(',', start);
    const size_t end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

class Config {
 public:
  Config(const std::string& path, const std::vector<std::string>& overrides) {
    check(scst_config_load(path.empty() ? nullptr : path.c_str(), &cfg_));
    for (const std::string& kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        usage("override '" + kv + "' is not key=value");
      }
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
  ~Config() { scst_config_free(cfg_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;

  void set(const std::string& key, const std::string& value) {
    check(scst_config_set(cfg_, key.c_str(), value.c_str()));
  }
  const scst_config* get() const { return cfg_; }

 private:
  scst_config* cfg_ = nullptr;
};

class DatasetHandle {
 public:
  explicit DatasetHandle(const std::string& dir) { check(scst_dataset_load(dir.c_str(), &d_)); }
  ~DatasetHandle() { scst_dataset_free(d_); }
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;
  const scst_dataset* get() const { return d_; }

 private:
  scst_dataset* d_ = nullptr;
};

class Models {
 public:
  explicit Models(const std::vector<std::string>& paths) {
    for (const std::string& p : paths) {
      scst_model* m = nullptr;
      const scst_status s = scst_model_load(p.c_str(), &m);
      if (s != SCST_OK) {
        release();
        throw Failure{s, scst_last_error()};
      }
      models_.push_back(m);
    }
  }
  ~Models() { release(); }
  Models(const Models&) = delete;
  Models& operator=(const Models&) = delete;
  const scst_model* const* data() const { return models_.data(); }
  size_t size() const { return models_.size(); }

 private:
  void release() {
    for (scst_model* m : models_) scst_model_free(m);
    models_.clear();
  }
  std::vector<scst_model*> models_;
};

struct TrainArgs {
  std::string data, out, config;
  std::vector<std::string> overrides;
  std::string seed, arch;
};

void add_train_options(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--data", a.data, "dataset directory")->required();
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--config", a.config, "INI config file");
  cmd->add_option("--set", a.overrides, "section.key=value override (repeatable)");
  cmd->add_option("--seed", a.seed, "training seed");
  cmd->add_option("--arch", a.arch, "fc, att2in or att2all");
}

void apply_common(Config& cfg, const TrainArgs& a) {
  if (!a.seed.empty()) cfg.set("seed", a.seed);
  if (!a.arch.empty()) cfg.set("model.arch", a.arch);
}

std::vector<std::string> checkpoint_list(const std::string& ckpt, const std::string& ensemble) {
  std::vector<std::string> paths;
  if (!ckpt.empty()) paths.push_back(ckpt);
  for (const std::string& p : split_list(ensemble)) paths.push_back(p);
  if (paths.empty()) {
    usage("give --ckpt or --ensemble");
  }
  return paths;
}

std::string sibling_vocab(const std::string& refs) {
  const size_t slash = refs.find_last_of('/');
  return (slash == std::string::npos ? std::string() : refs.substr(0, slash + 1)) + "vocab.tsv";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-critical sequence training for toy image captioning"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic captioning dataset");
  std::string gen_out;
  uint64_t gen_seed = 0;
  size_t n_train = 2000, n_val = 200, n_test = 200;
  int min_count = 5;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "dataset seed");
  gen->add_option("--n-train", n_train);
  gen->add_option("--n-val", n_val);
  gen->add_option("--n-test", n_test);
  gen->add_option("--min-count", min_count, "words rarer than this become <unk>");

  // train-xe
  auto* xe = app.add_subcommand("train-xe", "cross-entropy pretraining");
  TrainArgs xe_args;
  add_train_options(xe, xe_args);

  // train-rl
  auto* rl = app.add_subcommand("train-rl", "policy-gradient fine-tuning");
  TrainArgs rl_args;
  std::string rl_init, estimator, reward;
  add_train_options(rl, rl_args);
  rl->add_option("--init", rl_init, "starting checkpoint")->required();
  rl->add_option("--estimator", estimator)
      ->check(CLI::IsMember({"reinforce", "baseline", "mixer", "scst", "td-scst", "true-scst"}));
  rl->add_option("--reward", reward)->check(CLI::IsMember({"cider", "bleu", "rouge"}));

  // decode
  auto* dec = app.add_subcommand("decode", "caption a split as JSON lines");
  std::string dec_data, dec_split = "test", dec_ckpt, dec_ensemble, dec_out;
  size_t dec_beam = 1;
  double dec_margin = 5.0;
  dec->add_option("--data", dec_data, "dataset directory")->required();
  dec->add_option("--split", dec_split)->check(CLI::IsMember({"train", "val", "test"}));
  dec->add_option("--ckpt", dec_ckpt, "checkpoint");
  dec->add_option("--ensemble", dec_ensemble, "comma-separated checkpoints");
  dec->add_option("--beam", dec_beam, "beam width (1 is greedy)");
  dec->add_option("--prune-margin", dec_margin, "log-probability prune margin");
  dec->add_option("--out", dec_out, "output JSONL")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "score captions");
  std::string ev_cands, ev_refs, ev_vocab, ev_out, ev_data, ev_split = "test", ev_ckpt,
                                                         ev_ensemble;
  size_t ev_beam = 3;
  double ev_margin = 5.0;
  ev->add_option("--candidates", ev_cands, "decoder JSONL (per-example mode)");
  ev->add_option("--references", ev_refs, "reference split JSONL");
  ev->add_option("--vocab", ev_vocab, "vocab.tsv (default: next to --references)");
  ev->add_option("--data", ev_data, "dataset directory (table mode)");
  ev->add_option("--split", ev_split)->check(CLI::IsMember({"train", "val", "test"}));
  ev->add_option("--ckpt", ev_ckpt, "checkpoint (table mode)");
  ev->add_option("--ensemble", ev_ensemble, "comma-separated checkpoints (table mode)");
  ev->add_option("--beam", ev_beam, "beam width for the beam rows");
  ev->add_option("--prune-margin", ev_margin);
  ev->add_option("--out", ev_out, "output CSV")->required();

  // sweep-beam
  auto* sw = app.add_subcommand("sweep-beam", "metrics as a function of beam width");
  std::string sw_data, sw_split = "test", sw_ckpt, sw_ensemble, sw_out,
                       sw_widths = "1,2,3,4,5,7,10";
  double sw_margin = 5.0;
  sw->add_option("--data", sw_data, "dataset directory")->required();
  sw->add_option("--split", sw_split)->check(CLI::IsMember({"train", "val", "test"}));
  sw->add_option("--ckpt", sw_ckpt);
  sw->add_option("--ensemble", sw_ensemble);
  sw->add_option("--widths", sw_widths, "comma-separated beam widths");
  sw->add_option("--prune-margin", sw_margin);
  sw->add_option("--out", sw_out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      check(scst_gen_data(gen_out.c_str(), gen_seed, n_train, n_val, n_test, min_count));
    } else if (*xe) {
      Config cfg(xe_args.config, xe_args.overrides);
      apply_common(cfg, xe_args);
      DatasetHandle data(xe_args.data);
      double best = 0.0;
      check(scst_train_xe(cfg.get(), data.get(), xe_args.out.c_str(), &best));
      std::printf("best val cider %.6f\n", best);
    } else if (*rl) {
      Config cfg(rl_args.config, rl_args.overrides);
      apply_common(cfg, rl_args);
      if (!estimator.empty()) cfg.set("rl.estimator", estimator);
      if (!reward.empty()) cfg.set("rl.reward", reward);
      DatasetHandle data(rl_args.data);
      Models init({rl_init});
      double best = 0.0;
      check(scst_train_rl(cfg.get(), data.get(), init.data()[0], rl_args.out.c_str(), &best));
      std::printf("best val score %.6f\n", best);
    } else if (*dec) {
      DatasetHandle data(dec_data);
      Models models(checkpoint_list(dec_ckpt, dec_ensemble));
      check(scst_decode_split(models.data(), models.size(), data.get(), dec_split.c_str(),
                              dec_beam, dec_margin, dec_out.c_str()));
    } else if (*ev) {
      if (!ev_cands.empty()) {
        if (ev_refs.empty()) {
          usage("--candidates needs --references");
        }
        const std::string vocab = ev_vocab.empty() ? sibling_vocab(ev_refs) : ev_vocab;
        scst_scores s{};
        check(scst_eval_files(ev_cands.c_str(), ev_refs.c_str(), vocab.c_str(), ev_out.c_str(),
                              &s));
        std::printf("cider_d %.6f bleu4 %.6f rouge_l %.6f\n", s.cider, s.bleu4, s.rouge_l);
      } else {
        if (ev_data.empty()) {
          usage("eval needs --candidates/--references or --data");
        }
        const auto paths = checkpoint_list(ev_ckpt, ev_ensemble);
        std::vector<const char*> cpaths;
        for (const std::string& p : paths) cpaths.push_back(p.c_str());
        DatasetHandle data(ev_data);
        check(scst_eval_run(cpaths.data(), cpaths.size(), data.get(), ev_split.c_str(), ev_beam,
                            ev_margin, ev_out.c_str()));
      }
    } else if (*sw) {
      std::vector<size_t> widths;
      for (const std::string& w : split_list(sw_widths)) {
        try {
          size_t used = 0;
          const unsigned long v = std::stoul(w, &used);
          if (used != w.size()) throw std::invalid_argument(w);
          widths.push_back(v);
        } catch (const std::exception&) {
          usage("bad beam width '" + w + "'");
        }
      }
      DatasetHandle data(sw_data);
      Models models(checkpoint_list(sw_ckpt, sw_ensemble));
      check(scst_sweep_beam(models.data(), models.size(), data.get(), sw_split.c_str(),
                            widths.data(), widths.size(), sw_margin, sw_out.c_str()));
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "scst: %s: %s\n", scst_status_name(f.status), f.message.c_str());
    return static_cast<int>(f.status);
  }
  return 0;
}
