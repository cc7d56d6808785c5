// Copyright 2026 The seqvae Authors.
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

#include "seqvae/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqvae/errors.hpp"
#include "seqvae/synthetic.hpp"
#include "seqvae/training.hpp"

namespace seqvae::cli {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_as(const std::string& key, const std::string& text) {
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + text + "' for " + key);
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!trim(part).empty()) out.push_back(parse_as<std::size_t>(key, trim(part)));
  }
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file, then rename.
void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    out[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return out;
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--set", opts.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", opts.seed, "random seed for every stage");
}

RunConfig load_run_config(const CommonOptions& opts) {
  RunConfig rc;
  if (!opts.config_path.empty()) rc.apply(read_config_file(opts.config_path));
  rc.apply(parse_overrides(opts.sets));
  if (opts.seed) rc.set_seed(*opts.seed);
  return rc;
}

nlohmann::ordered_json settings_json(const std::vector<std::pair<std::string, std::string>>& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s) j[k] = v;
  return j;
}

void print_stats(std::ostream& out, const DatasetStats& st) {
  out << "users\t" << st.users << '\n'
      << "items\t" << st.items << '\n'
      << "interactions\t" << st.interactions << '\n'
      << "average_length\t" << std::fixed << std::setprecision(2) << st.average_length << std::defaultfloat << '\n'
      << "train_users\t" << st.train_users << '\n'
      << "validation_users\t" << st.validation_users << '\n'
      << "test_users\t" << st.test_users << '\n';
}

int cmd_prepare(const std::string& input, const std::string& out_dir, const CommonOptions& common,
                std::ostream& out) {
  RunConfig rc = load_run_config(common);
  const std::string bytes = read_file(input);
  const auto records = parse_records(bytes, rc.pipeline.format);
  const DatasetSplit split = prepare_split(records, rc.pipeline);
  nlohmann::ordered_json extra;
  extra["command"] = "prepare";
  extra["config"] = settings_json(rc.pipeline_settings());
  extra["seed"] = rc.pipeline.seed;
  extra["input"] = {{"path", fs::path(input).filename().string()}, {"digest", fnv1a_hex(bytes)}};
  write_split(out_dir, split, extra.dump());
  print_stats(out, compute_stats(split));
  return 0;
}

int cmd_train(const std::string& split_dir, const std::string& kind_name, const std::string& out_dir,
              std::optional<int> epochs, const CommonOptions& common, std::ostream& out) {
  RunConfig rc = load_run_config(common);
  if (epochs) rc.model.epochs = *epochs;
  rc.model.validate();
  const ModelKind kind = parse_model_kind(kind_name);
  const DatasetSplit split = read_split(split_dir);
  fs::create_directories(out_dir);

  std::ostringstream curve;
  curve << "epoch,train_loss,val_ndcg100,seconds\n";
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochStats& s) {
    curve << s.epoch << ',' << fmt(s.train_loss) << ',' << fmt(s.validation_ndcg100) << ',' << fmt(s.seconds)
          << '\n';
    out << "epoch " << s.epoch << " loss " << s.train_loss << " val_ndcg@100 " << s.validation_ndcg100 << '\n';
  };
  TrainResult result = train(kind, split, rc.model, cb);

  CheckpointInfo info{result.best_epoch, result.best_validation, split.vocabulary.digest()};
  const fs::path ckpt = fs::path(out_dir) / "checkpoint";
  save_checkpoint(ckpt, *result.model, info);
  {
    std::string vocab;
    for (std::size_t i = 0; i < split.vocabulary.size(); ++i) {
      vocab += split.vocabulary.raw_id(i) + "\t" + std::to_string(i) + "\n";
    }
    write_atomically(ckpt / "vocabulary.tsv", vocab);
  }
  write_atomically(fs::path(out_dir) / "learning_curve.csv", curve.str());

  nlohmann::ordered_json manifest;
  manifest["command"] = "train";
  manifest["model"] = to_string(kind);
  manifest["config"] = settings_json(rc.model.settings());
  manifest["seed"] = rc.model.seed;
  manifest["split"] = {{"path", fs::absolute(split_dir).lexically_normal().string()},
                       {"vocabulary_digest", split.vocabulary.digest()},
                       {"manifest_digest", fnv1a_hex(read_file(fs::path(split_dir) / "manifest.json"))}};
  manifest["best_epoch"] = result.best_epoch;
  write_atomically(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  out << "best epoch " << result.best_epoch << '\n';
  return 0;
}

int cmd_eval(const std::string& split_dir, const std::string& checkpoint, bool pop, const std::string& which,
             const std::string& cutoffs, bool cap_idcg, const std::string& report_path,
             const std::string& history_csv, const CommonOptions& common, std::ostream& out) {
  RunConfig rc = load_run_config(common);
  if (!cutoffs.empty()) rc.eval.cutoffs = parse_list("cutoffs", cutoffs);
  if (cap_idcg) rc.eval.cap_idcg = true;
  if (pop == !checkpoint.empty()) throw ConfigError("eval needs exactly one of --checkpoint or --pop");
  const DatasetSplit split = read_split(split_dir);
  const std::vector<HeldOutUser>* users = nullptr;
  if (which == "test") {
    users = &split.test;
  } else if (which == "validation") {
    users = &split.validation;
  } else {
    throw ConfigError("--split-name must be test or validation");
  }

  EvalOptions opts = rc.eval;
  opts.keep_per_user = !history_csv.empty();
  EvalReport report;
  if (pop) {
    PopularityBaseline baseline(split.train, split.catalog_size());
    report = evaluate(baseline, *users, opts);
    report.config_digest = fnv1a_hex("pop");
  } else {
    LoadedModel loaded = load_checkpoint(checkpoint);
    if (loaded.info.vocabulary_digest != split.vocabulary.digest() ||
        loaded.model->catalog_size() != split.catalog_size()) {
      throw ConfigError("checkpoint catalog (" + std::to_string(loaded.model->catalog_size()) +
                        " items) does not match the split vocabulary (" + std::to_string(split.catalog_size()) +
                        " items)");
    }
    report = evaluate(*loaded.model, *users, opts);
    report.config_digest = loaded.model->config().digest();
  }
  const std::string json = report.to_json() + "\n";
  out << json;
  if (!report_path.empty()) write_atomically(report_path, json);
  if (!history_csv.empty()) {
    std::ostringstream csv;
    csv << "fold_in_min,fold_in_max,users,mean_ndcg100\n";
    for (const auto& b : ndcg_by_history_length(report, 100)) {
      csv << b.lower << ',' << (b.upper ? std::to_string(b.upper) : std::string("inf")) << ',' << b.users << ','
          << fmt(b.mean_ndcg) << '\n';
    }
    write_atomically(history_csv, csv.str());
  }
  return 0;
}

int cmd_recommend(const std::string& checkpoint, const std::string& history, std::size_t top_n, std::ostream& out) {
  LoadedModel loaded = load_checkpoint(checkpoint);
  ItemVocabulary vocab;
  {
    std::istringstream in(read_file(fs::path(checkpoint) / "vocabulary.tsv"));
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab != std::string::npos) vocab.intern(line.substr(0, tab));
    }
  }
  if (vocab.digest() != loaded.info.vocabulary_digest) throw ConfigError("checkpoint vocabulary is corrupt");
  std::vector<ItemIndex> items;
  std::stringstream ss(history);
  std::string id;
  while (std::getline(ss, id, ',')) {
    id = trim(id);
    if (id.empty()) continue;
    if (!vocab.contains(id)) throw LookupError("unknown item id '" + id + "'");
    items.push_back(vocab.index_of(id));
  }
  const auto scores = loaded.model->score(items);
  const RankedList ranked = rank_items(scores, items);
  for (std::size_t k = 0; k < std::min(top_n, ranked.size()); ++k) {
    out << vocab.raw_id(ranked[k]) << '\t' << fmt(scores[ranked[k]]) << '\n';
  }
  return 0;
}

int cmd_synth(const std::string& kind, const std::string& path, std::size_t items, std::size_t users,
              std::size_t length, std::size_t min_length, std::uint64_t seed) {
  std::vector<UserSequence> seqs;
  if (kind == "cyclic") {
    seqs = synthetic::cyclic(items, users, length, seed);
  } else if (kind == "burst") {
    seqs = synthetic::burst(items / 4, users, min_length ? min_length : length, length, seed);
  } else if (kind == "popularity") {
    seqs = synthetic::popularity(items, users, length, seed);
  } else {
    throw ConfigError("unknown synthetic kind '" + kind + "'");
  }
  std::ostringstream out;
  for (const auto& r : synthetic::to_records(seqs)) {
    out << r.user_id << ',' << r.item_id << ',' << static_cast<int>(r.rating) << ',' << r.timestamp << '\n';
  }
  write_atomically(path, out.str());
  return 0;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const fs::path& path) { return parse_config_text(read_file(path)); }

void RunConfig::set_seed(std::uint64_t seed) {
  pipeline.seed = seed;
  model.seed = seed;
}

void RunConfig::apply(const std::map<std::string, std::string>& settings) {
  for (const auto& [key, v] : settings) {
    if (key == "seed") {
      set_seed(parse_as<std::uint64_t>(key, v));
    } else if (key == "delimiter") {
      pipeline.format.delimiter = v;
    } else if (key == "rating_min") {
      pipeline.format.rating_min = parse_as<double>(key, v);
    } else if (key == "rating_max") {
      pipeline.format.rating_max = parse_as<double>(key, v);
    } else if (key == "binarize_threshold") {
      pipeline.binarize_threshold = parse_as<double>(key, v);
    } else if (key == "min_history") {
      pipeline.min_history = parse_as<std::size_t>(key, v);
    } else if (key == "subsample_users") {
      pipeline.subsample_users = parse_as<std::size_t>(key, v);
    } else if (key == "strata_edges") {
      pipeline.strata_edges = parse_list(key, v);
    } else if (key == "train_fraction") {
      pipeline.fractions.train = parse_as<double>(key, v);
    } else if (key == "validation_fraction") {
      pipeline.fractions.validation = parse_as<double>(key, v);
    } else if (key == "test_fraction") {
      pipeline.fractions.test = parse_as<double>(key, v);
    } else if (key == "fold_ratio") {
      pipeline.fold_ratio = parse_as<double>(key, v);
    } else if (key == "cutoffs") {
      eval.cutoffs = parse_list(key, v);
    } else if (key == "cap_idcg") {
      if (v != "true" && v != "false") throw ConfigError("cap_idcg must be true or false");
      eval.cap_idcg = v == "true";
    } else if (!model.apply_setting(key, v)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::pipeline_settings() const {
  return {{"delimiter", pipeline.format.delimiter},
          {"rating_min", fmt(pipeline.format.rating_min)},
          {"rating_max", fmt(pipeline.format.rating_max)},
          {"binarize_threshold", fmt(pipeline.binarize_threshold)},
          {"min_history", std::to_string(pipeline.min_history)},
          {"subsample_users", std::to_string(pipeline.subsample_users)},
          {"strata_edges", join(pipeline.strata_edges)},
          {"train_fraction", fmt(pipeline.fractions.train)},
          {"validation_fraction", fmt(pipeline.fractions.validation)},
          {"test_fraction", fmt(pipeline.fractions.test)},
          {"fold_ratio", fmt(pipeline.fold_ratio)},
          {"seed", std::to_string(pipeline.seed)}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational sequential recommendation: prepare, train, evaluate, recommend"};
  app.require_subcommand(1);

  CommonOptions prep_common;
  std::string prep_input;
  std::string prep_out;
  auto* prepare = app.add_subcommand("prepare", "build a train/validation/test split from a ratings file");
  prepare->add_option("--input", prep_input, "ratings file (user,item,rating,timestamp)")->required();
  prepare->add_option("--out", prep_out, "output split directory")->required();
  add_common(prepare, prep_common);

  CommonOptions train_common;
  std::string train_split;
  std::string train_model;
  std::string train_out;
  std::optional<int> train_epochs;
  auto* train_cmd = app.add_subcommand("train", "train a model and write its best-validation checkpoint");
  train_cmd->add_option("--split", train_split, "split directory")->required();
  train_cmd->add_option("--model", train_model, "svae | mvae | rvae")->required();
  train_cmd->add_option("--out", train_out, "output run directory")->required();
  train_cmd->add_option("--epochs", train_epochs, "number of epochs");
  add_common(train_cmd, train_common);

  CommonOptions eval_common;
  std::string eval_split;
  std::string eval_ckpt;
  bool eval_pop = false;
  std::string eval_which = "test";
  std::string eval_cutoffs;
  bool eval_cap = false;
  std::string eval_out;
  std::string eval_hist;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or the popularity baseline");
  eval_cmd->add_option("--split", eval_split, "split directory")->required();
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint directory");
  eval_cmd->add_flag("--pop", eval_pop, "evaluate the popularity baseline");
  eval_cmd->add_option("--split-name", eval_which, "test | validation");
  eval_cmd->add_option("--cutoffs", eval_cutoffs, "comma-separated list, default 10,100");
  eval_cmd->add_flag("--cap-idcg", eval_cap, "cap the ideal DCG at n relevant items");
  eval_cmd->add_option("--out", eval_out, "write the JSON report here");
  eval_cmd->add_option("--by-history-length", eval_hist, "write NDCG@100 per fold-in length bucket (CSV)");
  add_common(eval_cmd, eval_common);

  std::string rec_ckpt;
  std::string rec_history;
  std::size_t rec_top = 10;
  auto* rec = app.add_subcommand("recommend", "rank items for a history of raw item ids");
  rec->add_option("--checkpoint", rec_ckpt, "checkpoint directory")->required();
  rec->add_option("--history", rec_history, "comma-separated raw item ids")->required();
  rec->add_option("--top-n", rec_top, "number of items to print");

  std::string syn_kind = "cyclic";
  std::string syn_out;
  std::size_t syn_items = 50;
  std::size_t syn_users = 700;
  std::size_t syn_length = 30;
  std::size_t syn_min_length = 0;
  std::uint64_t syn_seed = 42;
  auto* synth = app.add_subcommand("synth", "write a synthetic ratings file");
  synth->add_option("--kind", syn_kind, "cyclic | burst | popularity");
  synth->add_option("--out", syn_out, "output ratings file")->required();
  synth->add_option("--items", syn_items, "catalog size");
  synth->add_option("--users", syn_users, "number of users");
  synth->add_option("--length", syn_length, "sequence length (the maximum for burst)");
  synth->add_option("--min-length", syn_min_length, "burst only: shortest sequence, default --length");
  synth->add_option("--seed", syn_seed, "random seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*prepare) return cmd_prepare(prep_input, prep_out, prep_common, out);
    if (*train_cmd) return cmd_train(train_split, train_model, train_out, train_epochs, train_common, out);
    if (*eval_cmd) {
      return cmd_eval(eval_split, eval_ckpt, eval_pop, eval_which, eval_cutoffs, eval_cap, eval_out, eval_hist,
                      eval_common, out);
    }
    if (*rec) return cmd_recommend(rec_ckpt, rec_history, rec_top, out);
    if (*synth) return cmd_synth(syn_kind, syn_out, syn_items, syn_users, syn_length, syn_min_length, syn_seed);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace seqvae::cli
