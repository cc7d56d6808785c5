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

// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "seqvae/cli.hpp"
#include "seqvae/evaluation.hpp"
#include "seqvae/models.hpp"
#include "seqvae/synthetic.hpp"
#include "seqvae/training.hpp"
#include "test_support.hpp"

using namespace seqvae;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
}

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

ModelConfig toy_config(std::uint64_t seed) {
  ModelConfig c;
  c.latent_dim = 4;
  c.item_embedding_dim = 4;
  c.gru_hidden = 4;
  c.encoder_widths = {5, 4};
  c.decoder_widths = {4, 5};
  c.rvae_embedding_dim = 3;
  c.rvae_encoder_widths = {5, 4};
  c.weight_decay = 0.0;
  c.seed = seed;
  return c;
}

// Scaled-down published architecture for the synthetic experiments.
ModelConfig scaled_config() {
  ModelConfig c;
  c.item_embedding_dim = 32;
  c.gru_hidden = 32;
  c.latent_dim = 16;
  c.encoder_widths = {32, 16};
  c.decoder_widths = {16, 32};
  c.rvae_embedding_dim = 32;
  c.rvae_encoder_widths = {32, 16};
  c.seed = 42;
  return c;
}

DatasetSplit cyclic_split() {
  return synthetic::make_split(synthetic::cyclic(50, 700, 30, 42), 50, 500, 100, 0.8);
}

std::vector<ItemIndex> random_items(std::mt19937_64& rng, std::size_t count, std::size_t catalog) {
  std::vector<ItemIndex> v(count);
  for (auto& x : v) x = std::uniform_int_distribution<ItemIndex>(0, catalog - 1)(rng);
  return v;
}

bool valid_prediction(const RankedList& ranked, std::size_t catalog, std::span<const ItemIndex> exclude) {
  const std::set<ItemIndex> seen(ranked.begin(), ranked.end());
  const std::set<ItemIndex> excluded(exclude.begin(), exclude.end());
  if (seen.size() != ranked.size()) return false;
  for (ItemIndex i : ranked) {
    if (i >= catalog || excluded.count(i)) return false;
  }
  return ranked.size() + excluded.size() == catalog;
}

Outcome gradient_fidelity() {
  double worst = 0.0;
  std::string worst_at;
  auto note = [&](double err, const std::string& what) {
    if (err > worst) {
      worst = err;
      worst_at = what;
    }
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const ModelConfig cfg = toy_config(seed);
    // Half the runs at the default initialization, half at U(-1, 1) parameters.
    auto prepare = [&](ParameterStore& store) {
      if (seed % 2 == 1) {
        for (const auto& n : store.names()) store.get(n) = testing::random_tensor(store.get(n).shape, rng);
      }
    };
    const std::size_t n = 8;
    const Tensor a = standard_normal({3, 4}, rng), b = standard_normal({3, 4}, rng);

    MvaeModel mvae(cfg, n);
    prepare(mvae.params());
    const std::vector<std::vector<ItemIndex>> bags{random_items(rng, 3, n), random_items(rng, 2, n),
                                                   random_items(rng, 4, n)};
    note(gradient_check([&](Tape& t, ParameterStore& s) { return mvae.loss(Binder(t, s), bags, a, 1.0); },
                        mvae.params()),
         "mvae");

    RvaeModel rvae(cfg, n, {0, 1, 2});
    prepare(rvae.params());
    std::vector<RankingTriple> triples;
    for (std::size_t i = 0; i < 3; ++i) {
      const ItemIndex p = rng() % n;
      triples.push_back({i, p, (p + 1 + rng() % (n - 1)) % n});
    }
    note(gradient_check(
             [&](Tape& t, ParameterStore& s) { return rvae.pair_loss(Binder(t, s), triples, a, b, 1.0); },
             rvae.params()),
         "rvae");

    SvaeModel svae(cfg, n);
    prepare(svae.params());
    const auto seq = random_items(rng, 5, n);
    const Tensor eps = standard_normal({5, 4}, rng);
    for (auto mode : {LikelihoodMode::next_k_multiset, LikelihoodMode::mixture}) {
      note(gradient_check(
               [&](Tape& t, ParameterStore& s) { return svae.loss(Binder(t, s), seq, eps, 1.0, 3, mode); },
               svae.params()),
           "svae/" + to_string(mode));
    }
  }
  return {worst < 1e-4, "max relative error " + num(worst) + " (" + worst_at + "), limit 1e-4"};
}

Outcome kl_oracle() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mu = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const double sigma = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    Tape tape;
    const GaussianParams g{tape.constant(Tensor::matrix(1, 1, {mu})), tape.constant(Tensor::matrix(1, 1, {std::log(sigma)}))};
    const double closed = kl_gaussian_standard(g).item();
    worst = std::max(worst, std::abs(closed - testing::kl_monte_carlo(mu, sigma, 1000000, 1000 + i)));
  }
  Tape tape;
  const double at_prior =
      kl_gaussian_standard({tape.constant(Tensor::matrix(1, 1, {0.0})), tape.constant(Tensor::matrix(1, 1, {0.0}))})
          .item();
  return {worst < 5e-3 && std::abs(at_prior) <= 1e-12,
          "max |closed form - MC| " + num(worst) + " over 20 draws (limit 5e-3), KL(0,1) = " + num(at_prior)};
}

Outcome metric_oracle() {
  std::mt19937_64 rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t catalog = std::uniform_int_distribution<std::size_t>(5, 500)(rng);
    RankedList ranked(catalog);
    std::iota(ranked.begin(), ranked.end(), ItemIndex{0});
    std::shuffle(ranked.begin(), ranked.end(), rng);
    ranked.resize(std::uniform_int_distribution<std::size_t>(1, catalog)(rng));
    std::vector<ItemIndex> pool(catalog);
    std::iota(pool.begin(), pool.end(), ItemIndex{0});
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(catalog, std::uniform_int_distribution<std::size_t>(1, 40)(rng)));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 120)(rng);

    // Brute force: relevance flags by linear scan, then the sums as written.
    double hits = 0.0, dcg = 0.0, idcg = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      double r = 0.0;
      if (i <= ranked.size()) {
        for (ItemIndex x : pool) r = (x == ranked[i - 1]) ? 1.0 : r;
      }
      hits += r;
      if (r != 0.0) dcg += r / std::log2(static_cast<double>(i + 1));
    }
    for (std::size_t i = 1; i <= pool.size(); ++i) idcg += 1.0 / std::log2(static_cast<double>(i + 1));
    if (ndcg_at_n(ranked, pool, n) != dcg / idcg) ++mismatches;
    if (precision_at_n(ranked, pool, n) != hits / static_cast<double>(n)) ++mismatches;
    if (recall_at_n(ranked, pool, n) != hits / static_cast<double>(pool.size())) ++mismatches;
  }
  const double hand = ndcg_at_n(RankedList{0, 1, 2}, std::vector<ItemIndex>{0, 2}, 3);
  return {mismatches == 0 && std::abs(hand - 0.91972) <= 1e-5,
          std::to_string(mismatches) + " mismatches in 300 metric values; hand case NDCG@3 = " + num(hand, 7)};
}

Outcome causality_suite() {
  std::mt19937_64 rng(4);
  int svae_bad = 0, mvae_bad = 0, predict_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const ModelConfig cfg = toy_config(static_cast<std::uint64_t>(trial));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
    SvaeModel svae(cfg, n);
    MvaeModel mvae(cfg, n);
    RvaeModel rvae(cfg, n, {0, 1, 2});

    const std::size_t len = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
    const auto seq = random_items(rng, len, n);
    const std::size_t t = std::uniform_int_distribution<std::size_t>(1, len - 1)(rng);
    auto shuffled = seq;
    std::shuffle(shuffled.begin() + static_cast<std::ptrdiff_t>(t), shuffled.end(), rng);
    const Tensor eps = standard_normal({len, 4}, rng);
    Tape ta, tb;
    const ParameterStore& sp = svae.params();
    const auto fa = svae.forward(Binder(ta, sp), seq, &eps);
    const auto fb = svae.forward(Binder(tb, sp), shuffled, &eps);
    for (std::size_t r = 0; r < t; ++r) {
      const bool same = std::ranges::equal(fa.q.mu.value().row(r), fb.q.mu.value().row(r)) &&
                        std::ranges::equal(fa.q.log_sigma.value().row(r), fb.q.log_sigma.value().row(r)) &&
                        std::ranges::equal(fa.z.value().row(r), fb.z.value().row(r)) &&
                        std::ranges::equal(fa.log_pi.value().row(r), fb.log_pi.value().row(r));
      if (!same) ++svae_bad;
    }

    const auto history = random_items(rng, std::uniform_int_distribution<std::size_t>(1, 8)(rng), n);
    auto permuted = history;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    const auto rm = predict_mvae(history, mvae, history);
    if (predict_mvae(permuted, mvae, permuted) != rm) ++mvae_bad;

    const auto rs = predict_svae(history, svae, history);
    const auto rr = predict_rvae(history, rvae, history);
    for (const auto* r : {&rs, &rm, &rr}) {
      if (!valid_prediction(*r, n, history)) ++predict_bad;
    }
  }
  return {svae_bad == 0 && mvae_bad == 0 && predict_bad == 0,
          "50 instances: " + std::to_string(svae_bad) + " svae steps changed, " + std::to_string(mvae_bad) +
              " mvae rankings changed, " + std::to_string(predict_bad) + " invalid predictions"};
}

Outcome cyclic_separation() {
  const auto start = Clock::now();
  const DatasetSplit split = cyclic_split();
  ModelConfig cfg = scaled_config();
  cfg.epochs = 20;
  const auto svae = train(ModelKind::svae, split, cfg);
  const auto mvae = train(ModelKind::mvae, split, cfg);
  const PopularityBaseline pop(split.train, split.catalog_size());
  const double s = evaluate(*svae.model, split.test).metric("NDCG@10");
  const double m = evaluate(*mvae.model, split.test).metric("NDCG@10");
  const double p = evaluate(pop, split.test).metric("NDCG@10");
  const double elapsed = seconds_since(start);
  return {s >= 0.8 && m < 0.3 && p < 0.3 && elapsed < 15 * 60,
          "test NDCG@10 svae " + num(s) + " (>= 0.8), mvae " + num(m) + " (< 0.3), pop " + num(p) + " (< 0.3)"};
}

Outcome next_k_sweep() {
  // Blocks of four chained b -> b+1. Training users have long histories so
  // their training windows are rarely truncated; held-out users are short, so
  // the fold-out is about one burst.
  const std::size_t blocks = 25;
  auto sequences = synthetic::burst(blocks, 500, 60, 100, 42);
  for (auto s : synthetic::burst(blocks, 200, 12, 20, 43)) {
    s.user_index += 500;
    sequences.push_back(std::move(s));
  }
  const DatasetSplit split = synthetic::make_split(std::move(sequences), 4 * blocks, 500, 100, 0.8);
  std::map<std::size_t, double> ndcg;
  std::string detail = "test NDCG@10";
  for (std::size_t k : {1, 2, 4, 8, 25}) {
    ModelConfig cfg = scaled_config();
    cfg.epochs = 10;
    cfg.kl_weight = 0.2;
    cfg.k_horizon = k;
    const auto result = train(ModelKind::svae, split, cfg);
    ndcg[k] = evaluate(*result.model, split.test).metric("NDCG@10");
    detail += " k=" + std::to_string(k) + ":" + num(ndcg[k]);
  }
  const double margin = std::min(ndcg[2], ndcg[4]) - ndcg[25];
  return {margin >= 0.05, detail + "; min(k=2,k=4) - k=25 = " + num(margin) + " (>= 0.05)"};
}

Outcome convergence() {
  const DatasetSplit split = cyclic_split();
  ModelConfig cfg = scaled_config();
  cfg.epochs = 10;
  const auto result = train(ModelKind::svae, split, cfg);
  double running = -1.0, worst_drop = 0.0;
  std::string curve;
  for (const auto& e : result.curve) {
    worst_drop = std::max(worst_drop, running - e.validation_ndcg100);
    running = std::max(running, e.validation_ndcg100);
    curve += (curve.empty() ? "" : ",") + num(e.validation_ndcg100, 3);
  }
  const double first = result.curve.front().train_loss, last = result.curve.back().train_loss;
  return {result.curve.size() == 10 && worst_drop <= 0.02 && last < first,
          "val NDCG@100 [" + curve + "], largest drop below running max " + num(worst_drop) + " (<= 0.02), loss " +
              num(first) + " -> " + num(last)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Learning curve without the wall-clock column.
std::string losses_only(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  if (status != 0) throw std::runtime_error("seqvae " + args.front() + " failed: " + err.str());
  return status;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "seqvae_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  cli({"synth", "--kind", "cyclic", "--out", (root / "ratings.csv").string(), "--items", "30", "--users", "120",
       "--length", "15", "--seed", "42"});
  const std::vector<std::string> model_flags{"--set", "item_embedding_dim=16", "--set", "gru_hidden=16",
                                             "--set", "latent_dim=8",          "--set", "encoder_widths=16,8",
                                             "--set", "decoder_widths=8,16",   "--set", "rvae_embedding_dim=16",
                                             "--set", "rvae_encoder_widths=16,8", "--seed", "7"};
  int differences = 0;
  std::vector<std::string> differing;
  for (const std::string run : {"a", "b"}) {
    const fs::path dir = root / run;
    cli({"prepare", "--input", (root / "ratings.csv").string(), "--out", (dir / "split").string(), "--seed", "7"});
    for (const std::string model : {"svae", "mvae", "rvae"}) {
      std::vector<std::string> args{"train", "--split", (dir / "split").string(), "--model", model, "--out",
                                    (dir / model).string(), "--epochs", "3"};
      args.insert(args.end(), model_flags.begin(), model_flags.end());
      cli(args);
      cli({"eval", "--split", (dir / "split").string(), "--checkpoint", (dir / model / "checkpoint").string(), "--out",
           (dir / model / "report.json").string()});
    }
  }
  auto compare = [&](const std::string& what, const std::string& x, const std::string& y) {
    if (x != y || x.empty()) {
      ++differences;
      differing.push_back(what);
    }
  };
  for (const char* f : {"train.tsv", "validation.tsv", "test.tsv", "vocabulary.tsv", "manifest.json"}) {
    compare(std::string("split/") + f, slurp(root / "a" / "split" / f), slurp(root / "b" / "split" / f));
  }
  for (const std::string model : {"svae", "mvae", "rvae"}) {
    compare(model + " losses", losses_only(slurp(root / "a" / model / "learning_curve.csv")),
            losses_only(slurp(root / "b" / model / "learning_curve.csv")));
    compare(model + " report", slurp(root / "a" / model / "report.json"), slurp(root / "b" / model / "report.json"));
    compare(model + " weights", slurp(root / "a" / model / "checkpoint" / "model.bin"),
            slurp(root / "b" / model / "checkpoint" / "model.bin"));
  }
  std::string detail = "split files, loss trajectories, reports and weights for svae/mvae/rvae: ";
  if (differences == 0) {
    detail += "all identical";
  } else {
    for (const auto& d : differing) detail += d + " ";
  }
  return {differences == 0, detail};
}

Outcome movielens(const char* path) {
  const fs::path root = fs::temp_directory_path() / "seqvae_acceptance_ml1m";
  fs::remove_all(root);
  cli({"prepare", "--input", path, "--out", (root / "split").string(), "--set", "delimiter=::", "--set",
       "subsample_users=1000"});
  std::map<std::string, double> ndcg;
  for (const std::string model : {"svae", "mvae"}) {
    cli({"train", "--split", (root / "split").string(), "--model", model, "--out", (root / model).string()});
    cli({"eval", "--split", (root / "split").string(), "--checkpoint", (root / model / "checkpoint").string(), "--out",
         (root / model / "report.json").string()});
  }
  cli({"eval", "--split", (root / "split").string(), "--pop", "--out", (root / "pop.json").string()});
  for (const std::string name : {"svae", "mvae", "pop"}) {
    const auto json = nlohmann::json::parse(slurp(name == "pop" ? root / "pop.json" : root / name / "report.json"));
    ndcg[name] = json["metrics"]["NDCG@100"].get<double>();
  }
  return {ndcg["svae"] >= ndcg["mvae"] && ndcg["mvae"] >= ndcg["pop"],
          "NDCG@100 svae " + num(ndcg["svae"]) + ", mvae " + num(ndcg["mvae"]) + ", pop " + num(ndcg["pop"])};
}

}  // namespace

int main() {
  report(1, "gradient fidelity", gradient_fidelity);
  report(2, "KL oracle", kl_oracle);
  report(3, "metric oracle", metric_oracle);
  report(4, "causality suite", causality_suite);
  report(5, "synthetic-sequence separation", cyclic_separation);
  report(6, "next-k sweep shape", next_k_sweep);
  report(7, "convergence behavior", convergence);
  report(8, "determinism", determinism);
  if (const char* path = std::getenv("SEQVAE_ML1M_RATINGS")) {
    report(9, "MovieLens-1M ordering", [path] { return movielens(path); });
  } else {
    std::printf("SKIP 9 MovieLens-1M ordering: set SEQVAE_ML1M_RATINGS to the ratings.dat path to run\n");
  }
  return failures == 0 ? 0 : 1;
}
