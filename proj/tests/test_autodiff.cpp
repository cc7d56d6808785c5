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

#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "seqvae/autodiff.hpp"
#include "seqvae/errors.hpp"
#include "seqvae/parameters.hpp"
#include "test_support.hpp"

using namespace seqvae;
using seqvae::testing::random_dim;
using seqvae::testing::random_tensor;

namespace {

ad::GruWeights gru_from(ParameterStore& s, Tape& t) {
  return {s.on(t, "wr"), s.on(t, "ur"), s.on(t, "br"), s.on(t, "wu"), s.on(t, "uu"),
          s.on(t, "bu"), s.on(t, "wc"), s.on(t, "uc"), s.on(t, "bc")};
}

void add_gru(ParameterStore& s, std::size_t in, std::size_t hid, std::mt19937_64& rng, double scale) {
  for (const char* g : {"r", "u", "c"}) {
    s.add(std::string("w") + g, random_tensor({in, hid}, rng, -scale, scale));
    s.add(std::string("u") + g, random_tensor({hid, hid}, rng, -scale, scale));
    s.add(std::string("b") + g, random_tensor({hid}, rng, -scale, scale));
  }
}

// Contracts the output with a fixed random tensor so every output entry
// contributes a distinct weight to the scalar loss.
Var contract(Tape& tape, Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ad::sum(ad::mul(out, tape.constant(random_tensor(out.shape(), rng))));
}

}  // namespace

TEST_CASE("linear examples") {
  Tape tape;
  SUBCASE("identity weight") {
    Var y = ad::linear(tape.constant(Tensor::matrix(1, 2, {1, 2})), tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1})),
                       tape.constant(Tensor::vector({0, 0})));
    CHECK(y.value().data == std::vector<double>{1, 2});
  }
  SUBCASE("hand multiply") {
    Var y = ad::linear(tape.constant(Tensor::matrix(1, 2, {1, 1})), tape.constant(Tensor::matrix(2, 1, {2, 3})),
                       tape.constant(Tensor::vector({1})));
    CHECK(y.value().data == std::vector<double>{6});
  }
  SUBCASE("zero input passes the bias") {
    Var y = ad::linear(tape.constant(Tensor::matrix(1, 2, {0, 0})), tape.constant(Tensor::matrix(2, 2, {4, -1, 7, 2})),
                       tape.constant(Tensor::vector({5, 5})));
    CHECK(y.value().data == std::vector<double>{5, 5});
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      ad::linear(tape.constant(Tensor::matrix(1, 3, {1, 2, 3})), tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1})),
                 tape.constant(Tensor::vector({0, 0})));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[1, 3]") != std::string::npos);
      CHECK(msg.find("[2, 2]") != std::string::npos);
    }
  }
}

TEST_CASE("gru_cell examples") {
  std::mt19937_64 rng(3);
  ParameterStore s;
  add_gru(s, 3, 4, rng, 0.0);
  Tape tape;
  const auto w = gru_from(s, tape);

  SUBCASE("zero parameters halve the state") {
    const Tensor h = random_tensor({1, 4}, rng);
    Var out = ad::gru_cell(tape.constant(random_tensor({1, 3}, rng)), tape.constant(h), w);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out.value().data[i] == 0.5 * h.data[i]);
  }
  SUBCASE("all zero gives zero") {
    Var out = ad::gru_cell(tape.constant(Tensor({1, 3})), tape.constant(Tensor({1, 4})), w);
    for (double v : out.value().data) CHECK(v == 0.0);
  }
  SUBCASE("saturated update gate passes the candidate") {
    std::fill(s.get("bu").data.begin(), s.get("bu").data.end(), -50.0);
    s.get("bc").data = {0.7, -0.3, 0.0, 1.5};
    Tape t2;
    Var out = ad::gru_cell(t2.constant(Tensor({1, 3})), t2.constant(Tensor({1, 4})), gru_from(s, t2));
    for (std::size_t i = 0; i < 4; ++i) {
      const double u = 1.0 / (1.0 + std::exp(50.0));
      const double c = std::tanh(s.get("bc").data[i]);
      CHECK(out.value().data[i] == doctest::Approx((1.0 - u) * c).epsilon(1e-15));
      CHECK(out.value().data[i] == doctest::Approx(c).epsilon(1e-12));
    }
  }
  SUBCASE("hidden width mismatch") {
    CHECK_THROWS_AS(ad::gru_cell(tape.constant(Tensor({1, 3})), tape.constant(Tensor({1, 5})), w), DimensionError);
  }
}

TEST_CASE("log_softmax examples") {
  Tape tape;
  SUBCASE("uniform") {
    Var y = ad::log_softmax(tape.constant(Tensor::matrix(1, 4, {2, 2, 2, 2})));
    for (double v : y.value().data) CHECK(v == doctest::Approx(-std::log(4.0)).epsilon(1e-15));
  }
  SUBCASE("large spread against a 600-digit oracle") {
    using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<600>>;
    Var y = ad::log_softmax(tape.constant(Tensor::matrix(1, 2, {0, 1000})));
    const Big lse = log(exp(Big(0)) + exp(Big(1000)));
    const double expect0 = static_cast<double>(Big(0) - lse);
    const double expect1 = static_cast<double>(Big(1000) - lse);
    CHECK(std::isfinite(y.value().data[0]));
    CHECK(y.value().data[0] == doctest::Approx(expect0).epsilon(1e-15));
    CHECK(std::abs(y.value().data[1] - expect1) < 1e-300);
  }
  SUBCASE("single category") {
    Var y = ad::log_softmax(tape.constant(Tensor::matrix(1, 1, {3.7})));
    CHECK(y.value().data[0] == 0.0);
  }
}

TEST_CASE("embedding examples") {
  std::mt19937_64 rng(5);
  ParameterStore s;
  s.add("table", random_tensor({4, 3}, rng));
  SUBCASE("single row") {
    Tape tape;
    const std::size_t ids[] = {2};
    Var y = ad::embedding(s.on(tape, "table"), ids);
    CHECK(y.value().data == std::vector<double>(s.get("table").data.begin() + 6, s.get("table").data.begin() + 9));
  }
  SUBCASE("repeated id accumulates twice") {
    s.zero_grad();
    Tape tape;
    const std::size_t ids[] = {1, 1};
    Var y = ad::embedding(s.on(tape, "table"), ids);
    CHECK(y.value().row(0)[0] == y.value().row(1)[0]);
    tape.backward(ad::sum(y));
    const auto& g = s.get("table").grad;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(g[3 + j] == 2.0);
      CHECK(g[j] == 0.0);
    }
    CHECK(gradient_check(
              [](Tape& t, ParameterStore& st) {
                const std::size_t rep[] = {1, 1};
                return contract(t, ad::embedding(st.on(t, "table"), rep), 9);
              },
              s) < 1e-7);
  }
  SUBCASE("empty ids") {
    Tape tape;
    Var y = ad::embedding(s.on(tape, "table"), {});
    CHECK(y.shape() == Shape{0, 3});
  }
  SUBCASE("out of range") {
    Tape tape;
    const std::size_t ids[] = {4};
    CHECK_THROWS_AS(ad::embedding(s.on(tape, "table"), ids), IndexError);
  }
}

TEST_CASE("backward examples") {
  SUBCASE("w squared") {
    ParameterStore s;
    s.add("w", Tensor::scalar(3.0));
    s.zero_grad();
    Tape tape;
    Var w = s.on(tape, "w");
    tape.backward(ad::mul(w, w));
    CHECK(s.get("w").grad[0] == 6.0);
  }
  SUBCASE("sum of linear gives ones on the bias") {
    std::mt19937_64 rng(1);
    ParameterStore s;
    s.add("W", random_tensor({3, 2}, rng));
    s.add("b", random_tensor({2}, rng));
    const Tensor x = random_tensor({1, 3}, rng);
    auto loss = [&](Tape& t, ParameterStore& st) { return ad::sum(ad::linear(t.constant(x), st.on(t, "W"), st.on(t, "b"))); };
    s.zero_grad();
    Tape tape;
    tape.backward(loss(tape, s));
    for (double g : s.get("b").grad) CHECK(g == 1.0);
    CHECK(gradient_check(loss, s) < 1e-7);
  }
  SUBCASE("detached parameter has zero grad") {
    ParameterStore s;
    s.add("p", Tensor::vector({1.0, 2.0}));
    s.add("q", Tensor::scalar(4.0));
    s.zero_grad();
    Tape tape;
    Var q = s.on(tape, "q");
    s.on(tape, "p");
    tape.backward(ad::mul(q, q));
    CHECK(s.get("p").grad == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("non-scalar loss") {
    Tape tape;
    Var v = tape.constant(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(tape.backward(v), ContractError);
  }
}

TEST_CASE("adam_step examples") {
  AdamOptions opt;
  opt.learning_rate = 1e-3;
  SUBCASE("first step matches the closed form") {
    ParameterStore s;
    s.add("theta", Tensor::scalar(0.25));
    s.zero_grad();
    s.get("theta").grad[0] = 0.5;
    s.adam_step(opt);
    const double delta = s.get("theta").data[0] - 0.25;
    CHECK(std::abs(delta + opt.learning_rate * 0.5 / (0.5 + opt.eps)) < 1e-9);
    CHECK(s.step_count() == 1);
    CHECK(s.get("theta").grad[0] == 0.0);
  }
  SUBCASE("zero gradient leaves the parameter") {
    ParameterStore s;
    s.add("theta", Tensor::scalar(0.25));
    s.zero_grad();
    s.adam_step(opt);
    CHECK(s.get("theta").data[0] == 0.25);
  }
  SUBCASE("weight decay acts as a gradient") {
    ParameterStore s;
    s.add("theta", Tensor::scalar(1.0));
    s.zero_grad();
    opt.weight_decay = 0.01;
    s.adam_step(opt);
    CHECK(s.get("theta").data[0] < 1.0);
  }
  SUBCASE("missing gradient") {
    ParameterStore s;
    s.add("theta", Tensor::scalar(1.0));
    CHECK_THROWS_AS(s.adam_step(opt), ContractError);
  }
  SUBCASE("step counter is shared") {
    ParameterStore s;
    s.add("a", Tensor::scalar(1.0));
    s.add("b", Tensor::vector({1.0, 2.0}));
    s.zero_grad();
    s.adam_step(opt);
    s.adam_step(opt);
    CHECK(s.step_count() == 2);
  }
}

TEST_CASE("parameter names are unique") {
  ParameterStore s;
  s.add("a", Tensor::scalar(1.0));
  CHECK_THROWS_AS(s.add("a", Tensor::scalar(2.0)), ContractError);
}

TEST_CASE("gradient_check examples") {
  SUBCASE("quadratic") {
    ParameterStore s;
    s.add("w", Tensor::vector({0.3, -1.2, 2.0}));
    auto loss = [](Tape& t, ParameterStore& st) {
      Var w = st.on(t, "w");
      return ad::sum(ad::mul(w, w));
    };
    CHECK(gradient_check(loss, s) < 1e-7);
  }
  SUBCASE("zero-parameter model") {
    ParameterStore s;
    s.add("w", Tensor::vector({0.0, 0.0}));
    auto loss = [](Tape& t, ParameterStore& st) {
      Var w = st.on(t, "w");
      return ad::affine(ad::sum(ad::mul(w, t.constant(Tensor::vector({0.0, 0.0})))), 1.0, 2.0);
    };
    CHECK(gradient_check(loss, s) == 0.0);
  }
}

// Every primitive against central finite differences on random shapes.
TEST_CASE("primitive gradients match finite differences") {
  std::mt19937_64 rng(2024);
  const double tol = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = random_dim(rng), k = random_dim(rng), n = random_dim(rng);
    const std::uint64_t cseed = rng();
    ParameterStore s;
    s.add("a", random_tensor({m, k}, rng));
    s.add("b", random_tensor({k, n}, rng));
    s.add("c", random_tensor({m, k}, rng));
    s.add("bias", random_tensor({n}, rng));
    std::vector<std::pair<std::string, LossClosure>> cases{
        {"matmul", [&](Tape& t, ParameterStore& st) { return contract(t, ad::matmul(st.on(t, "a"), st.on(t, "b")), cseed); }},
        {"linear",
         [&](Tape& t, ParameterStore& st) {
           return contract(t, ad::linear(st.on(t, "a"), st.on(t, "b"), st.on(t, "bias")), cseed);
         }},
        {"add", [&](Tape& t, ParameterStore& st) { return contract(t, ad::add(st.on(t, "a"), st.on(t, "c")), cseed); }},
        {"sub", [&](Tape& t, ParameterStore& st) { return contract(t, ad::sub(st.on(t, "a"), st.on(t, "c")), cseed); }},
        {"mul", [&](Tape& t, ParameterStore& st) { return contract(t, ad::mul(st.on(t, "a"), st.on(t, "c")), cseed); }},
        {"affine", [&](Tape& t, ParameterStore& st) { return contract(t, ad::affine(st.on(t, "a"), -1.7, 0.4), cseed); }},
        {"sigmoid", [&](Tape& t, ParameterStore& st) { return contract(t, ad::sigmoid(st.on(t, "a")), cseed); }},
        {"tanh", [&](Tape& t, ParameterStore& st) { return contract(t, ad::tanh(st.on(t, "a")), cseed); }},
        {"exp", [&](Tape& t, ParameterStore& st) { return contract(t, ad::exp(st.on(t, "a")), cseed); }},
        {"log_sigmoid", [&](Tape& t, ParameterStore& st) { return contract(t, ad::log_sigmoid(st.on(t, "a")), cseed); }},
        {"log_softmax", [&](Tape& t, ParameterStore& st) { return contract(t, ad::log_softmax(st.on(t, "a")), cseed); }},
        {"row", [&](Tape& t, ParameterStore& st) { return contract(t, ad::row(st.on(t, "a"), m - 1), cseed); }},
        {"stack_rows",
         [&](Tape& t, ParameterStore& st) {
           Var a = st.on(t, "a");
           const Var rows[] = {ad::row(a, 0), ad::row(st.on(t, "c"), m - 1), ad::row(a, 0)};
           return contract(t, ad::stack_rows(rows), cseed);
         }},
        {"concat_cols",
         [&](Tape& t, ParameterStore& st) { return contract(t, ad::concat_cols(st.on(t, "a"), st.on(t, "c")), cseed); }},
        {"mean", [&](Tape& t, ParameterStore& st) { return ad::mean(ad::mul(st.on(t, "a"), st.on(t, "c"))); }},
        {"gather",
         [&](Tape& t, ParameterStore& st) {
           const std::pair<std::size_t, std::size_t> cells[] = {{0, 0}, {m - 1, k - 1}, {0, 0}};
           return contract(t, ad::gather(st.on(t, "a"), cells), cseed);
         }},
        {"segment_logsumexp",
         [&](Tape& t, ParameterStore& st) {
           std::vector<std::pair<std::size_t, std::size_t>> cells;
           for (std::size_t i = 0; i < m; ++i)
             for (std::size_t j = 0; j < k; ++j) cells.emplace_back(i, j);
           std::vector<std::size_t> sizes(m, k);
           return contract(t, ad::segment_logsumexp(ad::gather(st.on(t, "a"), cells), sizes), cseed);
         }},
        {"reparameterize",
         [&](Tape& t, ParameterStore& st) {
           std::mt19937_64 r2(cseed);
           return contract(t, ad::reparameterize(st.on(t, "a"), st.on(t, "c"), t.constant(random_tensor({m, k}, r2))),
                           cseed + 1);
         }},
        {"kl_standard_normal", [&](Tape& t, ParameterStore& st) { return ad::kl_standard_normal(st.on(t, "a"), st.on(t, "c")); }},
    };
    for (auto& [name, loss] : cases) {
      INFO("primitive " << name << " trial " << trial);
      CHECK(gradient_check(loss, s) < tol);
    }

    ParameterStore e;
    e.add("table", random_tensor({n, k}, rng));
    std::vector<std::size_t> ids(m);
    for (auto& id : ids) id = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    INFO("embedding trial " << trial);
    CHECK(gradient_check([&](Tape& t, ParameterStore& st) { return contract(t, ad::embedding(st.on(t, "table"), ids), cseed); },
                         e) < tol);

    ParameterStore g;
    add_gru(g, k, n, rng, 0.8);
    g.add("x", random_tensor({m, k}, rng));
    g.add("h", random_tensor({m, n}, rng));
    INFO("gru trial " << trial);
    CHECK(gradient_check(
              [&](Tape& t, ParameterStore& st) {
                return contract(t, ad::gru_cell(st.on(t, "x"), st.on(t, "h"), gru_from(st, t)), cseed);
              },
              g) < tol);
  }
}

TEST_CASE("log_softmax rows sum to one") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = random_dim(rng), cols = random_dim(rng, 1, 50);
    Tape tape;
    Var y = ad::log_softmax(tape.constant(random_tensor({rows, cols}, rng, -300.0, 300.0)));
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (double v : y.value().row(r)) s += std::exp(v);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    CHECK(y.value().all_finite());
  }
}

TEST_CASE("backward replay is deterministic") {
  std::mt19937_64 rng(13);
  ParameterStore s;
  add_gru(s, 3, 5, rng, 0.5);
  s.add("x", random_tensor({2, 3}, rng));
  Tape tape;
  Var h = tape.constant(Tensor({2, 5}));
  for (int t = 0; t < 3; ++t) h = ad::gru_cell(s.on(tape, "x"), h, gru_from(s, tape));
  Var loss = ad::sum(ad::log_softmax(h));
  s.zero_grad();
  tape.backward(loss);
  std::vector<std::vector<double>> first;
  for (const auto& name : s.names()) first.push_back(s.get(name).grad);
  s.zero_grad();
  tape.backward(loss);
  for (std::size_t i = 0; i < s.names().size(); ++i) CHECK(s.get(s.names()[i]).grad == first[i]);
}

TEST_CASE("embedding backward conserves gradient mass") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = random_dim(rng), d = random_dim(rng), len = random_dim(rng, 0, 10);
    ParameterStore s;
    s.add("table", random_tensor({n, d}, rng));
    s.zero_grad();
    std::vector<std::size_t> ids(len);
    for (auto& id : ids) id = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const Tensor upstream = random_tensor({len, d}, rng);
    Tape tape;
    Var y = ad::embedding(s.on(tape, "table"), ids);
    tape.backward(ad::sum(ad::mul(y, tape.constant(upstream))));
    for (std::size_t j = 0; j < d; ++j) {
      double scattered = 0.0, incoming = 0.0;
      for (std::size_t r = 0; r < n; ++r) scattered += s.get("table").grad[r * d + j];
      for (std::size_t r = 0; r < len; ++r) incoming += upstream.data[r * d + j];
      CHECK(scattered == doctest::Approx(incoming).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-parameter GRU halves any state") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t in = random_dim(rng), hid = random_dim(rng), batch = random_dim(rng);
    ParameterStore s;
    add_gru(s, in, hid, rng, 0.0);
    Tape tape;
    const Tensor h = random_tensor({batch, hid}, rng, -5.0, 5.0);
    Var out = ad::gru_cell(tape.constant(random_tensor({batch, in}, rng)), tape.constant(h), gru_from(s, tape));
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(out.value().data[i] == 0.5 * h.data[i]);
  }
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), DimensionError);
  Tensor t({2, 2});
  CHECK_FALSE(t.has_grad());
  t.zero_grad();
  CHECK(t.grad.size() == t.data.size());
}
