// Support-set parameter estimation: label append, stacked dense layers, and
// the sum reduction that yields {w, beta}. Hand oracles are worked by plain
// arithmetic in the comments.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/estimator.hpp"
#include "gazescore/grad_check.hpp"
#include "gazescore/rng.hpp"
#include "gazescore/tape.hpp"
#include "gazescore/tensor.hpp"

using namespace gazescore;

namespace {

std::vector<double> to_vec(std::span<const double> s) {
  return {s.begin(), s.end()};
}

// Two hand-specified 2x2 layers used across cases (side = h+1 = 2):
//   layer 1: W=[[1,2],[0,1]],  b=[0.5,-0.25]
//   layer 2: W=[[0,1],[1,-1]], b=[0,-3]
StackedNetWeights hand_net() {
  StackedNetWeights net;
  net.weights.push_back(Tensor::matrix(2, 2, {1, 2, 0, 1}));
  net.biases.push_back(Tensor::vector({0.5, -0.25}));
  net.weights.push_back(Tensor::matrix(2, 2, {0, 1, 1, -1}));
  net.biases.push_back(Tensor::vector({0, -3}));
  return net;
}

}  // namespace

TEST_CASE("append_label places the score last", "[estimator]") {
  Tape tape;
  Var z = tape.leaf(Tensor::vector({0.1, 0.2}));
  Var v = append_label(tape, z, 0.5);
  CHECK(to_vec(tape.values(v)) == std::vector<double>{0.1, 0.2, 0.5});

  Var zero = tape.leaf(Tensor::vector({0.0, 0.0}));
  CHECK(to_vec(tape.values(append_label(tape, zero, 0.0))) ==
        std::vector<double>{0, 0, 0});

  Var z2 = tape.leaf(Tensor::vector({-0.3}));
  const double y = 0.6250000000000001;
  Var out = append_label(tape, z2, y);
  CHECK(tape.values(out)[1] == y);
}

TEST_CASE("stacked_forward applies affine + ReLU L times", "[estimator]") {
  SECTION("identity layers fix nonnegative vectors") {
    StackedNetWeights net;
    for (int l = 0; l < 3; ++l) {
      net.weights.push_back(Tensor::matrix(2, 2, {1, 0, 0, 1}));
      net.biases.push_back(Tensor::vector({0, 0}));
    }
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, net);
    Var v = tape.leaf(Tensor::vector({0.7, 0.0}));
    CHECK(to_vec(tape.values(stacked_forward(tape, nv, v))) ==
          std::vector<double>{0.7, 0.0});
  }
  SECTION("zero layers annihilate") {
    StackedNetWeights net;
    net.weights.push_back(Tensor::matrix(2, 2, {0, 0, 0, 0}));
    net.biases.push_back(Tensor::vector({0, 0}));
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, net);
    Var v = tape.leaf(Tensor::vector({3.1, -4.6}));
    CHECK(to_vec(tape.values(stacked_forward(tape, nv, v))) ==
          std::vector<double>{0, 0});
  }
  SECTION("hand-evaluated two-layer case") {
    // v=[1,0.5]: layer1 affine -> [1+1+0.5, 0.5-0.25] = [2.5, 0.25],
    // ReLU keeps both; layer2 affine -> [0.25, 2.5-0.25-3] = [0.25, -0.75],
    // ReLU -> [0.25, 0].
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    Var v = tape.leaf(Tensor::vector({1.0, 0.5}));
    CHECK(to_vec(tape.values(stacked_forward(tape, nv, v))) ==
          std::vector<double>{0.25, 0.0});
  }
  SECTION("wrong input width is rejected") {
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    Var v = tape.leaf(Tensor::vector({1.0, 0.5, 0.2}));
    CHECK_THROWS_AS(stacked_forward(tape, nv, v), dimension_error);
  }
}

TEST_CASE("estimate_params reduces support outputs by summation",
          "[estimator]") {
  SECTION("single pair splits the stacked output at position h") {
    // From the hand case above: z=[1], y=0.5 -> [0.25, 0] -> w=[0.25], b=0.
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    std::vector<Var> zs{tape.leaf(Tensor::vector({1.0}))};
    std::vector<double> ys{0.5};
    RegressionParamVars p = estimate_params(tape, nv, zs, ys);
    CHECK(to_vec(tape.values(p.w)) == std::vector<double>{0.25});
    CHECK(tape.scalar_value(p.beta) == 0.0);
  }
  SECTION("two pairs sum elementwise") {
    // Second pair z=[0], y=1 -> v=[0,1]: layer1 -> [2.5, 0.75] (ReLU keeps),
    // layer2 -> [0.75, 2.5-0.75-3] = [0.75, -1.25] -> ReLU [0.75, 0].
    // Sum with [0.25, 0] gives u=[1.0, 0] -> w=[1.0], beta=0.
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    std::vector<Var> zs{tape.leaf(Tensor::vector({1.0})),
                        tape.leaf(Tensor::vector({0.0}))};
    std::vector<double> ys{0.5, 1.0};
    RegressionParamVars p = estimate_params(tape, nv, zs, ys);
    CHECK(to_vec(tape.values(p.w)) == std::vector<double>{1.0});
    CHECK(tape.scalar_value(p.beta) == 0.0);
  }
  SECTION("zero net weights produce w=0, beta=0") {
    StackedNetWeights net;
    net.weights.push_back(Tensor::matrix(3, 3, std::vector<double>(9, 0.0)));
    net.biases.push_back(Tensor::vector({0, 0, 0}));
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, net);
    std::vector<Var> zs{tape.leaf(Tensor::vector({0.4, -0.6}))};
    std::vector<double> ys{0.9};
    RegressionParamVars p = estimate_params(tape, nv, zs, ys);
    CHECK(to_vec(tape.values(p.w)) == std::vector<double>{0, 0});
    CHECK(tape.scalar_value(p.beta) == 0.0);
  }
  SECTION("empty support is rejected") {
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    CHECK_THROWS_AS(
        estimate_params(tape, nv, std::vector<Var>{}, std::vector<double>{}),
        value_error);
  }
  SECTION("support/label count mismatch is rejected") {
    Tape tape;
    StackedNetVars nv = load_stacked_weights(tape, hand_net());
    std::vector<Var> zs{tape.leaf(Tensor::vector({1.0}))};
    std::vector<double> ys{0.5, 0.25};
    CHECK_THROWS_AS(estimate_params(tape, nv, zs, ys), value_error);
  }
}

TEST_CASE("estimate_params is permutation invariant", "[estimator][property]") {
  Rng rng(161803);
  const std::size_t h = 3, support = 4;
  for (int trial = 0; trial < 10; ++trial) {
    StackedNetWeights net = init_stacked_weights(h, 3, rng.next_u64());
    std::vector<std::vector<double>> zs;
    std::vector<double> ys;
    for (std::size_t s = 0; s < support; ++s) {
      zs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      ys.push_back(rng.uniform01());
    }
    auto run = [&](const std::vector<std::size_t>& order) {
      Tape tape;
      StackedNetVars nv = load_stacked_weights(tape, net);
      std::vector<Var> zvars;
      std::vector<double> labels;
      for (std::size_t idx : order) {
        zvars.push_back(tape.leaf(Tensor::vector(zs[idx])));
        labels.push_back(ys[idx]);
      }
      RegressionParamVars p = estimate_params(tape, nv, zvars, labels);
      std::vector<double> flat = to_vec(tape.values(p.w));
      flat.push_back(tape.scalar_value(p.beta));
      return flat;
    };
    std::vector<std::size_t> order(support);
    std::iota(order.begin(), order.end(), 0);
    const auto base = run(order);
    for (int perm = 0; perm < 5; ++perm) {
      rng.shuffle(order);
      const auto other = run(order);
      REQUIRE(base.size() == other.size());
      for (std::size_t i = 0; i < base.size(); ++i) {
        REQUIRE(std::abs(base[i] - other[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("stacked initialization is deterministic, square, and bounded",
          "[estimator]") {
  StackedNetWeights a = init_stacked_weights(8, 4, 99);
  StackedNetWeights b = init_stacked_weights(8, 4, 99);
  REQUIRE(a.weights.size() == 4);
  REQUIRE(a.biases.size() == 4);
  CHECK(a.weights[0].dim(0) == 9);
  CHECK(a.weights[0].dim(1) == 9);
  CHECK(a.biases[3].dim(0) == 9);
  CHECK(a.weights[2].data()[5] == b.weights[2].data()[5]);

  const double bound = 1.0 / std::sqrt(9.0);
  for (std::size_t l = 0; l < 4; ++l) {
    for (double v : a.weights[l].data()) {
      REQUIRE(v >= -bound);
      REQUIRE(v <= bound);
    }
    for (double v : a.biases[l].data()) {
      REQUIRE(v >= -bound);
      REQUIRE(v <= bound);
    }
  }
}

TEST_CASE("estimator gradients pass the finite-difference check",
          "[estimator][grad]") {
  const std::size_t h = 2, L = 2, side = h + 1, support = 3;
  Rng rng(424243);
  std::vector<std::vector<double>> zs;
  std::vector<double> ys;
  for (std::size_t s = 0; s < support; ++s) {
    zs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    ys.push_back(rng.uniform01());
  }
  // Parameters: L layers, then the support embeddings themselves.
  std::vector<double> params;
  for (std::size_t i = 0; i < L * (side * side + side); ++i) {
    params.push_back(rng.uniform(-0.7, 0.7));
  }
  for (const auto& z : zs) params.insert(params.end(), z.begin(), z.end());

  LossBuilder builder = [&](Tape& tape, std::span<const double> p) {
    std::size_t at = 0;
    StackedNetVars nv;
    std::vector<Var> leaves;
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> wd(p.begin() + at, p.begin() + at + side * side);
      at += side * side;
      Var w = tape.leaf(Tensor::matrix(side, side, std::move(wd)));
      std::vector<double> bd(p.begin() + at, p.begin() + at + side);
      at += side;
      Var b = tape.leaf(Tensor::vector(std::move(bd)));
      nv.weights.push_back(w);
      nv.biases.push_back(b);
      leaves.push_back(w);
      leaves.push_back(b);
    }
    std::vector<Var> zvars;
    for (std::size_t s = 0; s < support; ++s) {
      std::vector<double> zd(p.begin() + at, p.begin() + at + h);
      at += h;
      Var z = tape.leaf(Tensor::vector(std::move(zd)));
      zvars.push_back(z);
      leaves.push_back(z);
    }
    RegressionParamVars rp = estimate_params(tape, nv, zvars, ys);
    Var loss = tape.add(tape.dot(rp.w, rp.w), tape.square(rp.beta));
    return BuiltLoss{loss, leaves};
  };

  CHECK(grad_check(builder, params, 1e-6) < 1e-4);
}
