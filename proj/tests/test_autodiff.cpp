// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "mcmg/ad/adam.hpp"
#include "mcmg/ad/checkpoint.hpp"
#include "mcmg/ad/gradcheck.hpp"
#include "mcmg/ad/ops.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/selftest/selftest.hpp"

using namespace mcmg;
using ad::Tensor;
using ad::Var;

TEST_SUITE("autodiff") {
  TEST_CASE("every op matches central differences") {
    for (const auto& c : selftest::op_cases()) {
      CAPTURE(c.name);
      ad::ParamStore params;
      c.init(params);
      const ad::GradCheck g = ad::check_gradients(c.fn, params, selftest::kGradEpsilon);
      CHECK(g.checked > 0);
      CHECK(g.max_relative_error < selftest::kGradTolerance);
    }
  }

  TEST_CASE("matmul and softmax forward values") {
    ad::Tape tape;
    const Var a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
    const Var b = tape.constant(Tensor::matrix({{5, 6}, {7, 8}}));
    CHECK(ad::matmul(a, b).value() == Tensor::matrix({{19, 22}, {43, 50}}));
    CHECK(ad::matmul(a, b, true).value() == Tensor::matrix({{17, 23}, {39, 53}}));

    const Var s = ad::softmax(tape.constant(Tensor::row({0.0, std::log(2.0)})));
    CHECK(s.value()[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(s.value()[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));

    const std::vector<std::uint8_t> mask = {0, 1, 0};
    const Var m = ad::softmax(
        ad::masked_fill(tape.constant(Tensor::row({1.0, 50.0, 1.0})), mask, -std::numeric_limits<double>::infinity()));
    CHECK(m.value()[0] == doctest::Approx(0.5));
    CHECK(m.value()[1] == 0.0);
  }

  TEST_CASE("softmax of a fully masked row is zero") {
    ad::Tape tape;
    const std::vector<std::uint8_t> mask = {1, 1};
    const Var m = ad::softmax(
        ad::masked_fill(tape.constant(Tensor::row({1.0, 2.0})), mask, -std::numeric_limits<double>::infinity()));
    CHECK(m.value() == Tensor::row({0.0, 0.0}));
  }

  TEST_CASE("relu, dropout and reductions") {
    ad::Tape tape;
    const Var x = tape.constant(Tensor::row({-1.0, 0.5, 2.0, -3.0}));
    CHECK(ad::relu(x).value() == Tensor::row({0.0, 0.5, 2.0, 0.0}));
    CHECK(ad::sum(x).value()[0] == doctest::Approx(-1.5));
    CHECK(ad::mean(x).value()[0] == doctest::Approx(-0.375));

    Rng rng(1);
    CHECK(ad::dropout(x, 0.5, false, rng).value() == x.value());
    CHECK(ad::dropout(x, 0.0, true, rng).value() == x.value());
    const Tensor big(ad::Shape{10000}, 1.0);
    const Tensor d = ad::dropout(tape.constant(big), 0.3, true, rng).value();
    std::size_t kept = 0;
    for (double v : d.values()) {
      CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.7)));
      kept += v != 0.0;
    }
    CHECK(kept == doctest::Approx(7000).epsilon(0.03));
  }

  TEST_CASE("binary cross entropy of two uniform classes") {
    ad::Tape tape;
    const std::vector<std::size_t> target = {0};
    const Var p = tape.constant(Tensor::row({0.5, 0.5}));
    CHECK(ad::binary_cross_entropy(p, target).value()[0] == doctest::Approx(2.0 * std::log(2.0)));
    CHECK(ad::categorical_cross_entropy(p, target).value()[0] == doctest::Approx(std::log(2.0)));
    const Var z = tape.constant(Tensor::row({0.0, 0.0}));
    CHECK(ad::softmax_binary_cross_entropy(z, target).value()[0] == doctest::Approx(1.386294361));
    CHECK(ad::softmax_cross_entropy(z, target).value()[0] == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("logit losses agree with the probability losses") {
    Rng rng(3);
    const Tensor x = ad::uniform_init({6, 7}, -3.0, 3.0, rng);
    const std::vector<std::size_t> targets = {0, 6, 3, 3, 1, 5};
    ad::Tape tape;
    const Var logits = tape.constant(x);
    const Var probs = ad::softmax(logits);
    const Tensor a = ad::softmax_binary_cross_entropy(logits, targets).value();
    const Tensor b = ad::binary_cross_entropy(probs, targets).value();
    const Tensor c = ad::softmax_cross_entropy(logits, targets).value();
    const Tensor d = ad::categorical_cross_entropy(probs, targets).value();
    CHECK(ad::max_abs_diff(a, b) < 1e-12);
    CHECK(ad::max_abs_diff(c, d) < 1e-12);
  }

  TEST_CASE("saturated logits keep a finite loss and gradient") {
    ad::ParamStore params;
    params.add("x", Tensor::row({200.0, 0.0, -50.0}));
    ad::Tape tape;
    const std::vector<std::size_t> target = {1};
    const Var loss = ad::softmax_binary_cross_entropy(tape.param(params.at("x")), target);
    CHECK(std::isfinite(loss.value()[0]));
    CHECK(loss.value()[0] > 200.0);
    tape.backward(loss);
    CHECK(params.at("x").grad.all_finite());
    CHECK(params.at("x").grad[0] > 0.0);
    CHECK(params.at("x").grad[1] < 0.0);
  }

  TEST_CASE("shape and target errors") {
    ad::Tape tape;
    const Var a = tape.constant(Tensor({2, 3}));
    const Var b = tape.constant(Tensor({2, 3}));
    CHECK_THROWS_AS(ad::matmul(a, b), ShapeError);
    CHECK_THROWS_AS(ad::add(a, tape.constant(Tensor({3, 2}))), ShapeError);
    const std::vector<std::size_t> bad = {0, 3};
    CHECK_THROWS_AS(ad::softmax_cross_entropy(a, bad), DataError);
    const std::vector<std::size_t> short_targets = {0};
    CHECK_THROWS_AS(ad::binary_cross_entropy(a, short_targets), ShapeError);
  }

  TEST_CASE("gradients accumulate over repeated use") {
    ad::ParamStore params;
    params.add("w", Tensor::row({2.0}));
    ad::Tape tape;
    const Var w = tape.param(params.at("w"));
    tape.backward(ad::sum(ad::add(ad::mul(w, w), w)));
    CHECK(params.at("w").grad[0] == doctest::Approx(5.0));
  }

  TEST_CASE("adam hand example") {
    ad::ParamStore params;
    params.add("p", Tensor::row({1.0}));
    params.at("p").grad = Tensor::row({1.0});
    ad::Adam adam(ad::AdamConfig{0.1, 0.0, 0.9, 0.999, 1e-8});
    adam.step(params);
    CHECK(params.at("p").value[0] == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(adam.steps() == 1);
  }

  TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
    ad::ParamStore params;
    params.add("p", Tensor::row({1.0, -2.0}));
    params.at("p").grad = Tensor::row({0.3, 5.0});
    ad::Adam adam(ad::AdamConfig{0.0, 1e-4});
    adam.step(params);
    CHECK(params.at("p").value == Tensor::row({1.0, -2.0}));
  }

  TEST_CASE("l2 term pulls parameters toward zero") {
    ad::ParamStore params;
    params.add("p", Tensor::row({1.0}));
    params.at("p").grad = Tensor::row({0.0});
    ad::Adam adam(ad::AdamConfig{0.1, 0.5});
    adam.step(params);
    CHECK(params.at("p").value[0] < 1.0);
  }

  TEST_CASE("parameter and optimizer state round trip") {
    Rng rng(9);
    ad::ParamStore params;
    params.add("a", ad::uniform_init({3, 4}, -1, 1, rng));
    params.add("b", ad::glorot_init(4, 2, rng));
    for (auto& p : params) p.grad = ad::uniform_init(p.value.shape(), -1, 1, rng);
    ad::Adam adam(ad::AdamConfig{0.01, 1e-3});
    adam.step(params);

    const std::string bytes = ad::encode_params(params);
    const ad::ParamStore back = ad::decode_params(ByteReader(bytes, "params"));
    REQUIRE(back.size() == 2);
    CHECK(back.at("a").value == params.at("a").value);
    CHECK(back.at("b").value == params.at("b").value);

    const std::string abytes = ad::encode_adam(adam);
    const ad::Adam adam2 = ad::decode_adam(ByteReader(abytes, "adam"));
    CHECK(adam2.steps() == 1);
    CHECK(adam2.moments().at("a").second == adam.moments().at("a").second);
    CHECK(ad::encode_adam(adam2) == abytes);

    CHECK_THROWS_AS(ad::decode_params(ByteReader(std::string_view(bytes).substr(0, bytes.size() - 3), "params")),
                    FormatError);
  }

  TEST_CASE("gradcheck detects a wrong gradient") {
    ad::ParamStore params;
    params.add("a", Tensor::row({0.7, -0.4}));
    const ad::ScalarFn fn = [](ad::Tape& tape, ad::ParamStore& ps) {
      const Var a = tape.param(ps.at("a"));
      const Tensor& v = a.value();
      Tensor out = Tensor::scalar(v[0] * v[0] + v[1]);
      const ad::NodeId ia = a.id;
      return tape.record("wrong", std::move(out), {ia}, [ia](ad::Tape& t, ad::NodeId o) {
        Tensor& d = t.grad_accumulator(ia);
        d[0] += t.grad(o)[0] * 1.0;  // should be 2 * a0
        d[1] += t.grad(o)[0];
      });
    };
    CHECK(ad::check_gradients(fn, params).max_relative_error > 0.1);
  }
}
