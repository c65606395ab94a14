// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fmt/format.h>

#include <cmath>

#include "mcmg/ad/checkpoint.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/selftest/selftest.hpp"
#include "mcmg/train/trainer.hpp"
#include "test_util.hpp"

using namespace mcmg;
using namespace mcmg::train;

namespace {

struct Fixture {
  data::Dataset ds = selftest::toy_dataset();
  graph::PoiGraph graph = graph::build_poi_graph(ds, graph::EdgeWeighting::kCount);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

TrainConfig small_config() {
  TrainConfig c;
  c.model = selftest::toy_model_config();
  c.lr = 0.01;
  c.batch_size = 8;
  c.max_epochs = 4;
  c.patience = 100;
  c.seed = 11;
  c.log_wall_time = false;
  return c;
}

std::string all_rows(const Trainer& t) {
  std::string s = log_csv_header();
  for (const auto& row : t.log()) s += log_csv_row(row);
  return s;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("training lowers the loss and logs every epoch") {
    const Fixture& f = fixture();
    TrainConfig c = small_config();
    c.max_epochs = 15;
    c.model.gcn_dropout = c.model.sa_dropout = 0.0;
    Trainer t(f.ds, f.graph, c);
    t.fit();
    REQUIRE(t.log().size() == 15);
    CHECK(t.log().back().j < t.log().front().j);
    CHECK(t.log().front().j == doctest::Approx(t.log().front().j_poi + t.log().front().j_region +
                                                t.log().front().j_category));
    CHECK(t.best_epoch() >= 1);
    CHECK(all_rows(t).starts_with("epoch,J_l,J_r,J_c,J,val_HR@10,val_NDCG@10,wall_seconds\n1,"));
  }

  TEST_CASE("zero learning rate leaves parameters unchanged") {
    const Fixture& f = fixture();
    TrainConfig c = small_config();
    c.lr = 0.0;
    c.max_epochs = 2;
    Trainer t(f.ds, f.graph, c);
    const std::string before = ad::encode_params(t.model().params());
    t.fit();
    CHECK(ad::encode_params(t.model().params()) == before);
  }

  TEST_CASE("group weights stay on the simplex during 100 steps") {
    const Fixture& f = fixture();
    TrainConfig c = small_config();
    c.lr = 0.05;
    c.batch_size = 4;
    c.max_epochs = 1000;
    Trainer t(f.ds, f.graph, c);
    std::size_t steps = 0;
    double worst = 0.0;
    bool nonnegative = true;
    t.on_batch = [&](std::size_t, double, const ad::Tensor& w) {
      ++steps;
      for (std::size_t g = 0; g < 2; ++g) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          s += w.at(g, k);
          nonnegative = nonnegative && w.at(g, k) >= 0.0;
        }
        worst = std::max(worst, std::abs(s - 1.0));
      }
    };
    while (steps < 100) t.run_epoch();
    CHECK(worst <= 1e-9);
    CHECK(nonnegative);
    CHECK(t.model().group_weights() != ad::Tensor({2, 3}, 1.0 / 3));
  }

  TEST_CASE("identical seeds give identical bytes") {
    const Fixture& f = fixture();
    const auto dir = test::temp_dir("determinism");
    for (int run = 0; run < 2; ++run) {
      Trainer t(f.ds, f.graph, small_config());
      t.fit();
      t.save_checkpoint(dir / fmt::format("last{}.ckpt", run));
      t.save_best_model(dir / fmt::format("model{}.ckpt", run));
      test::write_file(dir / fmt::format("log{}.csv", run), all_rows(t));
    }
    CHECK(test::read_file(dir / "last0.ckpt") == test::read_file(dir / "last1.ckpt"));
    CHECK(test::read_file(dir / "model0.ckpt") == test::read_file(dir / "model1.ckpt"));
    CHECK(test::read_file(dir / "log0.csv") == test::read_file(dir / "log1.csv"));

    TrainConfig other = small_config();
    other.seed = 12;
    Trainer t(f.ds, f.graph, other);
    t.fit();
    t.save_checkpoint(dir / "other.ckpt");
    CHECK(test::read_file(dir / "other.ckpt") != test::read_file(dir / "last0.ckpt"));
  }

  TEST_CASE("resuming matches an uninterrupted run") {
    const Fixture& f = fixture();
    const auto dir = test::temp_dir("resume");
    Trainer full(f.ds, f.graph, small_config());
    full.fit();
    full.save_checkpoint(dir / "full.ckpt");

    TrainConfig half = small_config();
    half.max_epochs = 2;
    Trainer first(f.ds, f.graph, half);
    first.fit();
    first.save_checkpoint(dir / "half.ckpt");
    Trainer second = Trainer::resume(f.ds, f.graph, dir / "half.ckpt", small_config());
    CHECK(second.epoch() == 2);
    second.fit();
    second.save_checkpoint(dir / "resumed.ckpt");
    CHECK(all_rows(second) == all_rows(full));
    CHECK(test::read_file(dir / "resumed.ckpt") == test::read_file(dir / "full.ckpt"));
  }

  TEST_CASE("checkpoints round trip and reject damage") {
    const Fixture& f = fixture();
    const auto dir = test::temp_dir("checkpoint");
    TrainConfig c = small_config();
    c.max_epochs = 1;
    Trainer t(f.ds, f.graph, c);
    t.fit();
    t.save_best_model(dir / "model.ckpt");
    t.save_checkpoint(dir / "last.ckpt");
    LoadedModel m = load_model(dir / "model.ckpt");
    CHECK(m.config.model.embedding_size == c.model.embedding_size);
    CHECK(m.config.seed == c.seed);
    CHECK(ad::encode_params(m.model.params()) == ad::encode_params(t.best_params()));
    CHECK(ad::encode_params(load_model(dir / "last.ckpt").model.params()) == ad::encode_params(t.best_params()));

    const std::string bytes = test::read_file(dir / "last.ckpt");
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 3, bytes.size() - 1}) {
      test::write_file(dir / "cut.ckpt", bytes.substr(0, cut));
      CHECK_THROWS_AS(load_model(dir / "cut.ckpt"), FormatError);
      CHECK_THROWS_AS(Trainer::resume(f.ds, f.graph, dir / "cut.ckpt"), FormatError);
    }
    CHECK_THROWS_AS(Trainer::resume(f.ds, f.graph, dir / "model.ckpt"), FormatError);
    CHECK_THROWS_AS(load_model(dir / "absent.ckpt"), DataError);
  }

  TEST_CASE("early stopping honours patience") {
    const Fixture& f = fixture();
    TrainConfig c = small_config();
    c.lr = 0.0;
    c.max_epochs = 50;
    c.patience = 3;
    Trainer t(f.ds, f.graph, c);
    t.fit();
    // Nothing changes with lr = 0, so epoch 1 stays best.
    CHECK(t.best_epoch() == 1);
    CHECK(t.log().size() == 4);
  }

  TEST_CASE("config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.lr = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}
