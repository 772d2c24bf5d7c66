#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "xladapt/fixtures.hpp"
#include "xladapt/trainer.hpp"

using namespace xladapt;
using trainer::TrainConfig;

namespace {

constexpr double kLn2 = 0.6931471805599453;

mining::Triplet make_triplet(std::string source, std::string positive, std::string negative) {
  mining::Triplet t;
  t.source = std::move(source);
  t.positive = std::move(positive);
  t.negative = std::move(negative);
  t.pattern_id = "temporal_variation";
  t.positive_mode = mining::PositiveMode::paraphrase;
  t.neg_score = 8.5;
  t.pos_score = 9.5;
  t.lang_source = corpus::Lang::en;
  t.lang_positive = corpus::Lang::en;
  return t;
}

}  // namespace

TEST_CASE("triplet_loss is ln 2 whenever the cosines tie") {
  rng::Rng r(1);
  for (int i = 0; i < 100; ++i) {
    double c = r.uniform(-1.0, 1.0);
    double tau = r.uniform(0.01, 2.0);
    CHECK(std::abs(trainer::triplet_loss(c, c, tau) - kLn2) < 1e-12);
  }
}

TEST_CASE("triplet_loss matches direct scalar evaluation") {
  CHECK(trainer::triplet_loss(1.0, -1.0, 1.0) ==
        Catch::Approx(0.12692801104297250).epsilon(0).margin(1e-9));
  CHECK(trainer::triplet_loss(0.8, 0.4, 0.05) ==
        Catch::Approx(3.3540637289576883e-4).epsilon(0).margin(1e-9));
  CHECK_THROWS_AS(trainer::triplet_loss(0.5, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(trainer::triplet_loss(0.5, 0.5, -0.1), ConfigError);
}

TEST_CASE("triplet_loss stays finite and positive across the input range") {
  rng::Rng r(2);
  for (int i = 0; i < 500; ++i) {
    double sp = r.uniform(-1.0, 1.0), sn = r.uniform(-1.0, 1.0);
    double tau = r.uniform(1e-4, 2.0);
    double L = trainer::triplet_loss(sp, sn, tau);
    CHECK(std::isfinite(L));
    CHECK(L > 0.0);
  }
  CHECK(std::isfinite(trainer::triplet_loss(-1.0, 1.0, 1e-4)));
}

TEST_CASE("loss is monotone in each cosine") {
  rng::Rng r(3);
  for (int i = 0; i < 200; ++i) {
    double sp = r.uniform(-0.9, 0.9), sn = r.uniform(-0.9, 0.9);
    double tau = r.uniform(0.02, 1.0);
    CHECK(trainer::triplet_loss(sp + 0.05, sn, tau) < trainer::triplet_loss(sp, sn, tau));
    CHECK(trainer::triplet_loss(sp, sn + 0.05, tau) > trainer::triplet_loss(sp, sn, tau));
  }
}

TEST_CASE("loss gradients are antisymmetric and match finite differences") {
  rng::Rng r(4);
  for (int i = 0; i < 1000; ++i) {
    double sp = r.uniform(-1.0, 1.0), sn = r.uniform(-1.0, 1.0);
    double tau = r.uniform(0.02, 2.0);
    auto [gsp, gsn] = trainer::triplet_loss_grads(sp, sn, tau);
    CHECK(gsp + gsn == 0.0);  // exact negation by construction
    CHECK(gsp <= 0.0);
    CHECK(gsn >= 0.0);

    double h = 1e-5 * tau;
    double fd_sp =
        (trainer::triplet_loss(sp + h, sn, tau) - trainer::triplet_loss(sp - h, sn, tau)) /
        (2 * h);
    double fd_sn =
        (trainer::triplet_loss(sp, sn + h, tau) - trainer::triplet_loss(sp, sn - h, tau)) /
        (2 * h);
    double scale_sp = std::max({std::abs(fd_sp), std::abs(gsp), 1e-300});
    double scale_sn = std::max({std::abs(fd_sn), std::abs(gsn), 1e-300});
    CHECK(std::abs(fd_sp - gsp) / scale_sp < 1e-6);
    CHECK(std::abs(fd_sn - gsn) / scale_sn < 1e-6);
  }
}

TEST_CASE("lr_at_step warms up linearly then holds") {
  TrainConfig config;  // base_lr 5e-5, warmup_fraction 0.10
  CHECK(trainer::lr_at_step(5, 100, config) == 2.5e-5);
  CHECK(trainer::lr_at_step(10, 100, config) == 5e-5);  // warm-up is 10 steps, not 11
  CHECK(trainer::lr_at_step(50, 100, config) == 5e-5);
  CHECK(trainer::lr_at_step(100, 100, config) == 5e-5);
  CHECK(trainer::lr_at_step(1, 100, config) == Catch::Approx(5e-6));

  CHECK_THROWS_AS(trainer::lr_at_step(0, 100, config), ConfigError);
  CHECK_THROWS_AS(trainer::lr_at_step(101, 100, config), ConfigError);

  config.warmup_fraction = 0.0;
  CHECK(trainer::lr_at_step(1, 100, config) == config.base_lr);
  config.warmup_fraction = 1.0;
  CHECK(trainer::lr_at_step(50, 100, config) == Catch::Approx(2.5e-5));
  config.warmup_fraction = 0.1;
  CHECK(trainer::lr_at_step(1, 7, config) == config.base_lr);  // ceil(0.7) = 1
}

TEST_CASE("adamw_step reproduces the hand-executed scalar update") {
  encoder::EncoderParams params;
  params.config = {2, 1, 3};
  params.table = {1.0};
  trainer::OptimizerState state;
  state.m = {0.0};
  state.v = {0.0};

  TrainConfig config;
  config.weight_decay = 0.0;
  std::vector<double> g{1.0};
  trainer::adamw_step(params, g, state, 0.1, config);
  CHECK(state.step == 1);
  CHECK(params.table[0] == Catch::Approx(0.9).epsilon(0).margin(1e-8));
}

TEST_CASE("adamw_step with zero gradients applies only decoupled decay") {
  encoder::EncoderParams params;
  params.config = {2, 2, 3};
  params.table = {0.5, -1.25, 2.0, 0.0};
  auto before = params.table;
  trainer::OptimizerState state = trainer::init_optimizer(params);
  std::vector<double> zeros(4, 0.0);

  TrainConfig config;
  config.weight_decay = 0.0;
  trainer::adamw_step(params, zeros, state, 0.1, config);
  CHECK(params.table == before);  // no decay, no movement

  config.weight_decay = 0.01;
  trainer::adamw_step(params, zeros, state, 0.1, config);
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(params.table[i] ==
          Catch::Approx(before[i] * (1.0 - 0.1 * 0.01)).epsilon(1e-15).margin(1e-300));
}

TEST_CASE("adamw_step validates shapes and finiteness") {
  encoder::EncoderParams params;
  params.config = {2, 1, 3};
  params.table = {1.0, 2.0};
  trainer::OptimizerState state = trainer::init_optimizer(params);

  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(trainer::adamw_step(params, wrong, state, 0.1, {}), DataError);

  std::vector<double> bad{1.0, std::nan("")};
  CHECK_THROWS_WITH(trainer::adamw_step(params, bad, state, 0.1, {}),
                    Catch::Matchers::ContainsSubstring("non-finite gradient at step 1"));
  CHECK(state.step == 0);  // failed update does not consume a step
}

TEST_CASE("a triplet whose positive equals its negative never moves the loss off ln 2") {
  std::vector<mining::Triplet> triplets;
  for (int i = 0; i < 8; ++i)
    triplets.push_back(make_triplet("abcdef" + std::to_string(i), "uvwxyz", "uvwxyz"));

  auto params = encoder::init_encoder({8, 256, 3}, 2);
  auto state = trainer::init_optimizer(params);
  TrainConfig config;
  config.batch_size = 2;
  auto metrics = trainer::train_one_epoch(triplets, params, state, config);
  REQUIRE(metrics.steps.size() == 4);
  for (const auto& s : metrics.steps) {
    CHECK(std::abs(s.loss - kLn2) < 1e-12);
    CHECK(s.mean_cos_sp == s.mean_cos_sn);
  }
}

TEST_CASE("one epoch on the separable fixture widens the cosine margin") {
  auto triplets = fixtures::make_separable_triplets(600, 7);
  auto params = encoder::init_encoder({32, 2048, 3}, 3);
  auto state = trainer::init_optimizer(params);

  auto [sp0, sn0] = trainer::mean_cosines(triplets, params);
  TrainConfig config;
  config.base_lr = 1e-3;
  config.seed = 3;
  auto metrics = trainer::train_one_epoch(triplets, params, state, config);
  auto [sp1, sn1] = trainer::mean_cosines(triplets, params);

  CHECK(sp1 - sn1 > sp0 - sn0);

  // Loss trends down: first-quarter mean above last-quarter mean.
  size_t q = metrics.steps.size() / 4;
  REQUIRE(q >= 1);
  double first = 0.0, last = 0.0;
  for (size_t i = 0; i < q; ++i) {
    first += metrics.steps[i].loss;
    last += metrics.steps[metrics.steps.size() - 1 - i].loss;
  }
  CHECK(first / static_cast<double>(q) > last / static_cast<double>(q));
}

TEST_CASE("training is bit-reproducible per seed") {
  auto triplets = fixtures::make_separable_triplets(120, 9);
  TrainConfig config;
  config.base_lr = 1e-3;
  config.seed = 21;

  auto run = [&] {
    auto params = encoder::init_encoder({16, 1024, 3}, 4);
    auto state = trainer::init_optimizer(params);
    auto metrics = trainer::train_one_epoch(triplets, params, state, config);
    return std::pair{params.table, metrics};
  };
  auto [table_a, metrics_a] = run();
  auto [table_b, metrics_b] = run();
  CHECK(table_a == table_b);
  REQUIRE(metrics_a.steps.size() == metrics_b.steps.size());
  for (size_t i = 0; i < metrics_a.steps.size(); ++i) {
    CHECK(metrics_a.steps[i].loss == metrics_b.steps[i].loss);
    CHECK(metrics_a.steps[i].lr == metrics_b.steps[i].lr);
  }
}

TEST_CASE("train_one_epoch rejects bad inputs and aborts on non-finite loss") {
  auto params = encoder::init_encoder({8, 128, 3}, 1);
  auto state = trainer::init_optimizer(params);

  CHECK_THROWS_AS(trainer::train_one_epoch({}, params, state, {}), DataError);

  std::vector<mining::Triplet> one{make_triplet("abcdef", "abcxyz", "qrstuv")};
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(trainer::train_one_epoch(one, params, state, bad), ConfigError);
  bad = {};
  bad.tau = 0.0;
  CHECK_THROWS_AS(trainer::train_one_epoch(one, params, state, bad), ConfigError);

  // negative == source drives delta to +inf at an absurd temperature.
  std::vector<mining::Triplet> diverging{make_triplet("abcdef", "uvwxyz", "abcdef")};
  TrainConfig tiny_tau;
  tiny_tau.tau = 1e-320;  // subnormal: (cos_sn - cos_sp) / tau overflows
  CHECK_THROWS_WITH(trainer::train_one_epoch(diverging, params, state, tiny_tau),
                    Catch::Matchers::ContainsSubstring("non-finite loss at step 1") &&
                        Catch::Matchers::ContainsSubstring("triplets 0"));
}

TEST_CASE("parameter gradients match finite differences on a 5-bucket toy") {
  encoder::EncoderConfig config{4, 5, 3};
  auto params = encoder::init_encoder(config, 6);
  auto t = make_triplet("abcdef", "abdcef", "xyzuvw");
  const double tau = 0.5;

  std::vector<double> grad(params.table.size(), 0.0);
  trainer::triplet_forward_backward(t, params, tau, grad, 1.0);

  std::vector<double> sink(params.table.size(), 0.0);
  auto loss_at = [&](const encoder::EncoderParams& p) {
    std::fill(sink.begin(), sink.end(), 0.0);
    return trainer::triplet_forward_backward(t, p, tau, sink, 0.0).loss;
  };

  const double h = 1e-5;
  for (size_t i = 0; i < params.table.size(); ++i) {
    encoder::EncoderParams p = params;
    p.table[i] += h;
    double up = loss_at(p);
    p.table[i] -= 2 * h;
    double down = loss_at(p);
    double fd = (up - down) / (2 * h);
    double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-12});
    CHECK(std::abs(fd - grad[i]) / scale < 1e-4);
  }
}

TEST_CASE("write_metrics_csv leads with the run configuration") {
  auto triplets = fixtures::make_separable_triplets(8, 2);
  auto params = encoder::init_encoder({8, 256, 3}, 2);
  auto state = trainer::init_optimizer(params);
  TrainConfig config;
  config.batch_size = 4;
  auto metrics = trainer::train_one_epoch(triplets, params, state, config);

  std::ostringstream os;
  trainer::write_metrics_csv(os, metrics, config);
  std::istringstream in(os.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("# tau=", 0) == 0);
  REQUIRE(std::getline(in, line));
  CHECK(line == "step,lr,loss,mean_cos_sp,mean_cos_sn");
  size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == metrics.steps.size());
}
