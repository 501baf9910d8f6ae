#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dpdist/error.hpp"
#include "dpdist/training.hpp"

using namespace dpdist;

namespace {

TrainConfig tiny_config() {
    TrainConfig c;
    c.network.hidden = {16, 16};
    c.cloud_size = 16;
    c.batch_size = 2;
    c.max_steps = 6;
    c.pool_size = 4;
    c.standardize_batches = 2;
    c.seed = 4;
    return c;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("configs are validated before training") {
    TrainConfig c = tiny_config();
    c.network.patch_size = 4;
    CHECK_THROWS_AS(train(c), ArgumentError);
    c = tiny_config();
    c.batch_size = 0;
    CHECK_THROWS_AS(train(c), ArgumentError);
    c = tiny_config();
    c.kinds.clear();
    CHECK_THROWS_AS(train(c), ArgumentError);
}

TEST_CASE("training is deterministic per seed") {
    const TrainResult a = train(tiny_config());
    const TrainResult b = train(tiny_config());
    REQUIRE(a.history.size() == 6);
    for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(loss_history_csv(a.history) == loss_history_csv(b.history));
    CHECK(a.model.layers[0].weight == b.model.layers[0].weight);
    CHECK(a.model.mode == Mode::inference);
    CHECK(a.model.steps == 6);
    TrainConfig other = tiny_config();
    other.seed = 5;
    CHECK(train(other).history[0].loss != a.history[0].loss);
}

TEST_CASE("loss history csv") {
    const std::vector<LossRecord> h{{0, 0.5, 1e-3}, {1, 0.25, 5e-4}};
    CHECK(loss_history_csv(h) == "step,loss,learning_rate\n0,0.5,0.001\n1,0.25,0.00050000000000000001\n");
}

TEST_CASE("trained model is archive-representable") {
    const TrainResult r = train(tiny_config());
    for (const auto& l : r.model.layers)
        for (double w : l.weight) CHECK(static_cast<double>(static_cast<float>(w)) == w);
}

TEST_CASE("plane training reduces the loss fivefold") {
    TrainConfig c;
    c.network.hidden = {64, 64, 64};
    c.kinds = {ShapeKind::plane};
    c.cloud_size = 64;
    c.batch_size = 4;
    c.max_steps = 2000;
    c.seed = 1;
    const TrainResult r = train(c);
    auto window_mean = [&](std::size_t begin) {
        double s = 0.0;
        for (std::size_t i = begin; i < begin + 100; ++i) s += r.history[i].loss;
        return s / 100.0;
    };
    const double initial = window_mean(0);
    const double final = window_mean(1900);
    MESSAGE("initial " << initial << " final " << final);
    CHECK(final * 5.0 <= initial);
}

}
