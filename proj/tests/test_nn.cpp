#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "edgeq/nn.hpp"
#include "edgeq/rng.hpp"
#include "test_support.hpp"

using namespace edgeq;
using edgeq::testing::max_relative_error;
using edgeq::testing::numeric_gradients;
namespace fs = std::filesystem;

TEST_CASE("zero-initialized network maps everything to zero") {
    MlpNetwork net({4, 6, 5}, Activation::Relu);
    const auto out = net.forward({1.0, -2.0, 0.5, 3.0});
    REQUIRE(out.size() == 5);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("forward matches a hand-computed 2-2-3 network") {
    MlpNetwork net({2, 2, 3}, Activation::Relu);
    net.weights(0) = {0.5, -0.25, 0.75, 1.0};
    net.biases(0) = {0.1, -0.2};
    net.weights(1) = {1.0, 0.5, -1.0, 0.25, 0.2, 0.3};
    net.biases(1) = {0.05, 0.0, -0.1};

    SUBCASE("both hidden units active") {
        const auto out = net.forward({1.0, 2.0});
        CHECK(out[0] == doctest::Approx(1.425).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(0.5375).epsilon(1e-12));
        CHECK(out[2] == doctest::Approx(0.685).epsilon(1e-12));
    }
    SUBCASE("both hidden units cut off, output falls back to biases") {
        const auto out = net.forward({-1.0, 0.0});
        CHECK(out[0] == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(out[2] == doctest::Approx(-0.1).epsilon(1e-12));
    }
}

TEST_CASE("forward applies tanh on hidden layers only") {
    MlpNetwork net({1, 1, 1}, Activation::Tanh);
    net.weights(0) = {0.8};
    net.biases(0) = {0.1};
    net.weights(1) = {-0.5};
    net.biases(1) = {0.2};
    const double hidden = std::tanh(0.8 * 0.5 + 0.1);
    CHECK(net.forward({0.5})[0] == doctest::Approx(-0.5 * hidden + 0.2).epsilon(1e-12));
}

TEST_CASE("forward rejects inputs of the wrong length") {
    MlpNetwork net({3, 2, 2}, Activation::Relu);
    CHECK_THROWS_AS(net.forward({1.0, 2.0}), DimensionMismatchError);
}

TEST_CASE("training on the current prediction is a fixed point") {
    MlpNetwork net = MlpNetwork::glorot_init({4, 10, 5}, Activation::Relu, 11);
    const MlpNetwork before = net;
    const std::vector<double> x{0.5, -0.25, 1.0, 0.75};
    const double pred = net.forward(x)[3];
    const double loss = net.train_batch({x}, {pred}, {3}, TrainingConfig{0.5});
    CHECK(loss == 0.0);
    CHECK(net.parameters_equal(before));
}

TEST_CASE("single SGD step matches a hand derivative on a 1-1-1 net") {
    MlpNetwork net({1, 1, 1}, Activation::Relu);
    net.weights(0) = {0.5};
    net.biases(0) = {0.1};
    net.weights(1) = {-0.3};
    net.biases(1) = {0.2};
    const double loss = net.train_batch({{0.8}}, {1.0}, {0}, TrainingConfig{0.1});
    CHECK(loss == doctest::Approx(0.9025).epsilon(1e-12));
    CHECK(net.weights(1)[0] == doctest::Approx(-0.205).epsilon(1e-12));
    CHECK(net.biases(1)[0] == doctest::Approx(0.39).epsilon(1e-12));
    CHECK(net.weights(0)[0] == doctest::Approx(0.4544).epsilon(1e-12));
    CHECK(net.biases(0)[0] == doctest::Approx(0.043).epsilon(1e-12));
}

TEST_CASE("backprop agrees with central finite differences") {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Activation act = trial % 2 == 0 ? Activation::Relu : Activation::Tanh;
        MlpNetwork net =
            MlpNetwork::glorot_init({4, 12, 5}, act, 1000 + static_cast<std::uint64_t>(trial));
        Rng rng(500 + static_cast<std::uint64_t>(trial));
        for (int sample = 0; sample < 10; ++sample) {
            std::vector<double> x(4);
            for (auto& v : x) v = rng.uniform(-1.0, 1.0);
            const double y = rng.uniform(-2.0, 2.0);
            const int action = static_cast<int>(rng.below(5));
            Gradients analytic;
            net.backprop({x}, {y}, {action}, analytic);
            const Gradients numeric = numeric_gradients(net, {x}, {y}, {action}, 1e-5);
            worst = std::max(worst, max_relative_error(analytic, numeric));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("batch gradients also match finite differences") {
    MlpNetwork net = MlpNetwork::glorot_init({3, 8, 4}, Activation::Tanh, 77);
    Rng rng(42);
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::vector<int> actions;
    for (int s = 0; s < 6; ++s) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        inputs.push_back(x);
        targets.push_back(rng.uniform(-2.0, 2.0));
        actions.push_back(static_cast<int>(rng.below(4)));
    }
    Gradients analytic;
    net.backprop(inputs, targets, actions, analytic);
    const Gradients numeric = numeric_gradients(net, inputs, targets, actions, 1e-5);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
}

TEST_CASE("repeated training on one sample converges") {
    MlpNetwork net = MlpNetwork::glorot_init({3, 8, 4}, Activation::Relu, 7);
    const std::vector<double> x{0.3, -0.2, 0.5};
    const double target = 1.5;
    const TrainingConfig cfg{0.01};
    double prev = net.train_batch({x}, {target}, {2}, cfg);
    const double initial = prev;
    int decreases = 0;
    const int steps = 500;
    double last = prev;
    for (int i = 1; i < steps; ++i) {
        const double loss = net.train_batch({x}, {target}, {2}, cfg);
        if (loss < prev) ++decreases;
        prev = loss;
        last = loss;
    }
    CHECK(decreases >= static_cast<int>(0.95 * (steps - 1)));
    CHECK(last < 0.01 * initial);
}

TEST_CASE("identical seeds give identical nets and trajectories") {
    MlpNetwork a = MlpNetwork::glorot_init({4, 16, 9}, Activation::Relu, 123);
    MlpNetwork b = MlpNetwork::glorot_init({4, 16, 9}, Activation::Relu, 123);
    CHECK(a.parameters_equal(b));
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const double y = rng.uniform(-5.0, 5.0);
        const int action = static_cast<int>(rng.below(9));
        a.train_batch({x}, {y}, {action}, TrainingConfig{0.01});
        b.train_batch({x}, {y}, {action}, TrainingConfig{0.01});
    }
    CHECK(a.parameters_equal(b));
    MlpNetwork c = MlpNetwork::glorot_init({4, 16, 9}, Activation::Relu, 124);
    CHECK_FALSE(c.parameters_equal(a));
}

TEST_CASE("copies are deep: training the original leaves the copy alone") {
    MlpNetwork eval = MlpNetwork::glorot_init({3, 6, 3}, Activation::Relu, 31);
    const MlpNetwork target = eval;
    CHECK(target.parameters_equal(eval));

    Rng rng(4);
    std::vector<double> probe(3);
    for (auto& v : probe) v = rng.uniform(-1.0, 1.0);
    const auto before = target.forward(probe);

    eval.train_batch({{0.1, 0.2, 0.3}}, {2.0}, {1}, TrainingConfig{0.05});
    CHECK_FALSE(target.parameters_equal(eval));
    CHECK(target.forward(probe) == before);

    const MlpNetwork again = eval;
    const MlpNetwork again2 = eval;
    CHECK(again.parameters_equal(again2));
}

TEST_CASE("checkpoint round-trips bit-identical parameters") {
    const fs::path path = fs::temp_directory_path() / "edgeq_nn_roundtrip.ckpt";
    MlpNetwork net = MlpNetwork::glorot_init({4, 150, 11}, Activation::Relu, 2718);
    save_checkpoint(net, path);
    const MlpNetwork loaded = load_checkpoint(path, Activation::Relu);
    CHECK(loaded.parameters_equal(net));
    CHECK(loaded.layer_sizes() == net.layer_sizes());
    fs::remove(path);
}

TEST_CASE("truncated checkpoints are rejected") {
    const fs::path path = fs::temp_directory_path() / "edgeq_nn_truncated.ckpt";
    MlpNetwork net = MlpNetwork::glorot_init({3, 5, 4}, Activation::Relu, 5);
    save_checkpoint(net, path);
    const auto full_size = fs::file_size(path);
    fs::resize_file(path, full_size / 2);
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    fs::remove(path);
}

TEST_CASE("version mismatches name both versions") {
    const fs::path path = fs::temp_directory_path() / "edgeq_nn_version.ckpt";
    {
        std::ofstream out(path, std::ios::binary);
        out.write("QGN1", 4);
        const unsigned char v2[4] = {2, 0, 0, 0};
        out.write(reinterpret_cast<const char*>(v2), 4);
    }
    try {
        load_checkpoint(path);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('2') != std::string::npos);
        CHECK(msg.find('1') != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("foreign files fail the magic check") {
    const fs::path path = fs::temp_directory_path() / "edgeq_nn_magic.ckpt";
    {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a checkpoint";
    }
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    fs::remove(path);
    CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "edgeq_missing.ckpt"), IoError);
}
