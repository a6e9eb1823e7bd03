#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "betagan/autodiff.hpp"
#include "betagan/rng.hpp"
#include "betagan/tensor.hpp"
#include "oracles.hpp"

using namespace betagan;
using betagan::testing::naive_matmul;
using betagan::testing::relative_error;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-scale, scale);
    return t;
}

// Values of 1/(1+e^-x) for x = -5..5, computed with 40-digit arithmetic and
// rounded to the nearest double.
constexpr struct {
    double x, sigma;
} kSigmoidTable[] = {
    {-5.0, 0.0066928509242848554},
    {-4.0, 0.01798620996209156},
    {-3.0, 0.04742587317756678},
    {-2.0, 0.11920292202211756},
    {-1.0, 0.2689414213699951},
    {0.0, 0.5},
    {1.0, 0.7310585786300049},
    {2.0, 0.8807970779778824},
    {3.0, 0.9525741268224333},
    {4.0, 0.9820137900379085},
    {5.0, 0.9933071490757152},
};

}  // namespace

TEST_CASE("tensor shape contract") {
    CHECK_THROWS_AS(Tensor(0, 3), ContractError);
    CHECK_THROWS_AS(Tensor(2, 2, {1.0, 2.0, 3.0}), DimensionError);
    const Tensor t(2, 3);
    CHECK(t.size() == 6);
    CHECK(t.shape()[0] == 2);
}

TEST_CASE("matmul identity and annihilating cases") {
    Tensor id(2, 2, {1, 0, 0, 1});
    Tensor a(2, 2, {1, 2, 3, 4});
    CHECK(matmul(id, a) == a);

    Tensor l(2, 2, {1, 0, 0, 0});
    Tensor r(2, 2, {0, 0, 0, 1});
    CHECK(matmul(l, r) == Tensor(2, 2, {0, 0, 0, 0}));
}

TEST_CASE("matmul matches the naive triple-loop oracle") {
    Rng rng(42);
    const Tensor a = random_tensor(3, 4, rng);
    const Tensor b = random_tensor(4, 2, rng);
    const Tensor got = matmul(a, b);
    const Tensor want = naive_matmul(a, b);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got.data()[i] - want.data()[i]) < 1e-12);
}

TEST_CASE("matmul dimension error names both shapes") {
    Tensor a(3, 4), b(5, 2);
    try {
        matmul(a, b);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3x4") != std::string::npos);
        CHECK(msg.find("5x2") != std::string::npos);
    }
}

TEST_CASE("matmul is deterministic") {
    Rng rng(7);
    const Tensor a = random_tensor(8, 16, rng);
    const Tensor b = random_tensor(16, 8, rng);
    CHECK(matmul(a, b) == matmul(a, b));
}

TEST_CASE("activation definitions") {
    const Tensor x(1, 3, {-1.0, 0.0, 2.0});
    CHECK(activation(x, Activation::Relu) == Tensor(1, 3, {0.0, 0.0, 2.0}));
    CHECK(activation(Tensor::scalar(0.0), Activation::Tanh).at(0, 0) == 0.0);
    CHECK(activation(Tensor::scalar(0.0), Activation::Sigmoid).at(0, 0) == 0.5);
    CHECK(activation(x, Activation::Linear) == x);
}

TEST_CASE("sigmoid matches the high-precision table") {
    for (const auto& entry : kSigmoidTable)
        CHECK(std::abs(stable_sigmoid(entry.x) - entry.sigma) < 1e-12);
}

TEST_CASE("sigmoid stays strictly inside (0,1); relu stays nonnegative") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(-50.0, 50.0);
        const double s = stable_sigmoid(x);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    for (double extreme : {-1e6, -800.0, 800.0, 1e6, 1e300, -1e300}) {
        const double s = stable_sigmoid(extreme);
        CHECK(s > 0.0);
        CHECK(s < 1.0);
        CHECK(std::isfinite(log_sigmoid(extreme)));
    }
    const Tensor y = activation(random_tensor(10, 10, rng, 5.0), Activation::Relu);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] >= 0.0);
}

TEST_CASE("log_sigmoid basics") {
    CHECK(std::abs(log_sigmoid(0.0) + std::log(2.0)) < 1e-15);
    CHECK(std::abs(log_sigmoid(5.0) - std::log(stable_sigmoid(5.0))) < 1e-12);
    // log(1-D) computed as log_sigmoid(-x) stays finite where the naive form
    // would hit log(0).
    CHECK(std::isfinite(log_sigmoid(-40.0)));
    CHECK(std::abs(log_sigmoid(-40.0) - (-40.0)) < 1e-12);
}

TEST_CASE("backward of elementary functions at zero") {
    {
        ad::Tape tape;
        const ad::Var x = tape.leaf(Tensor::scalar(0.0));
        const ad::Var y = tape.activation(x, Activation::Tanh);
        const ad::Gradients grads = tape.backward(y);
        CHECK(grads.at(x).at(0, 0) == 1.0);
    }
    {
        ad::Tape tape;
        const ad::Var x = tape.leaf(Tensor::scalar(0.0));
        const ad::Var y = tape.activation(x, Activation::Sigmoid);
        const ad::Gradients grads = tape.backward(y);
        CHECK(grads.at(x).at(0, 0) == 0.25);
    }
}

TEST_CASE("backward rejects non-scalar losses and consumed tapes") {
    ad::Tape tape;
    const ad::Var x = tape.leaf(Tensor(2, 2));
    CHECK_THROWS_AS(tape.backward(x), ContractError);

    ad::Tape tape2;
    const ad::Var s = tape2.leaf(Tensor::scalar(1.0));
    const ad::Var y = tape2.activation(s, Activation::Tanh);
    (void)tape2.backward(y);
    CHECK_THROWS_AS(tape2.backward(y), ContractError);
    CHECK_THROWS_AS(tape2.neg(s), ContractError);
}

TEST_CASE("two-layer network gradients match central finite differences") {
    Rng rng(11);
    MlpSpec spec;
    spec.input_dim = 3;
    spec.role = Role::Discriminator;
    spec.layers = {LayerSpec{5, Activation::Tanh}, LayerSpec{1, Activation::Sigmoid}};
    Mlp net = build_mlp(spec, 99);
    const Tensor input = random_tensor(4, 3, rng);

    // Loss: mean log-sigmoid of the head logits.
    const auto loss_value = [&]() {
        const Tensor logits = net.forward_logits(input);
        double total = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i)
            total += log_sigmoid(logits.data()[i]);
        return total / static_cast<double>(logits.size());
    };

    ad::Tape tape;
    const TracedMlp traced = put_on_tape(tape, net);
    const ad::Var logits = trace_forward(tape, traced, spec, tape.leaf(input), true);
    const ad::Var loss = tape.mean_all(tape.log_sigmoid(logits));
    const ad::Gradients grads = tape.backward(loss);

    const std::vector<Tensor> fd = betagan::testing::fd_gradients(net, loss_value);
    for (std::size_t layer = 0; layer < net.layers().size(); ++layer) {
        const Tensor& gw = grads.at(traced.weights[layer]);
        const Tensor& gb = grads.at(traced.biases[layer]);
        const Tensor& fw = fd[2 * layer];
        const Tensor& fb = fd[2 * layer + 1];
        for (std::size_t i = 0; i < gw.size(); ++i)
            CHECK(relative_error(gw.data()[i], fw.data()[i]) <= 1e-5);
        for (std::size_t i = 0; i < gb.size(); ++i)
            CHECK(relative_error(gb.data()[i], fb.data()[i]) <= 1e-5);
    }
}

TEST_CASE("composite expressions pass the finite-difference property") {
    // 20 random points through a composite of every primitive: matmul, bias,
    // activations, log-sigmoid, neg, add, mean.
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        MlpSpec spec;
        spec.input_dim = 2 + rng.index(3);
        spec.role = Role::Discriminator;
        const Activation hidden =
            trial % 2 == 0 ? Activation::Tanh : Activation::Sigmoid;
        spec.layers = {LayerSpec{2 + rng.index(4), hidden},
                       LayerSpec{1, Activation::Sigmoid}};
        Mlp net = build_mlp(spec, 1000 + trial);
        const Tensor a = random_tensor(3, spec.input_dim, rng);
        const Tensor b = random_tensor(3, spec.input_dim, rng);

        const auto loss_value = [&]() {
            const Tensor la = net.forward_logits(a);
            const Tensor lb = net.forward_logits(b);
            double first = 0.0, second = 0.0;
            for (std::size_t i = 0; i < la.size(); ++i) first += log_sigmoid(la.data()[i]);
            for (std::size_t i = 0; i < lb.size(); ++i)
                second += log_sigmoid(-lb.data()[i]);
            return first / static_cast<double>(la.size()) -
                   second / static_cast<double>(lb.size());
        };

        ad::Tape tape;
        const TracedMlp traced = put_on_tape(tape, net);
        const ad::Var la = trace_forward(tape, traced, spec, tape.leaf(a), true);
        const ad::Var lb = trace_forward(tape, traced, spec, tape.leaf(b), true);
        const ad::Var loss =
            tape.add(tape.mean_all(tape.log_sigmoid(la)),
                     tape.neg(tape.mean_all(tape.log_sigmoid(tape.neg(lb)))));
        const ad::Gradients grads = tape.backward(loss);

        const std::vector<Tensor> fd = betagan::testing::fd_gradients(net, loss_value);
        for (std::size_t layer = 0; layer < net.layers().size(); ++layer) {
            const Tensor& gw = grads.at(traced.weights[layer]);
            const Tensor& fw = fd[2 * layer];
            for (std::size_t i = 0; i < gw.size(); ++i)
                CHECK(relative_error(gw.data()[i], fw.data()[i]) <= 1e-5);
        }
    }
}

TEST_CASE("relu backward matches finite differences away from the kink") {
    Rng rng(21);
    MlpSpec spec;
    spec.input_dim = 3;
    spec.role = Role::Generator;
    spec.layers = {LayerSpec{6, Activation::Relu}, LayerSpec{2, Activation::Linear}};
    Mlp net = build_mlp(spec, 5);

    Tensor input(4, 3);
    for (;;) {  // keep all pre-activations clear of the relu kink
        for (std::size_t i = 0; i < input.size(); ++i)
            input.data()[i] = rng.uniform(-1.0, 1.0);
        if (betagan::testing::min_preactivation_magnitude(net, input) > 1e-3) break;
    }

    const auto loss_value = [&]() {
        const Tensor out = net.forward(input);
        double total = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) total += out.data()[i];
        return total / static_cast<double>(out.size());
    };

    ad::Tape tape;
    const TracedMlp traced = put_on_tape(tape, net);
    const ad::Var out = trace_forward(tape, traced, spec, tape.leaf(input), false);
    const ad::Gradients grads = tape.backward(tape.mean_all(out));
    const std::vector<Tensor> fd = betagan::testing::fd_gradients(net, loss_value);
    for (std::size_t layer = 0; layer < net.layers().size(); ++layer) {
        const Tensor& gw = grads.at(traced.weights[layer]);
        for (std::size_t i = 0; i < gw.size(); ++i)
            CHECK(relative_error(gw.data()[i], fd[2 * layer].data()[i]) <= 1e-5);
    }
}

TEST_CASE("sgd_step signs and shape checks") {
    Tensor p = Tensor::scalar(0.0);
    sgd_step(p, Tensor::scalar(1.0), 0.1, StepDirection::Descend);
    CHECK(p.at(0, 0) == -0.1);
    sgd_step(p, Tensor::scalar(1.0), 0.1, StepDirection::Ascend);
    CHECK(p.at(0, 0) == 0.0);
    Tensor wrong(1, 2);
    CHECK_THROWS_AS(sgd_step(p, wrong, 0.1, StepDirection::Descend), DimensionError);
    CHECK_THROWS_AS(sgd_step(p, Tensor::scalar(1.0), 0.0, StepDirection::Descend),
                    ContractError);
}

TEST_CASE("repeated descent contracts like the closed form") {
    // f(theta) = theta^2, so each step multiplies theta by (1 - 2 lr).
    double theta = 1.0;
    Tensor p = Tensor::scalar(theta);
    for (int t = 0; t < 100; ++t) {
        const Tensor grad = Tensor::scalar(2.0 * p.at(0, 0));
        sgd_step(p, grad, 0.1, StepDirection::Descend);
    }
    const double closed_form = std::pow(1.0 - 2.0 * 0.1, 100);  // 0.8^100
    CHECK(std::abs(p.at(0, 0)) < 1e-8);
    CHECK(relative_error(p.at(0, 0), closed_form, 1e-30) < 1e-12);
    CHECK(relative_error(closed_form, 2.037035976334486e-10, 1e-30) < 1e-14);
}
