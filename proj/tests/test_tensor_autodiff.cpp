#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tip/adam.hpp"
#include "tip/autodiff.hpp"
#include "tip/tensor.hpp"
#include "test_support.hpp"

using namespace tip;
using tip_test::gradients_match_fd;
using tip_test::random_tensor;

TEST_CASE("matmul forward") {
    Tape tape;
    Var identity = tape.constant(Tensor({2, 2}, {1, 0, 0, 1}));
    Var v = tape.constant(Tensor({2, 1}, {3, 4}));
    CHECK(tape.value(tape.matmul(identity, v)).values() == std::vector<double>{3, 4});

    Var zeros = tape.constant(Tensor({2, 2}, {0, 0, 0, 0}));
    Var anything = tape.constant(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
    for (double x : tape.value(tape.matmul(zeros, anything)).values()) CHECK(x == 0.0);

    Var a = tape.constant(Tensor({2, 2}, {1, 2, 3, 4}));
    Var b = tape.constant(Tensor({2, 1}, {5, 6}));
    CHECK(tape.value(tape.matmul(a, b)).values() == std::vector<double>{17, 39});
}

TEST_CASE("matmul shape mismatch") {
    Tape tape;
    Var a = tape.constant(Tensor({2, 3}));
    Var b = tape.constant(Tensor({2, 2}));
    CHECK_THROWS_AS(tape.matmul(a, b), std::invalid_argument);
}

TEST_CASE("relu forward and gradient") {
    Tape tape;
    Var x = tape.constant(Tensor({3}, {-2, 0, 3}));
    CHECK(tape.value(tape.relu(x)).values() == std::vector<double>{0, 0, 3});

    Parameter p("p", Tensor({2}, {-1, 2}));
    Tape t2;
    Var loss = t2.sum(t2.relu(t2.param(p)));
    t2.backward(loss);
    CHECK(p.grad.values() == std::vector<double>{0, 1});
}

TEST_CASE("sigmoid values") {
    Tape tape;
    Var z = tape.sigmoid(tape.constant(Tensor::scalar(0.0)));
    CHECK(tape.value(z)[0] == 0.5);

    Var s3 = tape.sigmoid(tape.constant(Tensor::scalar(3.0)));
    CHECK(tape.value(s3)[0] == Catch::Approx(0.9525741268).epsilon(1e-6));

    // sigma(x) + sigma(-x) == 1
    Var pos = tape.sigmoid(tape.constant(Tensor::scalar(1.7)));
    Var neg = tape.sigmoid(tape.constant(Tensor::scalar(-1.7)));
    CHECK(tape.value(pos)[0] + tape.value(neg)[0] == Catch::Approx(1.0).epsilon(1e-12));

    // stable at large magnitude
    Var big = tape.sigmoid(tape.constant(Tensor({2}, {700.0, -700.0})));
    CHECK(tape.value(big)[0] > 0.0);
    CHECK(tape.value(big)[0] <= 1.0);
    CHECK(tape.value(big)[1] >= 0.0);
    CHECK(tape.value(big)[1] < 1.0);
    CHECK(std::isfinite(tape.value(big)[0]));
    CHECK(std::isfinite(tape.value(big)[1]));
}

TEST_CASE("concat_cols") {
    Tape tape;
    Var a = tape.constant(Tensor({2, 1}, {1, 2}));
    Var b = tape.constant(Tensor({2, 1}, {3, 4}));
    CHECK(tape.value(tape.concat_cols(a, b)).values() == std::vector<double>{1, 3, 2, 4});

    Var empty = tape.constant(Tensor({2, 0}));
    CHECK(tape.value(tape.concat_cols(a, empty)).values() == tape.value(a).values());

    Var bad = tape.constant(Tensor({3, 1}));
    CHECK_THROWS_AS(tape.concat_cols(a, bad), std::invalid_argument);
}

TEST_CASE("mean_aggregate basics") {
    Tape tape;
    Var src = tape.constant(Tensor({3, 2}, {1, 2, 3, 4, 5, 6}));
    auto adj = std::make_shared<AdjacencyList>(AdjacencyList{{2}, {}, {0, 2}});
    const Tensor& out = tape.value(tape.mean_aggregate(src, adj));
    CHECK(out.at(0, 0) == 5.0);  // single neighbor passes through
    CHECK(out.at(0, 1) == 6.0);
    CHECK(out.at(1, 0) == 0.0);  // no neighbors -> zero row
    CHECK(out.at(1, 1) == 0.0);
    CHECK(out.at(2, 0) == 3.0);
    CHECK(out.at(2, 1) == 4.0);

    auto bad = std::make_shared<AdjacencyList>(AdjacencyList{{7}});
    CHECK_THROWS_AS(tape.mean_aggregate(src, bad), std::out_of_range);
}

TEST_CASE("mean_aggregate matches dense oracle on random graphs") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 29);
        const std::size_t d = 1 + uniform_index(rng, 6);
        auto adj = std::make_shared<AdjacencyList>(
            tip_test::random_adjacency(n, n, 0.25, rng));
        Tensor src = random_tensor({n, d}, rng);
        Tape tape;
        const Tensor& fast = tape.value(tape.mean_aggregate(tape.constant(src), adj));
        Tensor dense = tip_test::dense_mean_aggregate(src, *adj);
        CHECK(tip_test::max_abs_diff(fast, dense) <= 1e-6);
    }
}

TEST_CASE("backward basics") {
    Parameter p("p", Tensor({3}, {1, 2, 3}));
    {
        Tape tape;
        Var loss = tape.sum(tape.param(p));
        tape.backward(loss);
        CHECK(p.grad.values() == std::vector<double>{1, 1, 1});
        p.zero_grad();
    }
    {
        Parameter q("q", Tensor({1}, {3}));
        Tape tape;
        Var qv = tape.param(q);
        Var loss = tape.sum(tape.mul(qv, qv));
        tape.backward(loss);
        CHECK(q.grad[0] == Catch::Approx(6.0).epsilon(1e-12));
    }
    {
        // parameter not reachable from the loss keeps a zero grad
        Parameter used("used", Tensor({1}, {2}));
        Parameter unused("unused", Tensor({1}, {5}));
        Tape tape;
        tape.param(unused);
        Var loss = tape.sum(tape.param(used));
        tape.backward(loss);
        CHECK(unused.grad[0] == 0.0);
    }
    {
        Tape tape;
        Var non_scalar = tape.constant(Tensor({2}, {1, 2}));
        CHECK_THROWS_AS(tape.backward(non_scalar), std::invalid_argument);
    }
}

TEST_CASE("analytic gradients match finite differences for each op") {
    std::mt19937_64 rng(7);
    tip_test::FdFailure f;

    SECTION("matmul") {
        Parameter a("a", random_tensor({3, 4}, rng));
        Parameter b("b", random_tensor({4, 2}, rng));
        auto run = [&] {
            Tape tape;
            Var loss = tape.sum(tape.matmul(tape.param(a), tape.param(b)));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        INFO(f.param << "[" << f.index << "]");
        CHECK(gradients_match_fd({&a, &b}, run, 1e-5, 1e-4, &f));
    }
    SECTION("matmul_bt") {
        Parameter a("a", random_tensor({3, 4}, rng));
        Parameter b("b", random_tensor({5, 4}, rng));
        auto run = [&] {
            Tape tape;
            Var loss = tape.sum(tape.sigmoid(tape.matmul_bt(tape.param(a), tape.param(b))));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&a, &b}, run));
    }
    SECTION("sigmoid-relu chain") {
        Parameter x("x", random_tensor({2, 5}, rng));
        auto run = [&] {
            Tape tape;
            Var loss = tape.mean(tape.sigmoid(tape.relu(tape.param(x))));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&x}, run));
    }
    SECTION("concat_cols") {
        Parameter a("a", random_tensor({4, 2}, rng));
        Parameter b("b", random_tensor({4, 3}, rng));
        auto run = [&] {
            Tape tape;
            Var c = tape.concat_cols(tape.param(a), tape.param(b));
            Var loss = tape.sum(tape.mul(c, c));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&a, &b}, run));
    }
    SECTION("mean_aggregate") {
        Parameter src("src", random_tensor({6, 3}, rng));
        auto adj = std::make_shared<AdjacencyList>(
            tip_test::random_adjacency(5, 6, 0.4, rng));
        auto run = [&] {
            Tape tape;
            Var out = tape.mean_aggregate(tape.param(src), adj);
            Var loss = tape.sum(tape.mul(out, out));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&src}, run));
    }
    SECTION("gather and reshape and row_sum") {
        Parameter x("x", random_tensor({5, 4}, rng));
        auto run = [&] {
            Tape tape;
            Var g = tape.gather_rows(tape.param(x), {4, 0, 2, 2});
            Var r = tape.reshape(g, {2, 8});
            Var loss = tape.sum(tape.sigmoid(tape.row_sum(r)));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&x}, run));
    }
    SECTION("gather_elements and log_clamped and affine") {
        Parameter x("x", random_tensor({4, 4}, rng, 0.1, 2.0));
        auto run = [&] {
            Tape tape;
            Var g = tape.gather_elements(tape.param(x), {{0, 1}, {3, 3}, {2, 0}});
            Var loss = tape.mean(tape.log_clamped(tape.affine(g, 0.4, 0.1)));
            tape.backward(loss);
            return tape.value(loss)[0];
        };
        CHECK(gradients_match_fd({&x}, run));
    }
}

TEST_CASE("forward passes are pure") {
    std::mt19937_64 rng(3);
    Tensor a = random_tensor({4, 4}, rng);
    Tensor b = random_tensor({4, 4}, rng);
    Tape t1, t2;
    const Tensor& r1 = t1.value(t1.sigmoid(t1.matmul(t1.constant(a), t1.constant(b))));
    const Tensor& r2 = t2.value(t2.sigmoid(t2.matmul(t2.constant(a), t2.constant(b))));
    CHECK(r1.values() == r2.values());
}

TEST_CASE("adam step") {
    SECTION("zero gradient leaves parameters unchanged") {
        Parameter p("p", Tensor({3}, {1, 2, 3}));
        AdamState adam(0.01);
        adam.step({&p});
        CHECK(p.value.values() == std::vector<double>{1, 2, 3});
    }
    SECTION("first step magnitude is about lr for constant gradient") {
        Parameter p("p", Tensor({4}, {1, 1, 1, 1}));
        p.grad.fill(0.37);
        AdamState adam(0.01);
        adam.step({&p});
        for (std::size_t i = 0; i < 4; ++i) {
            // closed form: first step is lr * g / (|g| + eps') ~ lr
            CHECK(std::fabs(1.0 - p.value[i]) == Catch::Approx(0.01).epsilon(0.01));
        }
        CHECK(p.grad.values() == std::vector<double>{0, 0, 0, 0});
    }
    SECTION("identical models and grads give identical updates") {
        std::mt19937_64 rng(9);
        Tensor init = random_tensor({3, 3}, rng);
        Tensor grad = random_tensor({3, 3}, rng);
        Parameter p1("w", init), p2("w", init);
        p1.grad = grad;
        p2.grad = grad;
        AdamState a1(0.01), a2(0.01);
        a1.step({&p1});
        a2.step({&p2});
        CHECK(p1.value.values() == p2.value.values());
    }
    SECTION("NaN gradient aborts with the parameter name") {
        Parameter p("broken", Tensor({2}, {1, 1}));
        p.grad[1] = std::nan("");
        AdamState adam;
        CHECK_THROWS_WITH(adam.step({&p}), Catch::Matchers::ContainsSubstring("broken"));
    }
}

TEST_CASE("xavier_init") {
    SECTION("reproducible from seed") {
        CHECK(xavier_init(5, 7, 123).values() == xavier_init(5, 7, 123).values());
    }
    SECTION("bounds respected") {
        Tensor t = xavier_init(20, 50, 99);
        const double bound = std::sqrt(6.0 / 70.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(std::fabs(t[i]) <= bound);
        }
    }
    SECTION("sample mean near zero") {
        Tensor t = xavier_init(100, 100, 5);  // 10^4 draws
        const double bound = std::sqrt(6.0 / 200.0);
        double mean = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) mean += t[i];
        mean /= static_cast<double>(t.size());
        const double sigma = bound / std::sqrt(3.0) / 100.0;  // sd of the sample mean
        CHECK(std::fabs(mean) < 3.0 * sigma);
    }
    SECTION("positive dims required") {
        CHECK_THROWS_AS(xavier_init(0, 3, 1), std::invalid_argument);
    }
}
