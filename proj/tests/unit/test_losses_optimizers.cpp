#include <doctest.h>

#include <cmath>

#include "pmcast/errors.hpp"
#include "pmcast/nn/losses.hpp"
#include "pmcast/nn/optimizers.hpp"
#include "testutil.hpp"

using namespace pmcast;

TEST_CASE("loss is zero with zero gradient when pred equals target") {
    Tensor p(4), t(4);
    for (int i = 0; i < 4; ++i) p(i) = t(i) = 0.3 * i - 1;
    for (Loss kind : {Loss::mse, Loss::mae}) {
        LossResult r = loss(kind, p, t);
        CHECK(r.value == 0.0);
        for (int i = 0; i < 4; ++i) CHECK(r.grad(i) == 0.0);
    }
}

TEST_CASE("mse hand case: preds (3,4) against zeros give 12.5") {
    Tensor p(2), t(2);
    p(0) = 3;
    p(1) = 4;
    LossResult r = loss(Loss::mse, p, t);
    CHECK(r.value == doctest::Approx(12.5).epsilon(1e-15));
    CHECK(r.grad(0) == doctest::Approx(2.0 * 3 / 2).epsilon(1e-15));
    CHECK(r.grad(1) == doctest::Approx(2.0 * 4 / 2).epsilon(1e-15));
}

TEST_CASE("mae hand case: preds (3,-4) against zeros give 3.5") {
    Tensor p(2), t(2);
    p(0) = 3;
    p(1) = -4;
    LossResult r = loss(Loss::mae, p, t);
    CHECK(r.value == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(r.grad(0) == 0.5);
    CHECK(r.grad(1) == -0.5);
}

TEST_CASE("mae gradient at an exact tie is zero") {
    Tensor p(3), t(3);
    p(0) = 1;
    t(0) = 1;
    p(1) = 2;
    t(1) = 0;
    p(2) = 0;
    t(2) = 2;
    LossResult r = loss(Loss::mae, p, t);
    CHECK(r.grad(0) == 0.0);
    CHECK(r.grad(1) == doctest::Approx(1.0 / 3));
    CHECK(r.grad(2) == doctest::Approx(-1.0 / 3));
}

TEST_CASE("loss rejects mismatched shapes") {
    Tensor p(3), t(4);
    CHECK_THROWS_AS(loss(Loss::mse, p, t), ShapeError);
}

TEST_CASE("optimizers leave parameters unchanged under zero gradients") {
    for (Optimizer kind : {Optimizer::adam, Optimizer::rmsprop}) {
        Tensor p(3);
        p(0) = 1;
        p(1) = -2;
        p(2) = 0.5;
        Tensor g(3);
        OptimizerState st;
        st.init(kind, {&p});
        optimizer_step(st, {&p}, {&g}, 0.001);
        CHECK(p(0) == 1.0);
        CHECK(p(1) == -2.0);
        CHECK(p(2) == 0.5);
        if (kind == Optimizer::adam)
            for (double v : st.m[0].flat()) CHECK(v == 0.0);
        for (double v : st.v[0].flat()) CHECK(v == 0.0);
    }
}

TEST_CASE("adam first step equals the analytic bias-corrected update") {
    for (double g0 : {0.7, -1.3, 4.0}) {
        Tensor p(1), g(1);
        g(0) = g0;
        OptimizerState st;
        st.init(Optimizer::adam, {&p});
        const double lr = 0.01;
        optimizer_step(st, {&p}, {&g}, lr);
        // m_hat = g, v_hat = g^2 after one step
        const double expected = -lr * g0 / (std::fabs(g0) + st.epsilon);
        CHECK(p(0) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(std::fabs(p(0) + lr * (g0 > 0 ? 1.0 : -1.0)) < lr * 1e-6);
    }
}

TEST_CASE("rmsprop first step equals -lr*g/sqrt(0.1 g^2 + eps)") {
    for (double g0 : {0.7, -1.3, 4.0}) {
        Tensor p(1), g(1);
        g(0) = g0;
        OptimizerState st;
        st.init(Optimizer::rmsprop, {&p});
        const double lr = 0.005;
        optimizer_step(st, {&p}, {&g}, lr);
        const double expected = -lr * g0 / std::sqrt(0.1 * g0 * g0 + st.epsilon);
        CHECK(p(0) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("optimizer_step catches shape mismatches") {
    Tensor p(3), g(4);
    OptimizerState st;
    st.init(Optimizer::adam, {&p});
    CHECK_THROWS_AS(optimizer_step(st, {&p}, {&g}, 0.001), ShapeError);
}

TEST_CASE("adam converges on a scalar quadratic") {
    Tensor p(1);
    p(0) = 5.0;
    OptimizerState st;
    st.init(Optimizer::adam, {&p});
    Tensor g(1);
    for (int i = 0; i < 3000; ++i) {
        g(0) = 2.0 * (p(0) - 1.5); // d/dp (p - 1.5)^2
        optimizer_step(st, {&p}, {&g}, 0.01);
    }
    CHECK(p(0) == doctest::Approx(1.5).epsilon(1e-3));
}
