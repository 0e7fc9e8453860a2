#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "wnet/grad_check.hpp"
#include "wnet/layers.hpp"
#include "wnet/modules.hpp"
#include "wnet/optimizer.hpp"
#include "wnet/rng.hpp"

using namespace wnet;

namespace {

Tensor<double> random_tensor(Rng& rng, std::vector<i64> shape, double lo = -1.0,
                             double hi = 1.0) {
    Tensor<double> t = Tensor<double>::zeros(std::move(shape));
    double* p = t.mutable_data();
    for (i64 i = 0; i < t.numel(); ++i) p[i] = rng.uniform(lo, hi);
    return t;
}

// Direct quadruple-loop convolution, written independently of the
// im2col-based layer so the two can cross-check each other.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w,
                          const Tensor<double>& b, i64 stride, i64 pad) {
    const i64 n = x.dim(0), c = x.dim(1), h = x.dim(2), ww = x.dim(3);
    const i64 f = w.dim(0), k = w.dim(2);
    const i64 oh = (h + 2 * pad - k) / stride + 1;
    const i64 ow = (ww + 2 * pad - k) / stride + 1;
    Tensor<double> out = Tensor<double>::zeros({n, f, oh, ow});
    double* op = out.mutable_data();
    const double* xp = x.data();
    const double* wp = w.data();
    for (i64 ni = 0; ni < n; ++ni) {
        for (i64 fi = 0; fi < f; ++fi) {
            for (i64 oy = 0; oy < oh; ++oy) {
                for (i64 ox = 0; ox < ow; ++ox) {
                    double acc = b.data()[fi];
                    for (i64 ci = 0; ci < c; ++ci) {
                        for (i64 ky = 0; ky < k; ++ky) {
                            for (i64 kx = 0; kx < k; ++kx) {
                                const i64 iy = oy * stride + ky - pad;
                                const i64 ix = ox * stride + kx - pad;
                                if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                                acc += xp[((ni * c + ci) * h + iy) * ww + ix] *
                                       wp[((fi * c + ci) * k + ky) * k + kx];
                            }
                        }
                    }
                    op[((ni * f + fi) * oh + oy) * ow + ox] = acc;
                }
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("sigmoid forward matches frozen values and saturates safely") {
    Tape<double> tape;
    const Var<double> x =
        tape.watch(Tensor<double>::from({5, 1}, {0.0, 2.0, -1.0, 100.0, -100.0}));
    const Var<double> y = nn::sigmoid(tape, x);
    const std::vector<double> v = y.value.values();
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.8807970779778823).epsilon(1e-12));
    CHECK(v[2] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    CHECK(v[3] == doctest::Approx(1.0));
    CHECK(v[4] >= 0.0);
    CHECK(std::isfinite(v[4]));
}

TEST_CASE("sigmoid gradient passes the finite-difference check") {
    Rng rng(31);
    Parameter<double> x;
    x.name = "x";
    x.value = random_tensor(rng, {4, 1}, -3.0, 3.0);
    const GradCheckResult res = grad_check({&x}, [&](Tape<double>& tape) {
        const Var<double> s = nn::sigmoid(tape, tape.param(x));
        return ops::sum(tape, ops::mul(tape, s, s));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-7));
}

TEST_CASE("softmax rows match the frozen oracle and sum to one") {
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({2, 3}, {1, 2, 3, 501, 502, 503}));
    const Var<double> y = nn::softmax(tape, x);
    const std::vector<double> v = y.value.values();
    CHECK(v[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.24472847105479764).epsilon(1e-12));
    CHECK(v[2] == doctest::Approx(0.6652409557748218).epsilon(1e-12));
    CHECK(v[3] == doctest::Approx(v[0]).epsilon(1e-12));
    CHECK(v[4] == doctest::Approx(v[1]).epsilon(1e-12));
    CHECK(v[5] == doctest::Approx(v[2]).epsilon(1e-12));
    CHECK(v[0] + v[1] + v[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax gradient passes the finite-difference check") {
    Rng rng(37);
    Parameter<double> x;
    x.name = "logits";
    x.value = random_tensor(rng, {3, 4}, -2.0, 2.0);
    Tensor<double> mixer = random_tensor(rng, {3, 4});
    const GradCheckResult res = grad_check({&x}, [&](Tape<double>& tape) {
        const Var<double> y = nn::softmax(tape, tape.param(x));
        return ops::sum(tape, ops::mul(tape, y, Tape<double>::constant(mixer.clone())));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-7));
}

TEST_CASE("cross-entropy of uniform logits is log of the class count") {
    Tape<double> tape;
    const Var<double> logits = tape.watch(Tensor<double>::zeros({4, 3}));
    const nn::SoftmaxCrossEntropy<double> ce =
        nn::softmax_cross_entropy(tape, logits, {0, 1, 2, 0});
    CHECK(ce.loss.value.item() == doctest::Approx(1.0986122886681098).epsilon(1e-12));
    CHECK(ce.probs.data()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("cross-entropy approaches zero at confident correct predictions") {
    Tape<double> tape;
    const Var<double> logits =
        tape.watch(Tensor<double>::from({2, 2}, {50.0, -50.0, -50.0, 50.0}));
    const nn::SoftmaxCrossEntropy<double> ce = nn::softmax_cross_entropy(tape, logits, {0, 1});
    CHECK(ce.loss.value.item() >= 0.0);
    CHECK(ce.loss.value.item() < 1e-12);
}

TEST_CASE("cross-entropy rejects out-of-range labels") {
    Tape<double> tape;
    const Var<double> logits = tape.watch(Tensor<double>::zeros({2, 3}));
    CHECK_THROWS_AS(nn::softmax_cross_entropy(tape, logits, {0, 3}), ValueError);
    CHECK_THROWS_AS(nn::softmax_cross_entropy(tape, logits, {-1, 0}), ValueError);
    CHECK_THROWS_AS(nn::softmax_cross_entropy(tape, logits, {0}), ShapeError);
}

TEST_CASE("fused cross-entropy gradient equals probs minus onehot over n") {
    Tape<double> tape;
    const Var<double> logits =
        tape.watch(Tensor<double>::from({2, 3}, {0.3, -0.2, 0.9, 1.4, 0.1, -0.7}));
    const nn::SoftmaxCrossEntropy<double> ce = nn::softmax_cross_entropy(tape, logits, {2, 0});
    tape.backward(ce.loss);
    const Tensor<double> g = tape.grad(logits);
    const double* gp = g.data();
    const double* pp = ce.probs.data();
    for (i64 r = 0; r < 2; ++r) {
        for (i64 j = 0; j < 3; ++j) {
            const double onehot = (r == 0 && j == 2) || (r == 1 && j == 0) ? 1.0 : 0.0;
            CHECK(gp[r * 3 + j] ==
                  doctest::Approx((pp[r * 3 + j] - onehot) / 2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("cross-entropy gradient passes the finite-difference check") {
    Rng rng(41);
    Parameter<double> logits;
    logits.name = "logits";
    logits.value = random_tensor(rng, {5, 3}, -2.0, 2.0);
    const std::vector<i64> labels{0, 2, 1, 1, 0};
    const GradCheckResult res = grad_check({&logits}, [&](Tape<double>& tape) {
        return nn::softmax_cross_entropy(tape, tape.param(logits), labels).loss;
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-7));
}

TEST_CASE("binary cross-entropy matches hand values and clips the log") {
    Tape<double> tape;
    const Var<double> half = tape.watch(Tensor<double>::full({2, 1}, 0.5));
    const Var<double> loss =
        nn::binary_cross_entropy(tape, half, Tensor<double>::from({2, 1}, {1.0, 0.0}));
    CHECK(loss.value.item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Tape<double> tape2;
    const Var<double> zero = tape2.watch(Tensor<double>::full({1, 1}, 0.0));
    const Var<double> clipped =
        nn::binary_cross_entropy(tape2, zero, Tensor<double>::from({1, 1}, {1.0}));
    CHECK(clipped.value.item() == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));

    Tape<double> tape3;
    const Var<double> p = tape3.watch(Tensor<double>::full({2, 1}, 0.5));
    CHECK_THROWS_AS(nn::binary_cross_entropy(tape3, p, Tensor<double>::from({1, 1}, {1.0})),
                    ShapeError);
}

TEST_CASE("binary cross-entropy gradient through sigmoid checks out") {
    Rng rng(43);
    Parameter<double> z;
    z.name = "z";
    z.value = random_tensor(rng, {6, 1}, -2.0, 2.0);
    const Tensor<double> targets =
        Tensor<double>::from({6, 1}, {1.0, 0.0, 1.0, 1.0, 0.0, 0.0});
    const GradCheckResult res = grad_check({&z}, [&](Tape<double>& tape) {
        const Var<double> probs = nn::sigmoid(tape, tape.param(z));
        return nn::binary_cross_entropy(tape, probs, targets.clone());
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-7));
}

TEST_CASE("conv2d output extent follows the stride-pad arithmetic") {
    CHECK(nn::detail::conv_out_extent(224, 7, 2, 3) == 112);
    CHECK(nn::detail::conv_out_extent(32, 3, 1, 1) == 32);
    CHECK(nn::detail::conv_out_extent(5, 3, 2, 1) == 3);
    CHECK(nn::detail::conv_out_extent(3, 2, 1, 0) == 2);
}

TEST_CASE("conv2d matches a frozen hand-checked case") {
    Tape<double> tape;
    const Var<double> x =
        tape.watch(Tensor<double>::from({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    const Var<double> w = tape.watch(Tensor<double>::from({1, 1, 2, 2}, {1, 0, 0, -1}));
    const Var<double> b = tape.watch(Tensor<double>::from({1}, {0.5}));
    const Var<double> y = nn::conv2d(tape, x, w, b, 1, 0);
    CHECK(y.value.shape() == std::vector<i64>{1, 1, 2, 2});
    for (double v : y.value.values()) CHECK(v == doctest::Approx(-3.5).epsilon(1e-12));
}

TEST_CASE("conv2d agrees with a naive direct convolution") {
    Rng rng(47);
    struct Case {
        i64 n, c, h, f, k, stride, pad;
    };
    for (const Case cs : {Case{2, 3, 6, 4, 3, 1, 1}, Case{1, 2, 7, 3, 3, 2, 1},
                          Case{2, 1, 5, 2, 1, 1, 0}, Case{1, 2, 8, 2, 2, 2, 0}}) {
        const Tensor<double> x = random_tensor(rng, {cs.n, cs.c, cs.h, cs.h});
        const Tensor<double> w = random_tensor(rng, {cs.f, cs.c, cs.k, cs.k});
        const Tensor<double> b = random_tensor(rng, {cs.f});
        Tape<double> tape;
        const Var<double> y =
            nn::conv2d(tape, Tape<double>::constant(x.clone()), Tape<double>::constant(w.clone()),
                       Tape<double>::constant(b.clone()), cs.stride, cs.pad);
        const Tensor<double> expect = naive_conv(x, w, b, cs.stride, cs.pad);
        REQUIRE(y.value.shape() == expect.shape());
        for (i64 i = 0; i < expect.numel(); ++i) {
            CHECK(y.value.data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("conv2d gradients pass the finite-difference check") {
    Rng rng(53);
    Parameter<double> x;
    x.name = "x";
    x.value = random_tensor(rng, {2, 2, 5, 5});
    Parameter<double> w;
    w.name = "w";
    w.value = random_tensor(rng, {3, 2, 3, 3});
    Parameter<double> b;
    b.name = "b";
    b.value = random_tensor(rng, {3});
    const GradCheckResult res = grad_check({&x, &w, &b}, [&](Tape<double>& tape) {
        const Var<double> y =
            nn::conv2d(tape, tape.param(x), tape.param(w), tape.param(b), 2, 1);
        return ops::mean(tape, ops::mul(tape, y, y));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-6));
}

TEST_CASE("batchnorm training normalizes with biased variance") {
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({4, 1, 1, 1}, {1, 2, 3, 4}));
    const Var<double> gamma = tape.watch(Tensor<double>::from({1}, {1.0}));
    const Var<double> beta = tape.watch(Tensor<double>::from({1}, {0.0}));
    const nn::BatchNormOut<double> out = nn::batchnorm2d_train(tape, x, gamma, beta, 1e-5);
    CHECK(out.batch_mean[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(out.batch_var[0] == doctest::Approx(1.25).epsilon(1e-12));
    const std::vector<double> y = out.y.value.values();
    CHECK(y[0] == doctest::Approx(-1.3416354199689269).epsilon(1e-10));
    CHECK(y[1] == doctest::Approx(-0.447211806656309).epsilon(1e-10));
    CHECK(y[2] == doctest::Approx(0.447211806656309).epsilon(1e-10));
    CHECK(y[3] == doctest::Approx(1.3416354199689269).epsilon(1e-10));
}

TEST_CASE("batchnorm affine parameters rescale and shift") {
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({4, 1, 1, 1}, {1, 2, 3, 4}));
    const Var<double> gamma = tape.watch(Tensor<double>::from({1}, {2.0}));
    const Var<double> beta = tape.watch(Tensor<double>::from({1}, {1.0}));
    const nn::BatchNormOut<double> out = nn::batchnorm2d_train(tape, x, gamma, beta, 1e-5);
    const std::vector<double> y = out.y.value.values();
    CHECK(y[0] == doctest::Approx(2.0 * -1.3416354199689269 + 1.0).epsilon(1e-10));
    CHECK(y[3] == doctest::Approx(2.0 * 1.3416354199689269 + 1.0).epsilon(1e-10));
}

TEST_CASE("batchnorm training gradients pass the finite-difference check") {
    Rng rng(59);
    Parameter<double> x;
    x.name = "x";
    x.value = random_tensor(rng, {3, 2, 2, 2});
    Parameter<double> gamma;
    gamma.name = "gamma";
    gamma.value = random_tensor(rng, {2}, 0.5, 1.5);
    Parameter<double> beta;
    beta.name = "beta";
    beta.value = random_tensor(rng, {2}, -0.5, 0.5);
    const Tensor<double> mixer = random_tensor(rng, {3, 2, 2, 2});
    const GradCheckResult res = grad_check({&x, &gamma, &beta}, [&](Tape<double>& tape) {
        const nn::BatchNormOut<double> out = nn::batchnorm2d_train(
            tape, tape.param(x), tape.param(gamma), tape.param(beta), 1e-5);
        return ops::sum(tape, ops::mul(tape, out.y, Tape<double>::constant(mixer.clone())));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-6));
}

TEST_CASE("batchnorm eval uses the provided running statistics") {
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({2, 1, 1, 1}, {3.0, 7.0}));
    const Var<double> gamma = tape.watch(Tensor<double>::from({1}, {2.0}));
    const Var<double> beta = tape.watch(Tensor<double>::from({1}, {-1.0}));
    const Tensor<double> rm = Tensor<double>::from({1}, {5.0});
    const Tensor<double> rv = Tensor<double>::from({1}, {4.0});
    const Var<double> y = nn::batchnorm2d_eval(tape, x, gamma, beta, rm, rv, 0.0);
    const std::vector<double> v = y.value.values();
    CHECK(v[0] == doctest::Approx(2.0 * (3.0 - 5.0) / 2.0 - 1.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(2.0 * (7.0 - 5.0) / 2.0 - 1.0).epsilon(1e-12));
}

TEST_CASE("batchnorm eval gradients pass the finite-difference check") {
    Rng rng(61);
    Parameter<double> x;
    x.name = "x";
    x.value = random_tensor(rng, {2, 2, 3, 3});
    Parameter<double> gamma;
    gamma.name = "gamma";
    gamma.value = random_tensor(rng, {2}, 0.5, 1.5);
    Parameter<double> beta;
    beta.name = "beta";
    beta.value = random_tensor(rng, {2}, -0.5, 0.5);
    const Tensor<double> rm = Tensor<double>::from({2}, {0.1, -0.2});
    const Tensor<double> rv = Tensor<double>::from({2}, {0.9, 1.4});
    const Tensor<double> mixer = random_tensor(rng, {2, 2, 3, 3});
    const GradCheckResult res = grad_check({&x, &gamma, &beta}, [&](Tape<double>& tape) {
        const Var<double> y = nn::batchnorm2d_eval(tape, tape.param(x), tape.param(gamma),
                                                   tape.param(beta), rm, rv, 1e-5);
        return ops::sum(tape, ops::mul(tape, y, Tape<double>::constant(mixer.clone())));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-6));
}

TEST_CASE("maxpool picks window maxima and ignores padding") {
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from(
        {1, 1, 4, 4}, {1, 3, 2, 4, 5, 6, 7, 8, -1, -2, -3, -4, 0, 1, 2, 3}));
    const Var<double> y = nn::maxpool2d(tape, x, 2, 2, 0);
    CHECK(y.value.shape() == std::vector<i64>{1, 1, 2, 2});
    CHECK(y.value.values() == std::vector<double>{6, 8, 1, 3});

    Tape<double> tape2;
    const Var<double> neg = tape2.watch(Tensor<double>::full({1, 1, 2, 2}, -5.0));
    const Var<double> pooled = nn::maxpool2d(tape2, neg, 3, 2, 1);
    for (double v : pooled.value.values()) CHECK(v == -5.0);
}

TEST_CASE("maxpool backward routes gradient to the first maximum") {
    Tape<double> tape;
    const Var<double> x =
        tape.watch(Tensor<double>::from({1, 1, 2, 2}, {7.0, 7.0, 1.0, 7.0}));
    const Var<double> y = nn::maxpool2d(tape, x, 2, 2, 0);
    const Var<double> loss = ops::sum(tape, y);
    tape.backward(loss);
    CHECK(tape.grad(x).values() == std::vector<double>{1, 0, 0, 0});
}

TEST_CASE("maxpool gradients pass the finite-difference check") {
    Rng rng(67);
    Parameter<double> x;
    x.name = "x";
    x.value = random_tensor(rng, {2, 2, 5, 5}, -10.0, 10.0);
    const GradCheckResult res = grad_check({&x}, [&](Tape<double>& tape) {
        const Var<double> y = nn::maxpool2d(tape, tape.param(x), 3, 2, 1);
        return ops::mean(tape, ops::mul(tape, y, y));
    });
    INFO(res.worst_coord);
    CHECK(res.ok(1e-6));
}

TEST_CASE("global average pool reduces each channel plane") {
    Tape<double> tape;
    const Var<double> x =
        tape.watch(Tensor<double>::from({1, 2, 2, 2}, {1, 2, 3, 4, 10, 20, 30, 40}));
    const Var<double> y = nn::global_avgpool(tape, x);
    CHECK(y.value.shape() == std::vector<i64>{1, 2});
    CHECK(y.value.values() == std::vector<double>{2.5, 25.0});
    const Var<double> loss = ops::sum(tape, y);
    tape.backward(loss);
    CHECK(tape.grad(x).values() == std::vector<double>(8, 0.25));
}

TEST_CASE("batchnorm module decays running statistics in training mode") {
    nn::BatchNorm2d<double> bn("bn", 1);
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({4, 1, 1, 1}, {1, 2, 3, 4}));
    bn.forward(tape, x, /*training=*/true);

    std::vector<nn::ModuleBuffer<double>*> buffers;
    bn.collect_buffers(buffers);
    REQUIRE(buffers.size() == 2);
    CHECK(buffers[0]->name == "bn.running_mean");
    CHECK(buffers[0]->value.data()[0] == doctest::Approx(0.1 * 2.5).epsilon(1e-12));
    CHECK(buffers[1]->value.data()[0] == doctest::Approx(0.9 * 1.0 + 0.1 * 1.25).epsilon(1e-12));

    const double rm = buffers[0]->value.data()[0];
    Tape<double> tape2;
    tape2.set_grad_enabled(false);
    const Var<double> x2 = Tape<double>::constant(Tensor<double>::from({4, 1, 1, 1}, {5, 6, 7, 8}));
    bn.forward(tape2, x2, /*training=*/false);
    CHECK(buffers[0]->value.data()[0] == rm);
}

TEST_CASE("frozen batchnorm still tracks running statistics") {
    nn::BatchNorm2d<double> bn("bn", 1);
    bn.set_trainable(false);
    Tape<double> tape;
    const Var<double> x = tape.watch(Tensor<double>::from({2, 1, 1, 1}, {4.0, 8.0}));
    const Var<double> y = bn.forward(tape, x, /*training=*/true);
    CHECK(y.tracked());

    std::vector<nn::ModuleBuffer<double>*> buffers;
    bn.collect_buffers(buffers);
    CHECK(buffers[0]->value.data()[0] == doctest::Approx(0.1 * 6.0).epsilon(1e-12));

    std::vector<Parameter<double>*> params;
    bn.collect(params);
    for (Parameter<double>* p : params) CHECK_FALSE(p->trainable);
}

TEST_CASE("conv module initializes bias to zero and names its parameters") {
    Rng rng(71);
    nn::Conv2d<double> conv("stage1.conv", 3, 8, 3, 1, 1, rng);
    std::vector<Parameter<double>*> params;
    conv.collect(params);
    REQUIRE(params.size() == 2);
    CHECK(params[0]->name == "stage1.conv.weight");
    CHECK(params[1]->name == "stage1.conv.bias");
    CHECK(params[0]->value.shape() == std::vector<i64>{8, 3, 3, 3});
    double weight_norm = 0.0;
    for (double v : params[0]->value.values()) weight_norm += v * v;
    CHECK(weight_norm > 0.0);
    for (double v : params[1]->value.values()) CHECK(v == 0.0);

    Tape<double> tape;
    const Var<double> y = conv.forward(tape, tape.watch(Tensor<double>::zeros({2, 3, 6, 6})));
    CHECK(y.value.shape() == std::vector<i64>{2, 8, 6, 6});
}

TEST_CASE("dense module applies weight then bias") {
    Rng rng(73);
    nn::Dense<double> fc("head.fc", 4, 2, rng);
    std::vector<Parameter<double>*> params;
    fc.collect(params);
    REQUIRE(params.size() == 2);
    params[0]->value = Tensor<double>::from({4, 2}, {1, 0, 0, 1, 1, 0, 0, 1});
    params[1]->value = Tensor<double>::from({2}, {0.5, -0.5});
    Tape<double> tape;
    const Var<double> y =
        fc.forward(tape, tape.watch(Tensor<double>::from({1, 4}, {1, 2, 3, 4})));
    CHECK(y.value.values() == std::vector<double>{4.5, 5.5});
}

TEST_CASE("residual block preserves shape without projection") {
    Rng rng(79);
    nn::ResidualBlock<double> block("b1", 4, 4, 1, rng);
    std::vector<Parameter<double>*> params;
    block.collect(params);
    CHECK(params.size() == 8);

    Tape<double> tape;
    const Var<double> y =
        block.forward(tape, tape.watch(Tensor<double>::zeros({2, 4, 6, 6})), true);
    CHECK(y.value.shape() == std::vector<i64>{2, 4, 6, 6});
}

TEST_CASE("residual block projects when stride or width changes") {
    Rng rng(83);
    nn::ResidualBlock<double> block("b2", 4, 8, 2, rng);
    std::vector<Parameter<double>*> params;
    block.collect(params);
    CHECK(params.size() == 12);

    Tape<double> tape;
    const Var<double> y =
        block.forward(tape, tape.watch(Tensor<double>::zeros({2, 4, 6, 6})), true);
    CHECK(y.value.shape() == std::vector<i64>{2, 8, 3, 3});
}

TEST_CASE("residual path really adds the shortcut") {
    Rng rng(89);
    nn::ResidualBlock<double> block("b3", 2, 2, 1, rng);
    std::vector<Parameter<double>*> params;
    block.collect(params);
    for (Parameter<double>* p : params) {
        if (p->name.find("gamma") != std::string::npos) continue;
        double* v = p->value.mutable_data();
        for (i64 i = 0; i < p->value.numel(); ++i) v[i] = 0.0;
    }

    Tape<double> tape;
    const Tensor<double> x = Tensor<double>::from({1, 2, 1, 1}, {3.0, -2.0});
    const Var<double> y = block.forward(tape, tape.watch(x.clone()), true);
    CHECK(y.value.values() == std::vector<double>{3.0, 0.0});
}

TEST_CASE("adam first step moves by the learning rate") {
    Parameter<double> theta;
    theta.name = "theta";
    theta.value = Tensor<double>::full({3}, 1.0);

    Adam<double> adam(1e-3);
    Tape<double> tape;
    const Var<double> loss = ops::sum(tape, tape.param(theta));
    tape.backward(loss);
    adam.step(tape, {&theta});
    for (double v : theta.value.values()) {
        CHECK(v == doctest::Approx(0.99900000001).epsilon(1e-12));
    }
}

TEST_CASE("adam skips frozen parameters and rejects unbound trainable ones") {
    Parameter<double> frozen;
    frozen.name = "frozen";
    frozen.value = Tensor<double>::full({2}, 5.0);
    frozen.trainable = false;

    Parameter<double> active;
    active.name = "active";
    active.value = Tensor<double>::full({2}, 1.0);

    Adam<double> adam(0.1);
    Tape<double> tape;
    const Var<double> loss = ops::sum(tape, tape.param(active));
    tape.backward(loss);
    adam.step(tape, {&frozen, &active});
    CHECK(frozen.value.values() == std::vector<double>{5.0, 5.0});
    CHECK(active.value.data()[0] < 1.0);

    Parameter<double> unbound;
    unbound.name = "unbound";
    unbound.value = Tensor<double>::full({2}, 1.0);
    Tape<double> tape2;
    const Var<double> loss2 = ops::sum(tape2, tape2.param(active));
    tape2.backward(loss2);
    CHECK_THROWS_AS(adam.step(tape2, {&active, &unbound}), ValueError);
}

TEST_CASE("adam minimizes a separable quadratic") {
    Parameter<double> theta;
    theta.name = "theta";
    theta.value = Tensor<double>::from({2}, {-4.0, 9.0});

    Adam<double> adam(0.1);
    for (int step = 0; step < 800; ++step) {
        Tape<double> tape;
        const Var<double> t = tape.param(theta);
        const Var<double> target = Tape<double>::constant(Tensor<double>::from({2}, {3.0, -1.0}));
        const Var<double> diff = ops::sub(tape, t, target);
        const Var<double> loss = ops::sum(tape, ops::mul(tape, diff, diff));
        tape.backward(loss);
        adam.step(tape, {&theta});
    }
    CHECK(theta.value.data()[0] == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(theta.value.data()[1] == doctest::Approx(-1.0).epsilon(1e-3));
}
