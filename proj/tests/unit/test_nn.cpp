#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tnar/errors.hpp"
#include "tnar/nn/adam.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/nn/prob.hpp"

using namespace tnar::nn;
using tnar::numkit::Rng;
using tnar::numkit::Vector;

namespace {

Mlp identity_net(std::size_t n) {
    MlpSpec spec;
    spec.layer_dims = {n, n};
    spec.head = OutputHead::identity;
    Mlp net{spec, MlpParams::zeros(spec)};
    for (std::size_t i = 0; i < n; ++i) net.params.weights[0](i, i) = 1.0;
    return net;
}

const std::vector<Activation> kActs = {Activation::tanh(), Activation::relu(),
                                       Activation::leaky_relu(0.1)};

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("forward of hand networks") {
    CHECK(forward(identity_net(3), Vector{1, -2, 3}) == Vector{1, -2, 3});
    const Mlp lin = oracle::linear_model({{1, 0}, {-1, 0}});
    CHECK(forward(lin, Vector{2, 5}) == Vector{2, -2});
}

TEST_CASE("forward matches an independent evaluation") {
    for (const auto& act : kActs) {
        const Mlp net = oracle::random_net({3, 7, 5, 2}, act, 17);
        Rng rng(1);
        for (int i = 0; i < 10; ++i) {
            const Vector x = oracle::random_vector(rng, 3);
            CHECK(oracle::rel_err(forward(net, x), oracle::reference_forward(net, x)) < 1e-14);
        }
    }
}

TEST_CASE("activation names round-trip") {
    for (const auto& act : kActs) CHECK(Activation::parse(act.name()) == act);
    CHECK(Activation::parse("identity") == Activation::identity());
    CHECK_THROWS(Activation::parse("sigmoid"));
}

TEST_CASE("softmax") {
    const ProbVec p = softmax(Vector{0, 0});
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    const ProbVec u = softmax(Vector{3, 3, 3, 3});
    for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-15));
    const ProbVec big = softmax(Vector{1000, 0});
    CHECK(big[0] == 1.0);
    CHECK(std::isfinite(big[1]));
    CHECK_THROWS(ProbVec(Vector{0.7, 0.7}));
}

TEST_CASE("kl, entropy and cross entropy closed forms") {
    const ProbVec p(Vector{0.2, 0.3, 0.5});
    CHECK(kl_div(p, p) == 0.0);
    CHECK(std::abs(kl_div(ProbVec(Vector{1, 0}), ProbVec(Vector{0.5, 0.5})) - std::log(2.0)) <= 1e-12);
    const double expect = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
    CHECK(std::abs(kl_div(ProbVec(Vector{0.5, 0.5}), ProbVec(Vector{0.9, 0.1})) - expect) <= 1e-12);
    CHECK(expect == doctest::Approx(0.510826).epsilon(1e-6));

    CHECK(entropy(ProbVec(Vector{0, 1, 0})) == 0.0);
    for (std::size_t k = 2; k <= 10; ++k) {
        const ProbVec uni(Vector(k, 1.0 / static_cast<double>(k)));
        CHECK(std::abs(entropy(uni) - std::log(static_cast<double>(k))) <= 1e-12);
    }
    CHECK(std::abs(entropy(ProbVec(Vector{0.5, 0.25, 0.25})) - 1.5 * std::log(2.0)) <= 1e-12);
    CHECK(cross_entropy(ProbVec(Vector{0.25, 0.75}), 1) == doctest::Approx(-std::log(0.75)));
}

TEST_CASE("logit gradients match finite differences") {
    const Vector l{0.3, -1.2, 0.8};
    const ProbVec fixed(Vector{0.1, 0.6, 0.3});
    auto fd = [&](auto f) {
        Vector g(3);
        for (std::size_t i = 0; i < 3; ++i) {
            Vector a = l, b = l;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            g[i] = (f(a) - f(b)) / 2e-6;
        }
        return g;
    };
    const ProbVec q = softmax(l);
    CHECK(oracle::rel_err(kl_logit_grad(fixed, q),
                          fd([&](const Vector& v) { return kl_div(fixed, softmax(v)); })) < 1e-7);
    CHECK(oracle::rel_err(entropy_logit_grad(q),
                          fd([&](const Vector& v) { return entropy(softmax(v)); })) < 1e-7);
    CHECK(oracle::rel_err(cross_entropy_logit_grad(q, 2),
                          fd([&](const Vector& v) { return cross_entropy(softmax(v), 2); })) < 1e-7);
}

TEST_CASE("grad_input and jvp on linear networks") {
    const Vector u{0.5, -2.0};
    CHECK(grad_input(identity_net(2), Vector{1, 1}, u) == u);
    CHECK(jvp(identity_net(2), Vector{1, 1}, u) == u);
    const Mlp lin = oracle::linear_model({{1, 2}, {3, 4}});
    CHECK(grad_input(lin, Vector{0, 0}, Vector{1, 1}) == Vector{4, 6});
    CHECK(jvp(lin, Vector{0, 0}, Vector{1, 1}) == Vector{3, 7});
}

TEST_CASE("input jacobian matches finite differences") {
    for (const auto& act : {Activation::tanh(), Activation::leaky_relu(0.1)}) {
        const Mlp net = oracle::random_net({3, 6, 6, 2}, act, 23);
        Rng rng(4);
        const Vector x = oracle::random_vector(rng, 3);
        const Eigen::MatrixXd j =
            oracle::fd_jacobian([&](const Vector& y) { return forward(net, y); }, x, 1e-6);
        const Vector v = oracle::random_vector(rng, 3);
        const Vector u = oracle::random_vector(rng, 2);
        CHECK(oracle::rel_err(jvp(net, x, v), oracle::from_eigen(j * oracle::to_eigen(v))) < 1e-6);
        CHECK(oracle::rel_err(grad_input(net, x, u),
                              oracle::from_eigen(j.transpose() * oracle::to_eigen(u))) < 1e-6);
    }
}

TEST_CASE("jvp and vjp satisfy the adjoint identity") {
    const std::vector<std::vector<std::size_t>> archs = {{2, 100, 100, 2}, {2, 8, 2}, {5, 16, 3}};
    for (const auto& dims : archs) {
        for (const auto& act : kActs) {
            const Mlp net = oracle::random_net(dims, act, 31);
            Rng rng(8);
            for (int i = 0; i < 100; ++i) {
                const Vector x = oracle::random_vector(rng, dims.front());
                const Vector v = oracle::random_vector(rng, dims.front());
                const Vector u = oracle::random_vector(rng, dims.back());
                const double lhs = tnar::numkit::dot(u, jvp(net, x, v));
                const double rhs = tnar::numkit::dot(grad_input(net, x, u), v);
                CHECK(oracle::rel_err(lhs, rhs) <= 1e-9);
            }
        }
    }
}

TEST_CASE("parameter gradients") {
    const Mlp net = oracle::random_net({3, 5, 4, 2}, Activation::tanh(), 3);
    const Vector x{0.3, -0.7, 1.1};
    const Vector u{1.0, -0.5};

    const MlpParams zero = grad_params(net, x, Vector{0, 0});
    CHECK(zero == MlpParams::zeros(net.spec));

    const Vector g = grad_params(net, x, u).flatten();
    const Vector flat = net.params.flatten();
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        const std::size_t i = rng.uniform_index(flat.size());
        auto value = [&](double delta) {
            Mlp m = net;
            Vector f = flat;
            f[i] += delta;
            m.params.assign_flat(f);
            return tnar::numkit::dot(forward(m, x), u);
        };
        const double fd = (value(1e-6) - value(-1e-6)) / 2e-6;
        CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
}

TEST_CASE("parameter containers") {
    const Mlp net = oracle::random_net({2, 3, 2}, Activation::relu(), 1);
    CHECK(net.params.num_params() == 2 * 3 + 3 + 3 * 2 + 2);
    MlpParams p = net.params;
    p.assign_flat(net.params.flatten());
    CHECK(p == net.params);
    p *= 2.0;
    p += net.params;
    CHECK(p.flatten() == 3.0 * net.params.flatten());
    CHECK(p.all_finite());
    p.at_flat(0) = std::nan("");
    CHECK(!p.all_finite());
}

TEST_CASE("glorot initialization bounds") {
    const auto spec = MlpSpec::uniform(2, {100}, 2, Activation::tanh(), OutputHead::logits);
    Rng rng(0);
    const MlpParams p = init_params(spec, rng);
    const double s0 = std::sqrt(6.0 / 102.0);
    for (double w : p.weights[0].span()) CHECK(std::abs(w) <= s0);
    for (double b : p.biases[0]) CHECK(b == 0.0);
    CHECK_THROWS(MlpSpec{{2, 3}, {Activation::tanh()}, OutputHead::logits}.validate());
}

TEST_CASE("checkpoint round-trip is bitwise") {
    const Mlp net = oracle::random_net({2, 9, 4, 3}, Activation::leaky_relu(0.1), 99);
    std::stringstream ss;
    write_checkpoint(ss, net);
    const Mlp back = read_checkpoint(ss);
    CHECK(back.spec == net.spec);
    CHECK(back.params == net.params);

    std::stringstream bad("not a checkpoint\n");
    CHECK_THROWS_AS(read_checkpoint(bad), tnar::FormatError);

    std::stringstream trunc;
    write_checkpoint(trunc, net);
    std::string text = trunc.str();
    text.resize(text.size() / 2);
    std::stringstream cut(text);
    CHECK_THROWS_AS(read_checkpoint(cut), tnar::FormatError);
}

TEST_CASE("adam") {
    SUBCASE("first step moves by lr") {
        Vector p{0.0};
        AdamState st(1);
        adam_update(p, Vector{1.0}, st, 1e-3);
        CHECK(st.t == 1);
        CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-7));
    }
    SUBCASE("zero gradient leaves params and decays moments") {
        Vector p{1.0, 2.0};
        AdamState st(2);
        adam_update(p, Vector{0.5, -0.5}, st, 1e-2);
        const Vector after = p;
        const Vector m = st.m, v = st.v;
        adam_update(p, Vector{0.0, 0.0}, st, 1e-2);
        CHECK(st.m == 0.9 * m);
        CHECK(st.v == 0.999 * v);
        // the bias-corrected first moment still moves params
        CHECK(p != after);
        Vector q{1.0};
        AdamState fresh(1);
        adam_update(q, Vector{0.0}, fresh, 1e-2);
        CHECK(q[0] == 1.0);
    }
    SUBCASE("matches a hand recurrence") {
        Vector p{0.5};
        AdamState st(1);
        double m = 0, v = 0, x = 0.5;
        const double gs[] = {0.3, -1.0, 2.0, 0.1};
        for (int t = 1; t <= 4; ++t) {
            const double g = gs[t - 1];
            adam_update(p, Vector{g}, st, 0.01);
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
            x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
            CHECK(p[0] == doctest::Approx(x).epsilon(1e-14));
        }
    }
}

}  // TEST_SUITE
