#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "tnar/errors.hpp"
#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/chart_training.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/manifold/two_rings.hpp"

using namespace tnar::manifold;
using tnar::nn::Activation;
using tnar::nn::MlpSpec;
using tnar::nn::OutputHead;
using tnar::numkit::Rng;
using tnar::numkit::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

Dataset small_rings(std::size_t n, std::uint64_t seed = 0) {
    TwoRingsConfig cfg;
    cfg.n_unlabeled = n;
    cfg.seed = seed;
    return gen_two_rings(cfg);
}

}  // namespace

TEST_SUITE("manifold") {

TEST_CASE("two-rings generator") {
    const Dataset d = gen_two_rings({});
    CHECK(d.unlabeled.size() == 3000);
    CHECK(d.labeled.size() == 6);
    CHECK(d.num_classes == 2);
    CHECK(d.dim == 2);

    // evenly spaced labels sit exactly on the rings before noise; class 0 inside
    for (const auto& p : d.labeled) {
        const double r = std::hypot(p.x[0], p.x[1]);
        CHECK(std::abs(r - (p.label == 0 ? 0.9 : 1.1)) < 0.15);
    }
    std::size_t near = 0;
    for (const auto& x : d.unlabeled) {
        const double r = std::hypot(x[0], x[1]);
        if (std::abs(r - 0.9) < 0.08 || std::abs(r - 1.1) < 0.08) ++near;
    }
    CHECK(near == d.unlabeled.size());

    const Dataset again = gen_two_rings({});
    CHECK(again.unlabeled == d.unlabeled);

    TwoRingsConfig bad;
    bad.noise_sigma = -1.0;
    CHECK_THROWS(gen_two_rings(bad));
}

TEST_CASE("noise level of the generator") {
    TwoRingsConfig cfg;
    cfg.n_unlabeled = 20000;
    cfg.noise_sigma = 0.02;
    const Dataset d = gen_two_rings(cfg);
    double sq = 0.0;
    for (const auto& x : d.unlabeled) {
        const double r = std::hypot(x[0], x[1]);
        const double dev = std::abs(r - 0.9) < std::abs(r - 1.1) ? r - 0.9 : r - 1.1;
        sq += dev * dev;
    }
    CHECK(std::sqrt(sq / static_cast<double>(d.unlabeled.size())) ==
          doctest::Approx(0.02).epsilon(0.05));
}

TEST_CASE("oracle chart encode and decode") {
    const OracleRingsChart c;
    auto p = c.encode(Vector{0.9, 0});
    CHECK(p.patch == 0);
    CHECK(p.z[0] == 0.0);
    p = c.encode(Vector{0, 1.1});
    CHECK(p.patch == 1);
    CHECK(p.z[0] == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(c.encode(Vector{1.0 + 1e-9, 0}).patch == 1);
    CHECK(c.encode(Vector{1.0, 0}).patch == 0);
    CHECK_THROWS_AS(c.encode(Vector{0, 0}), tnar::OriginError);

    const Vector a = c.decode({0, Vector{0.0}});
    CHECK(a == Vector{0.9, 0.0});
    const Vector b = c.decode({1, Vector{kPi}});
    CHECK(std::abs(b[0] + 1.1) < 1e-12);
    CHECK(std::abs(b[1]) < 1e-12);
}

TEST_CASE("oracle chart jacobian products") {
    const OracleRingsChart c;
    const Vector t = c.jvp({0, Vector{0.0}}, Vector{1.0});
    CHECK(std::abs(t[0]) < 1e-15);
    CHECK(t[1] == doctest::Approx(0.9));

    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const ChartPoint p{static_cast<std::size_t>(i % 2), Vector{rng.uniform() * 2 * kPi}};
        const Vector eta{rng.normal()};
        const Vector u = oracle::random_vector(rng, 2);
        const double lhs = tnar::numkit::dot(u, c.jvp(p, eta));
        const double rhs = tnar::numkit::dot(c.vjp(p, u), eta);
        CHECK(oracle::rel_err(lhs, rhs) <= 1e-10);

        const Eigen::MatrixXd j = oracle::fd_jacobian(
            [&](const Vector& z) { return c.decode({p.patch, z}); }, p.z, 1e-6);
        CHECK(oracle::rel_err(c.jvp(p, eta), oracle::from_eigen(j * oracle::to_eigen(eta))) < 1e-8);
    }
}

TEST_CASE("network chart jacobian products") {
    for (std::size_t d : {1u, 3u}) {
        const auto enc = oracle::random_net({4, 10, d}, Activation::tanh(), 5, OutputHead::identity);
        const auto dec = oracle::random_net({d, 10, 4}, Activation::tanh(), 6, OutputHead::identity);
        const NetworkChart c(ChartKind::autoencoder, enc, dec);
        CHECK(c.latent_dim() == d);
        CHECK(c.ambient_dim() == 4);
        Rng rng(7);
        for (int i = 0; i < 20; ++i) {
            const ChartPoint p = c.encode(oracle::random_vector(rng, 4));
            const Vector eta = oracle::random_vector(rng, d);
            const Vector u = oracle::random_vector(rng, 4);
            CHECK(oracle::rel_err(tnar::numkit::dot(u, c.jvp(p, eta)),
                                  tnar::numkit::dot(c.vjp(p, u), eta)) <= 1e-10);
            const double xi = 1e-6;
            const Vector fd = (c.decode(p.shifted(xi * eta)) - c.decode(p)) / xi;
            CHECK(oracle::rel_err(c.jvp(p, eta), fd) <= 1e-4);
        }
    }
}

TEST_CASE("dataset csv round-trip") {
    const Dataset d = small_rings(40, 3);
    std::stringstream ss;
    write_csv(ss, d);
    const std::string text = ss.str();
    CHECK(text.find("x1,x2,label") != std::string::npos);
    const Dataset back = read_csv(ss);
    CHECK(back.labeled.size() == d.labeled.size());
    CHECK(back.unlabeled == d.unlabeled);
    for (std::size_t i = 0; i < d.labeled.size(); ++i) {
        CHECK(back.labeled[i].x == d.labeled[i].x);
        CHECK(back.labeled[i].label == d.labeled[i].label);
    }
    CHECK(back.find_meta("seed") != nullptr);
    CHECK(*back.find_meta("seed") == "3");

    std::stringstream again;
    write_csv(again, back);
    CHECK(again.str() == text);

    std::stringstream ragged("x1,x2,label\n1,2,0\n3,-1\n");
    CHECK_THROWS_AS(read_csv(ragged), tnar::FormatError);
    std::stringstream junk("x1,x2,label\n1,abc,0\n");
    CHECK_THROWS_AS(read_csv(junk), tnar::FormatError);
}

TEST_CASE("gaussian kl closed form") {
    CHECK(gaussian_kl(Vector{0.0}, Vector{0.0}) == 0.0);
    CHECK(std::abs(gaussian_kl(Vector{1.0}, Vector{0.0}) - 0.5) <= 1e-12);
    const double s2 = 0.25;
    CHECK(std::abs(gaussian_kl(Vector{0.3}, Vector{std::log(s2)}) -
                   0.5 * (0.09 + s2 - std::log(s2) - 1.0)) <= 1e-12);
}

TEST_CASE("autoencoder already exact is a no-op") {
    const Dataset d = small_rings(50);
    auto ident = [] {
        MlpSpec s;
        s.layer_dims = {2, 2};
        s.head = OutputHead::identity;
        tnar::nn::Mlp m{s, tnar::nn::MlpParams::zeros(s)};
        m.params.weights[0](0, 0) = 1.0;
        m.params.weights[0](1, 1) = 1.0;
        return m;
    };
    ChartTrainConfig cfg;
    cfg.steps = 20;
    cfg.log_every = 10;
    const auto res = train_autoencoder(d, ident(), ident(), cfg);
    CHECK(res.final_mse == 0.0);
    CHECK(res.chart->encoder().params == ident().params);
    CHECK(res.chart->decoder().params == ident().params);
}

TEST_CASE("autoencoder learns the rings") {
    const Dataset d = gen_two_rings({});
    const auto enc = MlpSpec::uniform(2, {32, 32}, 1, Activation::tanh(), OutputHead::identity);
    const auto dec = MlpSpec::uniform(1, {32, 32}, 2, Activation::tanh(), OutputHead::identity);
    ChartTrainConfig cfg;
    cfg.steps = 5000;
    cfg.log_every = 500;
    const auto res = train_autoencoder(d, enc, dec, cfg);
    for (const auto& e : res.log) CHECK(std::isfinite(e.mse));
    CHECK(res.log.back().step == 5000);
    CHECK(res.final_mse <= 3e-2);
    CHECK(reconstruction_mse(*res.chart, d.all_inputs()) == res.final_mse);

    std::stringstream ss;
    write_chart(ss, *res.chart);
    const auto back = read_chart(ss);
    CHECK(back->kind() == ChartKind::autoencoder);
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        const Vector x = oracle::random_vector(rng, 2);
        const auto p = res.chart->encode(x);
        CHECK(back->encode(x).z == p.z);
        CHECK(back->decode(p) == res.chart->decode(p));
    }
}

TEST_CASE("vae improves its elbo") {
    const Dataset d = gen_two_rings({});
    const auto enc = MlpSpec::uniform(2, {32, 32}, 2, Activation::tanh(), OutputHead::identity);
    const auto dec = MlpSpec::uniform(1, {32, 32}, 2, Activation::tanh(), OutputHead::identity);
    ChartTrainConfig cfg;
    cfg.steps = 5000;
    cfg.log_every = 100;
    const auto res = train_vae(d, enc, dec, cfg);
    REQUIRE(res.log.size() >= 2);
    CHECK(res.log.front().step == 100);
    CHECK(res.log.back().step == 5000);
    CHECK(res.log.back().elbo > res.log.front().elbo);
    for (const auto& e : res.log) {
        CHECK(std::isfinite(e.elbo));
        CHECK(e.kl >= 0.0);
    }
    CHECK(res.chart->kind() == ChartKind::vae);
    CHECK(res.chart->latent_dim() == 1);
    // encode is the deterministic posterior mean
    const Vector x{0.9, 0.0};
    CHECK(res.chart->encode(x).z == res.chart->encode(x).z);

    auto bad = enc;
    bad.layer_dims.back() = 3;
    CHECK_THROWS(train_vae(d, bad, dec, cfg));
}

TEST_CASE("chart training diverges loudly") {
    const Dataset d = small_rings(100);
    const auto enc = MlpSpec::uniform(2, {8}, 1, Activation::relu(), OutputHead::identity);
    const auto dec = MlpSpec::uniform(1, {8}, 2, Activation::relu(), OutputHead::identity);
    ChartTrainConfig cfg;
    cfg.steps = 200;
    cfg.lr = 1e200;
    CHECK_THROWS_AS(train_autoencoder(d, enc, dec, cfg), tnar::NonFiniteLoss);
}

}  // TEST_SUITE
