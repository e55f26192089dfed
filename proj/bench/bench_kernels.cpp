#include <benchmark/benchmark.h>

#include <vector>

#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/two_rings.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/train/ssl.hpp"
#include "tnar/train/trainer.hpp"

namespace {

using namespace tnar;

struct Fixture {
    manifold::Dataset data;
    manifold::OracleRingsChart chart;
    nn::Mlp net;
    std::vector<manifold::LabeledPoint> batch_l;
    std::vector<numkit::Vector> batch_ul;

    explicit Fixture(std::size_t width) {
        manifold::TwoRingsConfig rc;
        rc.n_unlabeled = 128;
        rc.n_labeled_per_class = 16;
        rc.random_label_angles = true;
        data = manifold::gen_two_rings(rc);
        numkit::Rng rng(1);
        net = nn::Mlp::initialized(nn::MlpSpec::uniform(2, {width, width}, 2, nn::Activation::leaky_relu(0.1),
                                                        nn::OutputHead::logits),
                                   rng);
        batch_l = data.labeled;
        batch_ul = data.unlabeled;
    }
};

train::SslConfig config(train::Method m, bool parallel) {
    train::SslConfig cfg;
    cfg.method = m;
    cfg.alpha_vat = 1.0;
    cfg.parallel = parallel;
    return cfg;
}

// args: width, method (0 vat, 1 tnar), parallel
void BM_SslStep(benchmark::State& state) {
    const Fixture fx(static_cast<std::size_t>(state.range(0)));
    const auto method = state.range(1) ? train::Method::tnar : train::Method::vat;
    const auto cfg = config(method, state.range(2) != 0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto loss = train::ssl_loss(fx.net, fx.batch_l, fx.batch_ul, &fx.chart, cfg, ++seed);
        benchmark::DoNotOptimize(loss.terms.total);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(fx.batch_l.size() + fx.batch_ul.size()));
}

void BM_BoundaryGrid(benchmark::State& state) {
    const Fixture fx(100);
    for (auto _ : state) {
        auto g = train::decision_boundary_grid(fx.net, {}, static_cast<std::size_t>(state.range(0)));
        benchmark::DoNotOptimize(g.data());
    }
}

}  // namespace

BENCHMARK(BM_SslStep)
    ->ArgNames({"width", "tnar", "parallel"})
    ->ArgsProduct({{50, 100}, {0, 1}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BoundaryGrid)->Arg(101)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
