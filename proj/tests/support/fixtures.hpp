#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tnar/manifold/two_rings.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/nn/prob.hpp"
#include "tnar/reg/adversarial.hpp"
#include "tnar/train/ssl.hpp"
#include "tnar/train/trainer.hpp"

namespace fixture {

using tnar::numkit::Vector;

// Small classifier fitted to densely labeled rings, so it has real curvature
// near the data.
inline tnar::nn::Mlp trained_rings_model(std::uint64_t seed, std::size_t updates = 300) {
    tnar::manifold::TwoRingsConfig rings;
    rings.n_unlabeled = 0;
    rings.n_labeled_per_class = 50;
    rings.random_label_angles = true;
    rings.seed = seed;
    const auto data = tnar::manifold::gen_two_rings(rings);
    tnar::train::SslConfig cfg;
    cfg.method = tnar::train::Method::supervised;
    cfg.total_updates = updates;
    cfg.lr_decay_start = updates;
    cfg.lr = 1e-2;
    cfg.seed = seed;
    cfg.log_every = updates;
    cfg.parallel = false;
    const auto spec = tnar::nn::MlpSpec::uniform(2, {20, 20}, 2, tnar::nn::Activation::tanh(),
                                                 tnar::nn::OutputHead::logits);
    return tnar::train::train(data, nullptr, spec, cfg).classifier;
}

// Semi-supervised objective with every perturbation, and the clean
// distribution inside each divergence, frozen at their values for `at`.
struct FrozenObjective {
    std::vector<tnar::train::LabeledPoint> labeled;
    tnar::train::SslConfig cfg;
    std::vector<Vector> inputs;
    std::vector<tnar::nn::ProbVec> clean;
    std::vector<Vector> r_tan, r_nor, r_vat;

    FrozenObjective(const tnar::nn::Mlp& at, const std::vector<tnar::train::LabeledPoint>& batch_l,
                    const std::vector<Vector>& batch_ul, const tnar::manifold::Chart* chart,
                    const tnar::train::SslConfig& c, std::uint64_t step_seed)
        : labeled(batch_l), cfg(c) {
        for (const auto& p : batch_l) inputs.push_back(p.x);
        for (const auto& x : batch_ul) inputs.push_back(x);
        const auto w = tnar::train::effective_weights(cfg);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Vector& x = inputs[i];
            clean.push_back(tnar::nn::softmax(tnar::nn::forward(at, x)));
            auto rng = tnar::train::example_rng(step_seed, i);
            r_vat.emplace_back(x.size());
            r_tan.emplace_back(x.size());
            r_nor.emplace_back(x.size());
            if (w.vat > 0) r_vat.back() = tnar::reg::vat_perturbation(at, x, cfg.adv, rng).r;
            if (w.tangent > 0 || w.normal > 0) {
                const auto b = tnar::reg::regularizer_bundle(at, *chart, x, cfg.adv, rng);
                if (b.tangent_pert) r_tan.back() = b.tangent_pert->r;
                if (b.normal_pert) r_nor.back() = b.normal_pert->r;
            }
        }
    }

    double operator()(const tnar::nn::Mlp& net) const {
        using tnar::nn::forward;
        using tnar::nn::softmax;
        const auto w = tnar::train::effective_weights(cfg);
        double sup = 0.0;
        for (const auto& p : labeled) sup += tnar::nn::cross_entropy(softmax(forward(net, p.x)), p.label);
        sup /= static_cast<double>(labeled.size());
        double reg = 0.0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Vector& x = inputs[i];
            auto kl = [&](const Vector& r) { return tnar::nn::kl_div(clean[i], softmax(forward(net, x + r))); };
            reg += w.entropy * tnar::nn::entropy(softmax(forward(net, x)));
            if (w.vat > 0) reg += w.vat * kl(r_vat[i]);
            if (w.tangent > 0) reg += w.tangent * kl(r_tan[i]);
            if (w.normal > 0) reg += w.normal * kl(r_nor[i]);
        }
        return sup + reg / static_cast<double>(inputs.size());
    }
};

// Largest relative mismatch between `grad` and central differences of `f`
// over `samples` parameters drawn from `rng`; gradients below `floor` are
// compared absolutely against it.
template <class F>
double max_fd_mismatch(const F& f, const tnar::nn::Mlp& net, const Vector& grad, tnar::numkit::Rng& rng,
                       std::size_t samples, double h = 1e-5, double floor = 1e-3) {
    const Vector flat = net.params.flatten();
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const std::size_t i = rng.uniform_index(flat.size());
        auto at = [&](double delta) {
            tnar::nn::Mlp moved = net;
            Vector p = flat;
            p[i] += delta;
            moved.params.assign_flat(p);
            return f(moved);
        };
        const double fd = (at(h) - at(-h)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[i]) / std::max(std::abs(grad[i]), floor));
    }
    return worst;
}

}  // namespace fixture
