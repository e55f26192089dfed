#include "tnar/manifold/two_rings.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tnar/numkit/rng.hpp"
#include "tnar/util/format.hpp"

namespace tnar::manifold {

void TwoRingsConfig::validate() const {
    if (!(radius_inner > 0.0 && radius_inner < radius_outer)) {
        throw std::invalid_argument("TwoRingsConfig: need 0 < radius_inner < radius_outer");
    }
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("TwoRingsConfig: noise_sigma < 0");
}

Metadata TwoRingsConfig::to_meta() const {
    return {
        {"generator", "two_rings"},
        {"n_unlabeled", std::to_string(n_unlabeled)},
        {"n_labeled_per_class", std::to_string(n_labeled_per_class)},
        {"radius_inner", util::format_double(radius_inner)},
        {"radius_outer", util::format_double(radius_outer)},
        {"noise_sigma", util::format_double(noise_sigma)},
        {"seed", std::to_string(seed)},
        {"random_label_angles", random_label_angles ? "true" : "false"},
    };
}

Dataset gen_two_rings(const TwoRingsConfig& cfg) {
    cfg.validate();
    numkit::Rng rng(cfg.seed);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double radii[2] = {cfg.radius_inner, cfg.radius_outer};

    auto observe = [&](double radius, double angle) {
        Vector x{radius * std::cos(angle), radius * std::sin(angle)};
        x[0] += cfg.noise_sigma * rng.normal();
        x[1] += cfg.noise_sigma * rng.normal();
        return x;
    };

    Dataset data;
    data.dim = 2;
    data.num_classes = 2;
    data.meta = cfg.to_meta();
    data.unlabeled.reserve(cfg.n_unlabeled);
    for (std::size_t i = 0; i < cfg.n_unlabeled; ++i) {
        const std::size_t ring = rng.uniform() < 0.5 ? 0 : 1;
        const double angle = two_pi * rng.uniform();
        data.unlabeled.push_back(observe(radii[ring], angle));
    }
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < cfg.n_labeled_per_class; ++j) {
            const double angle =
                cfg.random_label_angles
                    ? two_pi * rng.uniform()
                    : two_pi * static_cast<double>(j) / static_cast<double>(cfg.n_labeled_per_class);
            data.labeled.push_back({observe(radii[c], angle), c});
        }
    }
    return data;
}

}  // namespace tnar::manifold
