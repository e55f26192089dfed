#pragma once

#include <cstddef>
#include <cstdint>

#include "tnar/manifold/dataset.hpp"

namespace tnar::manifold {

// Two concentric circles; inner ring is class 0, outer ring is class 1.
struct TwoRingsConfig {
    std::size_t n_unlabeled = 3000;
    std::size_t n_labeled_per_class = 3;
    double radius_inner = 0.9;
    double radius_outer = 1.1;
    double noise_sigma = 0.02;
    std::uint64_t seed = 0;
    // false: labeled points at angles 2*pi*j/n on each ring; true: uniform angles
    bool random_label_angles = false;

    void validate() const;
    Metadata to_meta() const;
};

// Points x = x0 + n, x0 uniform on a fair-coin-chosen ring, n ~ N(0, sigma^2 I).
Dataset gen_two_rings(const TwoRingsConfig& cfg);

}  // namespace tnar::manifold
