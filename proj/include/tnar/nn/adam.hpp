#pragma once

#include <cstddef>

#include "tnar/numkit/linalg.hpp"

namespace tnar::nn {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    numkit::Vector m;
    numkit::Vector v;
    std::size_t t = 0;  // number of updates applied so far

    explicit AdamState(std::size_t n = 0) : m(n), v(n) {}
};

// One bias-corrected Adam update of `params` in place.
void adam_update(numkit::Vector& params, const numkit::Vector& grads, AdamState& state, double lr,
                 const AdamHyper& hyper = {});

}  // namespace tnar::nn
