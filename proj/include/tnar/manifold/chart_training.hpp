#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/nn/mlp.hpp"

namespace tnar::manifold {

struct ChartTrainConfig {
    std::size_t steps = 5000;
    std::size_t batch = 64;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::size_t log_every = 100;
};

struct ChartLogEntry {
    std::size_t step = 0;
    double mse = 0.0;   // full-data reconstruction MSE through the deterministic encoder
    double elbo = 0.0;  // VAE only: mean ELBO per point (fixed evaluation noise)
    double kl = 0.0;    // VAE only: mean KL(q(z|x) || N(0, I))
};

struct ChartTrainResult {
    std::shared_ptr<NetworkChart> chart;
    std::vector<ChartLogEntry> log;  // one entry per log_every steps, plus the final step
    double final_mse = 0.0;
    double final_elbo = 0.0;
};

// KL(N(mean, diag(exp(logvar))) || N(0, I)) = 1/2 sum(mean^2 + var - logvar - 1)
double gaussian_kl(const Vector& mean, const Vector& logvar);

// Adam on the mean squared reconstruction error over labeled + unlabeled inputs.
// Throws NonFiniteLoss if the batch loss diverges.
ChartTrainResult train_autoencoder(const Dataset& data, const nn::MlpSpec& encoder,
                                   const nn::MlpSpec& decoder, const ChartTrainConfig& cfg);
// Same, starting from the given networks instead of a seeded initialization.
ChartTrainResult train_autoencoder(const Dataset& data, nn::Mlp encoder, nn::Mlp decoder,
                                   const ChartTrainConfig& cfg);

// Maximizes the ELBO with a Gaussian unit-variance likelihood and N(0, I)
// prior; the encoder emits (mean, log-variance) stacked. Throws NonFiniteLoss.
ChartTrainResult train_vae(const Dataset& data, const nn::MlpSpec& encoder,
                           const nn::MlpSpec& decoder, const ChartTrainConfig& cfg);

// Mean ELBO over points using one reparameterized sample per point drawn from `seed`.
double vae_elbo(const NetworkChart& chart, const std::vector<Vector>& points, std::uint64_t seed);

}  // namespace tnar::manifold
