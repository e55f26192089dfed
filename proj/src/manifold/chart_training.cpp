#include "tnar/manifold/chart_training.hpp"

#include <cmath>
#include <string>

#include "tnar/errors.hpp"
#include "tnar/nn/adam.hpp"
#include "tnar/numkit/rng.hpp"

namespace tnar::manifold {

namespace {

constexpr std::uint64_t kElboEvalSalt = 0x5eedE1B0ULL;

std::vector<Vector> training_inputs(const Dataset& data) {
    data.validate();
    auto inputs = data.all_inputs();
    if (inputs.empty()) throw EmptySet("chart training: dataset has no points");
    return inputs;
}

struct NetOptimizer {
    nn::Mlp& net;
    nn::AdamState state;
    explicit NetOptimizer(nn::Mlp& n) : net(n), state(n.params.num_params()) {}

    void step(const nn::MlpParams& grad, double lr) {
        Vector flat = net.params.flatten();
        nn::adam_update(flat, grad.flatten(), state, lr);
        net.params.assign_flat(flat);
    }
};

void check_pair(const nn::Mlp& enc, const nn::Mlp& dec, std::size_t enc_out_factor,
                std::size_t dim) {
    if (enc.spec.input_dim() != dim || dec.spec.output_dim() != dim) {
        throw DimensionMismatch("chart training: network dims do not match the data dimension");
    }
    if (enc.spec.output_dim() != enc_out_factor * dec.spec.input_dim()) {
        throw DimensionMismatch("chart training: encoder output does not match decoder input");
    }
}

// Glorot weights, biases from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
nn::Mlp init_chart_net(const nn::MlpSpec& spec, numkit::Rng& rng) {
    nn::Mlp net = nn::Mlp::initialized(spec, rng);
    for (std::size_t l = 0; l < net.params.biases.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.params.weights[l].cols()));
        for (double& b : net.params.biases[l]) b = bound * (2.0 * rng.uniform() - 1.0);
    }
    return net;
}

}  // namespace

double gaussian_kl(const Vector& mean, const Vector& logvar) {
    if (mean.size() != logvar.size()) throw DimensionMismatch("gaussian_kl: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        sum += mean[i] * mean[i] + std::exp(logvar[i]) - logvar[i] - 1.0;
    }
    return 0.5 * sum;
}

ChartTrainResult train_autoencoder(const Dataset& data, const nn::MlpSpec& encoder,
                                   const nn::MlpSpec& decoder, const ChartTrainConfig& cfg) {
    numkit::Rng rng(cfg.seed);
    nn::Mlp enc = init_chart_net(encoder, rng);
    nn::Mlp dec = init_chart_net(decoder, rng);
    ChartTrainConfig rest = cfg;
    rest.seed = rng.next_u64();
    return train_autoencoder(data, std::move(enc), std::move(dec), rest);
}

ChartTrainResult train_autoencoder(const Dataset& data, nn::Mlp enc, nn::Mlp dec,
                                   const ChartTrainConfig& cfg) {
    const auto inputs = training_inputs(data);
    check_pair(enc, dec, 1, data.dim);
    numkit::Rng rng(cfg.seed);
    NetOptimizer enc_opt(enc), dec_opt(dec);
    ChartTrainResult result;
    const double scale = 1.0 / static_cast<double>(cfg.batch * data.dim);

    auto record = [&](std::size_t step) {
        const NetworkChart snapshot(ChartKind::autoencoder, enc, dec);
        const double mse = reconstruction_mse(snapshot, inputs);
        if (!std::isfinite(mse)) throw NonFiniteLoss("autoencoder: reconstruction MSE diverged", step);
        result.log.push_back({step, mse, 0.0, 0.0});
    };
    auto log_point = [&](std::size_t step) {
        try {
            record(step);
        } catch (const NonFiniteValue& e) {
            throw NonFiniteLoss(std::string("autoencoder: ") + e.what(), step);
        }
    };

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        nn::MlpParams g_enc = nn::MlpParams::zeros(enc.spec);
        nn::MlpParams g_dec = nn::MlpParams::zeros(dec.spec);
        double loss = 0.0;
        try {
            for (std::size_t b = 0; b < cfg.batch; ++b) {
                const Vector& x = inputs[rng.uniform_index(inputs.size())];
                const nn::ForwardTrace te = nn::forward_trace(enc, x);
                const nn::ForwardTrace td = nn::forward_trace(dec, te.output);
                const Vector diff = td.output - x;
                loss += numkit::dot(diff, diff) * scale;
                Vector g_z;
                nn::backward(dec, td, (2.0 * scale) * diff, &g_dec, &g_z);
                nn::backward(enc, te, g_z, &g_enc, nullptr);
            }
        } catch (const NonFiniteValue& e) {
            throw NonFiniteLoss(std::string("autoencoder: ") + e.what(), step);
        }
        if (!std::isfinite(loss)) throw NonFiniteLoss("autoencoder: batch loss diverged", step);
        enc_opt.step(g_enc, cfg.lr);
        dec_opt.step(g_dec, cfg.lr);
        if (cfg.log_every && step % cfg.log_every == 0) log_point(step);
    }
    if (result.log.empty() || result.log.back().step != cfg.steps) log_point(cfg.steps);
    result.final_mse = result.log.back().mse;
    result.chart = std::make_shared<NetworkChart>(ChartKind::autoencoder, std::move(enc),
                                                  std::move(dec));
    return result;
}

double vae_elbo(const NetworkChart& chart, const std::vector<Vector>& points, std::uint64_t seed) {
    if (points.empty()) throw EmptySet("vae_elbo: no points");
    numkit::Rng rng(seed);
    const std::size_t d = chart.latent_dim();
    double total = 0.0;
    for (const auto& x : points) {
        const Vector out = nn::forward(chart.encoder(), x);
        Vector mean(d), logvar(d), z(d);
        for (std::size_t i = 0; i < d; ++i) {
            mean[i] = out[i];
            logvar[i] = out[d + i];
            z[i] = mean[i] + std::exp(0.5 * logvar[i]) * rng.normal();
        }
        const Vector diff = nn::forward(chart.decoder(), z) - x;
        total += -(0.5 * numkit::dot(diff, diff) + gaussian_kl(mean, logvar));
    }
    return total / static_cast<double>(points.size());
}

ChartTrainResult train_vae(const Dataset& data, const nn::MlpSpec& encoder,
                           const nn::MlpSpec& decoder, const ChartTrainConfig& cfg) {
    const auto inputs = training_inputs(data);
    numkit::Rng rng(cfg.seed);
    nn::Mlp enc = init_chart_net(encoder, rng);
    nn::Mlp dec = init_chart_net(decoder, rng);
    check_pair(enc, dec, 2, data.dim);
    const std::size_t d = dec.spec.input_dim();
    const std::uint64_t eval_seed = cfg.seed ^ kElboEvalSalt;
    NetOptimizer enc_opt(enc), dec_opt(dec);
    ChartTrainResult result;
    const double scale = 1.0 / static_cast<double>(cfg.batch);

    auto record = [&](std::size_t step) {
        const NetworkChart snapshot(ChartKind::vae, enc, dec);
        ChartLogEntry e;
        e.step = step;
        e.mse = reconstruction_mse(snapshot, inputs);
        e.elbo = vae_elbo(snapshot, inputs, eval_seed);
        double kl = 0.0;
        for (const auto& x : inputs) {
            const Vector out = nn::forward(enc, x);
            Vector mean(d), logvar(d);
            for (std::size_t i = 0; i < d; ++i) {
                mean[i] = out[i];
                logvar[i] = out[d + i];
            }
            kl += gaussian_kl(mean, logvar);
        }
        e.kl = kl / static_cast<double>(inputs.size());
        if (!std::isfinite(e.elbo) || !std::isfinite(e.mse)) {
            throw NonFiniteLoss("vae: ELBO diverged", step);
        }
        result.log.push_back(e);
    };
    auto log_point = [&](std::size_t step) {
        try {
            record(step);
        } catch (const NonFiniteValue& e) {
            throw NonFiniteLoss(std::string("vae: ") + e.what(), step);
        }
    };

    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        nn::MlpParams g_enc = nn::MlpParams::zeros(enc.spec);
        nn::MlpParams g_dec = nn::MlpParams::zeros(dec.spec);
        double loss = 0.0;
        try {
            for (std::size_t b = 0; b < cfg.batch; ++b) {
                const Vector& x = inputs[rng.uniform_index(inputs.size())];
                const nn::ForwardTrace te = nn::forward_trace(enc, x);
                Vector mean(d), logvar(d), sigma(d), noise(d), z(d);
                for (std::size_t i = 0; i < d; ++i) {
                    mean[i] = te.output[i];
                    logvar[i] = te.output[d + i];
                    sigma[i] = std::exp(0.5 * logvar[i]);
                    noise[i] = rng.normal();
                    z[i] = mean[i] + sigma[i] * noise[i];
                }
                const nn::ForwardTrace td = nn::forward_trace(dec, z);
                const Vector diff = td.output - x;
                loss += scale * (0.5 * numkit::dot(diff, diff) + gaussian_kl(mean, logvar));
                Vector g_z;
                nn::backward(dec, td, scale * diff, &g_dec, &g_z);
                Vector g_out(2 * d);
                for (std::size_t i = 0; i < d; ++i) {
                    g_out[i] = g_z[i] + scale * mean[i];
                    g_out[d + i] = g_z[i] * 0.5 * sigma[i] * noise[i] +
                                   scale * 0.5 * (sigma[i] * sigma[i] - 1.0);
                }
                nn::backward(enc, te, g_out, &g_enc, nullptr);
            }
        } catch (const NonFiniteValue& e) {
            throw NonFiniteLoss(std::string("vae: ") + e.what(), step);
        }
        if (!std::isfinite(loss)) throw NonFiniteLoss("vae: batch loss diverged", step);
        enc_opt.step(g_enc, cfg.lr);
        dec_opt.step(g_dec, cfg.lr);
        if (cfg.log_every && step % cfg.log_every == 0) log_point(step);
    }
    if (result.log.empty() || result.log.back().step != cfg.steps) log_point(cfg.steps);
    result.final_mse = result.log.back().mse;
    result.final_elbo = result.log.back().elbo;
    result.chart = std::make_shared<NetworkChart>(ChartKind::vae, std::move(enc), std::move(dec));
    return result;
}

}  // namespace tnar::manifold
