#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tnar/manifold/chart.hpp"
#include "tnar/manifold/dataset.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/reg/adversarial.hpp"

namespace tnar::train {

using manifold::LabeledPoint;
using numkit::Vector;

enum class Method { supervised, vat, tar, nar, tnar };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct SslConfig {
    Method method = Method::tnar;
    double alpha_tangent = 1.0;
    double alpha_normal = 1.0;
    double alpha_entropy = 1.0;
    double alpha_vat = 1.0;
    reg::AdvConfig adv;
    std::size_t labeled_batch = 32;
    std::size_t unlabeled_batch = 128;
    std::size_t total_updates = 10000;
    double lr = 1e-3;
    std::size_t lr_decay_start = 6000;
    std::uint64_t seed = 0;
    std::size_t log_every = 100;
    // regularizers average over labeled + unlabeled inputs when true
    bool regularize_labeled = true;
    // run the per-example kernel with OpenMP; results are bitwise identical either way
    bool parallel = true;

    void validate() const;
    bool needs_chart() const;
};

// Regularizer weights after method gating.
struct EffectiveWeights {
    double tangent = 0.0;
    double normal = 0.0;
    double entropy = 0.0;
    double vat = 0.0;
};
EffectiveWeights effective_weights(const SslConfig& cfg);

struct LossTerms {
    double supervised = 0.0;  // mean cross-entropy over the labeled batch
    double r_tangent = 0.0;   // regularizer means over the regularization batch
    double r_normal = 0.0;
    double r_entropy = 0.0;
    double r_vat = 0.0;
    double total = 0.0;

    bool operator==(const LossTerms&) const = default;
};

struct BatchLoss {
    LossTerms terms;
    nn::MlpParams grad;  // perturbations held constant
};

// Per-example contribution, computed independently of every other example.
struct ExampleTerms {
    double cross_entropy = 0.0;
    double r_tangent = 0.0;
    double r_normal = 0.0;
    double r_entropy = 0.0;
    double r_vat = 0.0;
    nn::MlpParams grad;
};

struct ExampleTask {
    const Vector* x = nullptr;
    std::optional<std::size_t> label;
    bool regularize = true;
};

struct KernelContext {
    const nn::Mlp* net = nullptr;
    const manifold::Chart* chart = nullptr;
    const SslConfig* cfg = nullptr;
    double sup_weight = 0.0;  // 1 / |labeled batch|
    double reg_weight = 0.0;  // 1 / |regularization batch|
    std::uint64_t step_seed = 0;
};

numkit::Rng example_rng(std::uint64_t step_seed, std::size_t index);

ExampleTerms example_terms(const KernelContext& ctx, const ExampleTask& task, std::size_t index);

// Serial reference kernel and the OpenMP kernel; outputs are identical.
std::vector<ExampleTerms> run_examples_serial(const KernelContext& ctx,
                                              const std::vector<ExampleTask>& tasks);
std::vector<ExampleTerms> run_examples_parallel(const KernelContext& ctx,
                                                const std::vector<ExampleTask>& tasks);

// Semi-supervised objective and its parameter gradient on one step's batches.
// Throws MissingChart when the method needs a chart and none is given.
BatchLoss ssl_loss(const nn::Mlp& net, const std::vector<LabeledPoint>& batch_l,
                   const std::vector<Vector>& batch_ul, const manifold::Chart* chart,
                   const SslConfig& cfg, std::uint64_t step_seed);

}  // namespace tnar::train
