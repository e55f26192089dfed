#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tnar/numkit/linalg.hpp"
#include "tnar/numkit/rng.hpp"

namespace tnar::nn {

using numkit::Matrix;
using numkit::Vector;

enum class ActivationKind { tanh, relu, leaky_relu, identity };

struct Activation {
    ActivationKind kind = ActivationKind::identity;
    double slope = 0.0;  // leaky_relu only

    static Activation tanh() { return {ActivationKind::tanh, 0.0}; }
    static Activation relu() { return {ActivationKind::relu, 0.0}; }
    static Activation leaky_relu(double slope) { return {ActivationKind::leaky_relu, slope}; }
    static Activation identity() { return {ActivationKind::identity, 0.0}; }

    // "tanh", "relu", "identity", "leaky_relu(0.1)"
    std::string name() const;
    static Activation parse(const std::string& name);

    bool operator==(const Activation&) const = default;
};

enum class OutputHead { logits, identity };

std::string head_name(OutputHead h);
OutputHead parse_head(const std::string& name);

// Fully connected network. layer_dims = {in, h1, ..., out}; one activation per
// hidden layer; the last layer is always affine.
struct MlpSpec {
    std::vector<std::size_t> layer_dims;
    std::vector<Activation> activations;
    OutputHead head = OutputHead::logits;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t num_layers() const { return layer_dims.size() - 1; }

    // Throws std::invalid_argument on inconsistent shapes.
    void validate() const;

    // Convenience: {in, hidden..., out} with one activation for every hidden layer.
    static MlpSpec uniform(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                           Activation act, OutputHead head);

    bool operator==(const MlpSpec&) const = default;
};

// weights[l] is (layer_dims[l+1] x layer_dims[l]). Also used for gradients.
struct MlpParams {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static MlpParams zeros(const MlpSpec& spec);

    std::size_t num_params() const;
    // Flat layout: W0 (row-major), b0, W1, b1, ...
    Vector flatten() const;
    void assign_flat(const Vector& flat);
    double& at_flat(std::size_t index);

    MlpParams& operator+=(const MlpParams& other);
    MlpParams& operator*=(double s);
    bool all_finite() const;

    bool operator==(const MlpParams&) const = default;
};

// Glorot-uniform weights in [-s, s], s = sqrt(6 / (fan_in + fan_out)); zero biases.
MlpParams init_params(const MlpSpec& spec, numkit::Rng& rng);

struct Mlp {
    MlpSpec spec;
    MlpParams params;

    static Mlp initialized(MlpSpec spec, numkit::Rng& rng);
};

// Per-layer values recorded by a forward pass, reused by reverse mode.
struct ForwardTrace {
    std::vector<Vector> inputs;  // inputs[l] feeds layer l; inputs[0] = x
    std::vector<Vector> pre;     // pre-activations of layer l
    Vector output;
};

ForwardTrace forward_trace(const Mlp& net, const Vector& x);
Vector forward(const Mlp& net, const Vector& x);

// Reverse sweep of <net(x), upstream>. Either output pointer may be null.
// Parameter gradients are accumulated (added) into *param_grad.
void backward(const Mlp& net, const ForwardTrace& trace, const Vector& upstream,
              MlpParams* param_grad, Vector* input_grad);

// J_x(net)^T upstream
Vector grad_input(const Mlp& net, const Vector& x, const Vector& upstream);
// d<net(x), upstream>/d params
MlpParams grad_params(const Mlp& net, const Vector& x, const Vector& upstream);
// J_x(net) v, forward mode
Vector jvp(const Mlp& net, const Vector& x, const Vector& v);

// Plain-text checkpoint: one header line, then one line per tensor.
void write_checkpoint(std::ostream& os, const Mlp& net);
Mlp read_checkpoint(std::istream& is);

}  // namespace tnar::nn
