#include "tnar/nn/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tnar/errors.hpp"
#include "tnar/util/format.hpp"

namespace tnar::nn {

namespace {

double activate(const Activation& a, double x) {
    switch (a.kind) {
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::leaky_relu: return x > 0.0 ? x : a.slope * x;
        case ActivationKind::identity: return x;
    }
    return x;
}

// Derivative given both the pre-activation and the activated value.
double activate_deriv(const Activation& a, double pre, double post) {
    switch (a.kind) {
        case ActivationKind::tanh: return 1.0 - post * post;
        case ActivationKind::relu: return pre > 0.0 ? 1.0 : 0.0;
        case ActivationKind::leaky_relu: return pre > 0.0 ? 1.0 : a.slope;
        case ActivationKind::identity: return 1.0;
    }
    return 1.0;
}

void check_input(const Mlp& net, const Vector& x, const char* what) {
    if (x.size() != net.spec.input_dim()) {
        throw DimensionMismatch(std::string(what) + ": input length " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(net.spec.input_dim()));
    }
}

std::string join_dims(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(dims[i]);
    }
    return s;
}

}  // namespace

std::string Activation::name() const {
    switch (kind) {
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::relu: return "relu";
        case ActivationKind::leaky_relu: return "leaky_relu(" + util::format_double(slope) + ")";
        case ActivationKind::identity: return "identity";
    }
    return "identity";
}

Activation Activation::parse(const std::string& name) {
    if (name == "tanh") return tanh();
    if (name == "relu") return relu();
    if (name == "identity") return identity();
    const std::string prefix = "leaky_relu(";
    if (name.rfind(prefix, 0) == 0 && name.back() == ')') {
        return leaky_relu(
            util::parse_double(std::string_view(name).substr(prefix.size(),
                                                             name.size() - prefix.size() - 1)));
    }
    if (name == "leaky_relu") return leaky_relu(0.01);
    throw FormatError("unknown activation '" + name + "'");
}

std::string head_name(OutputHead h) { return h == OutputHead::logits ? "logits" : "identity"; }

OutputHead parse_head(const std::string& name) {
    if (name == "logits") return OutputHead::logits;
    if (name == "identity") return OutputHead::identity;
    throw FormatError("unknown output head '" + name + "'");
}

void MlpSpec::validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("MlpSpec: need at least two layer dims");
    for (auto d : layer_dims) {
        if (d == 0) throw std::invalid_argument("MlpSpec: layer dims must be positive");
    }
    if (activations.size() != layer_dims.size() - 2) {
        throw std::invalid_argument("MlpSpec: expected " + std::to_string(layer_dims.size() - 2) +
                                    " hidden activations, got " +
                                    std::to_string(activations.size()));
    }
}

MlpSpec MlpSpec::uniform(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                         Activation act, OutputHead head) {
    MlpSpec s;
    s.layer_dims.push_back(in);
    for (auto h : hidden) {
        s.layer_dims.push_back(h);
        s.activations.push_back(act);
    }
    s.layer_dims.push_back(out);
    s.head = head;
    s.validate();
    return s;
}

MlpParams MlpParams::zeros(const MlpSpec& spec) {
    spec.validate();
    MlpParams p;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        p.weights.emplace_back(spec.layer_dims[l + 1], spec.layer_dims[l]);
        p.biases.emplace_back(spec.layer_dims[l + 1]);
    }
    return p;
}

std::size_t MlpParams::num_params() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

Vector MlpParams::flatten() const {
    Vector flat(num_params());
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double v : weights[l].span()) flat[k++] = v;
        for (double v : biases[l]) flat[k++] = v;
    }
    return flat;
}

void MlpParams::assign_flat(const Vector& flat) {
    if (flat.size() != num_params()) throw DimensionMismatch("MlpParams::assign_flat: size");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double& v : weights[l].span()) v = flat[k++];
        for (double& v : biases[l]) v = flat[k++];
    }
}

double& MlpParams::at_flat(std::size_t index) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (index < weights[l].size()) return weights[l].data()[index];
        index -= weights[l].size();
        if (index < biases[l].size()) return biases[l][index];
        index -= biases[l].size();
    }
    throw std::out_of_range("MlpParams::at_flat");
}

MlpParams& MlpParams::operator+=(const MlpParams& other) {
    if (other.weights.size() != weights.size()) throw DimensionMismatch("MlpParams::operator+=");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        auto dst = weights[l].span();
        auto src = other.weights[l].span();
        if (dst.size() != src.size()) throw DimensionMismatch("MlpParams::operator+=");
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        biases[l] += other.biases[l];
    }
    return *this;
}

MlpParams& MlpParams::operator*=(double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double& v : weights[l].span()) v *= s;
        biases[l] *= s;
    }
    return *this;
}

bool MlpParams::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double v : weights[l].span()) {
            if (!std::isfinite(v)) return false;
        }
        if (!numkit::all_finite(biases[l])) return false;
    }
    return true;
}

MlpParams init_params(const MlpSpec& spec, numkit::Rng& rng) {
    MlpParams p = MlpParams::zeros(spec);
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        const double fan_in = static_cast<double>(spec.layer_dims[l]);
        const double fan_out = static_cast<double>(spec.layer_dims[l + 1]);
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : p.weights[l].span()) w = s * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

Mlp Mlp::initialized(MlpSpec spec, numkit::Rng& rng) {
    MlpParams params = init_params(spec, rng);
    return {std::move(spec), std::move(params)};
}

ForwardTrace forward_trace(const Mlp& net, const Vector& x) {
    check_input(net, x, "forward");
    const std::size_t n_layers = net.spec.num_layers();
    ForwardTrace t;
    t.inputs.reserve(n_layers);
    t.pre.reserve(n_layers);
    t.inputs.push_back(x);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Vector z = numkit::matvec(net.params.weights[l], t.inputs[l]);
        z += net.params.biases[l];
        if (!numkit::all_finite(z)) {
            throw NonFiniteValue("forward: non-finite pre-activation in layer " + std::to_string(l));
        }
        if (l + 1 < n_layers) {
            const Activation& act = net.spec.activations[l];
            Vector a(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(act, z[i]);
            t.pre.push_back(std::move(z));
            t.inputs.push_back(std::move(a));
        } else {
            t.output = z;
            t.pre.push_back(std::move(z));
        }
    }
    return t;
}

Vector forward(const Mlp& net, const Vector& x) { return forward_trace(net, x).output; }

void backward(const Mlp& net, const ForwardTrace& trace, const Vector& upstream,
              MlpParams* param_grad, Vector* input_grad) {
    if (upstream.size() != net.spec.output_dim()) {
        throw DimensionMismatch("backward: upstream length " + std::to_string(upstream.size()) +
                                ", network output is " + std::to_string(net.spec.output_dim()));
    }
    Vector delta = upstream;
    for (std::size_t l = net.spec.num_layers(); l-- > 0;) {
        if (param_grad) {
            numkit::add_outer(1.0, delta, trace.inputs[l], param_grad->weights[l]);
            param_grad->biases[l] += delta;
        }
        if (l == 0 && !input_grad) break;
        Vector g = numkit::matvec_transposed(net.params.weights[l], delta);
        if (l > 0) {
            const Activation& act = net.spec.activations[l - 1];
            const Vector& pre = trace.pre[l - 1];
            const Vector& post = trace.inputs[l];
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= activate_deriv(act, pre[i], post[i]);
            delta = std::move(g);
        } else {
            *input_grad = std::move(g);
        }
    }
}

Vector grad_input(const Mlp& net, const Vector& x, const Vector& upstream) {
    const ForwardTrace t = forward_trace(net, x);
    Vector g;
    backward(net, t, upstream, nullptr, &g);
    return g;
}

MlpParams grad_params(const Mlp& net, const Vector& x, const Vector& upstream) {
    const ForwardTrace t = forward_trace(net, x);
    MlpParams g = MlpParams::zeros(net.spec);
    backward(net, t, upstream, &g, nullptr);
    return g;
}

Vector jvp(const Mlp& net, const Vector& x, const Vector& v) {
    check_input(net, x, "jvp");
    if (v.size() != x.size()) throw DimensionMismatch("jvp: tangent length differs from input");
    const std::size_t n_layers = net.spec.num_layers();
    Vector a = x;
    Vector t = v;
    for (std::size_t l = 0; l < n_layers; ++l) {
        Vector z = numkit::matvec(net.params.weights[l], a);
        z += net.params.biases[l];
        Vector dz = numkit::matvec(net.params.weights[l], t);
        if (l + 1 == n_layers) return dz;
        const Activation& act = net.spec.activations[l];
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double post = activate(act, z[i]);
            dz[i] *= activate_deriv(act, z[i], post);
            z[i] = post;
        }
        a = std::move(z);
        t = std::move(dz);
    }
    return t;
}

void write_checkpoint(std::ostream& os, const Mlp& net) {
    net.spec.validate();
    os << "mlp layers=" << join_dims(net.spec.layer_dims) << " activations=";
    for (std::size_t i = 0; i < net.spec.activations.size(); ++i) {
        if (i) os << ',';
        os << net.spec.activations[i].name();
    }
    os << " head=" << head_name(net.spec.head) << '\n';
    for (std::size_t l = 0; l < net.spec.num_layers(); ++l) {
        const Matrix& w = net.params.weights[l];
        os << "W " << w.rows() << ' ' << w.cols();
        for (double v : w.span()) os << ' ' << util::format_double(v);
        os << '\n';
        const Vector& b = net.params.biases[l];
        os << "b " << b.size();
        for (double v : b) os << ' ' << util::format_double(v);
        os << '\n';
    }
}

namespace {

std::string next_content_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        const auto t = util::trim(line);
        if (t.empty() || t.front() == '#') continue;
        return std::string(t);
    }
    throw FormatError("checkpoint: unexpected end of input");
}

std::string field_value(const std::string& token, const std::string& key) {
    if (token.rfind(key + "=", 0) != 0) throw FormatError("checkpoint: expected field '" + key + "'");
    return token.substr(key.size() + 1);
}

}  // namespace

Mlp read_checkpoint(std::istream& is) {
    std::istringstream header(next_content_line(is));
    std::string magic, layers, acts, head;
    header >> magic >> layers >> acts >> head;
    if (magic != "mlp") throw FormatError("checkpoint: missing 'mlp' header");
    Mlp net;
    for (const auto& d : util::split(field_value(layers, "layers"), ',')) {
        const long long v = util::parse_int(d);
        if (v <= 0) throw FormatError("checkpoint: non-positive layer dim");
        net.spec.layer_dims.push_back(static_cast<std::size_t>(v));
    }
    const std::string act_list = field_value(acts, "activations");
    if (!act_list.empty()) {
        for (const auto& a : util::split(act_list, ',')) net.spec.activations.push_back(Activation::parse(a));
    }
    net.spec.head = parse_head(field_value(head, "head"));
    try {
        net.spec.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    net.params = MlpParams::zeros(net.spec);
    for (std::size_t l = 0; l < net.spec.num_layers(); ++l) {
        std::istringstream wl(next_content_line(is));
        std::string tag;
        std::size_t rows = 0, cols = 0;
        wl >> tag >> rows >> cols;
        Matrix& w = net.params.weights[l];
        if (tag != "W" || rows != w.rows() || cols != w.cols()) {
            throw FormatError("checkpoint: weight tensor " + std::to_string(l) + " has wrong shape");
        }
        for (double& v : w.span()) {
            std::string tok;
            if (!(wl >> tok)) throw FormatError("checkpoint: truncated weight tensor");
            v = util::parse_double(tok);
        }
        std::istringstream bl(next_content_line(is));
        std::size_t n = 0;
        bl >> tag >> n;
        Vector& b = net.params.biases[l];
        if (tag != "b" || n != b.size()) {
            throw FormatError("checkpoint: bias tensor " + std::to_string(l) + " has wrong shape");
        }
        for (double& v : b) {
            std::string tok;
            if (!(bl >> tok)) throw FormatError("checkpoint: truncated bias tensor");
            v = util::parse_double(tok);
        }
    }
    return net;
}

}  // namespace tnar::nn
