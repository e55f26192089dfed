#include "tnar/train/ssl.hpp"

#include <exception>
#include <stdexcept>

#include "tnar/errors.hpp"
#include "tnar/nn/prob.hpp"

namespace tnar::train {

std::string method_name(Method m) {
    switch (m) {
        case Method::supervised: return "supervised";
        case Method::vat: return "vat";
        case Method::tar: return "tar";
        case Method::nar: return "nar";
        case Method::tnar: return "tnar";
    }
    return "supervised";
}

Method parse_method(const std::string& name) {
    if (name == "supervised") return Method::supervised;
    if (name == "vat") return Method::vat;
    if (name == "tar") return Method::tar;
    if (name == "nar") return Method::nar;
    if (name == "tnar") return Method::tnar;
    throw std::invalid_argument("unknown method '" + name + "'");
}

void SslConfig::validate() const {
    if (alpha_tangent < 0 || alpha_normal < 0 || alpha_entropy < 0 || alpha_vat < 0) {
        throw std::invalid_argument("SslConfig: alphas must be >= 0");
    }
    if (labeled_batch < 1 || unlabeled_batch < 1) {
        throw std::invalid_argument("SslConfig: batch sizes must be >= 1");
    }
    if (!(lr > 0.0)) throw std::invalid_argument("SslConfig: lr must be positive");
    if (lr_decay_start > total_updates) {
        throw std::invalid_argument("SslConfig: lr_decay_start exceeds total_updates");
    }
    adv.validate();
}

bool SslConfig::needs_chart() const {
    return method == Method::tar || method == Method::nar || method == Method::tnar;
}

EffectiveWeights effective_weights(const SslConfig& cfg) {
    EffectiveWeights w;
    switch (cfg.method) {
        case Method::supervised: break;
        case Method::vat:
            w.vat = cfg.alpha_vat;
            w.entropy = cfg.alpha_entropy;
            break;
        case Method::tar:
            w.tangent = cfg.alpha_tangent;
            w.entropy = cfg.alpha_entropy;
            break;
        case Method::nar:
            w.normal = cfg.alpha_normal;
            w.entropy = cfg.alpha_entropy;
            break;
        case Method::tnar:
            w.tangent = cfg.alpha_tangent;
            w.normal = cfg.alpha_normal;
            w.entropy = cfg.alpha_entropy;
            break;
    }
    return w;
}

numkit::Rng example_rng(std::uint64_t step_seed, std::size_t index) {
    return numkit::Rng(numkit::Rng::mix(step_seed ^ numkit::Rng::mix(index)));
}

namespace {

// Accumulates weight * d KL(clean || p(x + r)) / d params.
void add_divergence_grad(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x,
                         const Vector& r, double weight, nn::MlpParams& grad) {
    const nn::ForwardTrace t = nn::forward_trace(net, x + r);
    const Vector up = weight * nn::kl_logit_grad(clean, nn::softmax(t.output));
    nn::backward(net, t, up, &grad, nullptr);
}

}  // namespace

ExampleTerms example_terms(const KernelContext& ctx, const ExampleTask& task, std::size_t index) {
    const nn::Mlp& net = *ctx.net;
    const SslConfig& cfg = *ctx.cfg;
    const Vector& x = *task.x;
    const EffectiveWeights w = effective_weights(cfg);

    ExampleTerms out;
    out.grad = nn::MlpParams::zeros(net.spec);
    const nn::ForwardTrace clean_trace = nn::forward_trace(net, x);
    const nn::ProbVec clean = nn::softmax(clean_trace.output);

    Vector clean_up(net.spec.output_dim());
    if (task.label) {
        out.cross_entropy = nn::cross_entropy(clean, *task.label);
        clean_up += ctx.sup_weight * nn::cross_entropy_logit_grad(clean, *task.label);
    }
    if (task.regularize) {
        numkit::Rng rng = example_rng(ctx.step_seed, index);
        const double rw = ctx.reg_weight;
        if (w.entropy > 0.0) {
            out.r_entropy = nn::entropy(clean);
            clean_up += (rw * w.entropy) * nn::entropy_logit_grad(clean);
        }
        if (w.vat > 0.0) {
            // vat_perturbation recomputes the clean pass; inline to reuse it
            const double xi = cfg.adv.probe_scale(x);
            const numkit::LinearOperator h{
                x.size(), [&](const Vector& v) { return reg::hvp(net, clean, x, v, xi); }};
            try {
                const Vector d =
                    numkit::power_iteration(h, numkit::random_unit(rng, x.size()), cfg.adv.power_iters);
                const Vector r = cfg.adv.eps_vat * d;
                out.r_vat = reg::div_F(net, clean, x, r);
                add_divergence_grad(net, clean, x, r, rw * w.vat, out.grad);
            } catch (const ZeroVector&) {
                out.r_vat = 0.0;
            }
        }
        if (w.tangent > 0.0 || w.normal > 0.0) {
            if (!ctx.chart) throw MissingChart("ssl_loss: method requires a manifold chart");
            const reg::RegularizerBundle b =
                reg::regularizer_bundle(net, clean, *ctx.chart, x, cfg.adv, rng);
            if (w.tangent > 0.0 && b.tangent_pert) {
                out.r_tangent = b.tangent;
                add_divergence_grad(net, clean, x, b.tangent_pert->r, rw * w.tangent, out.grad);
            }
            if (w.normal > 0.0 && b.normal_pert) {
                out.r_normal = b.normal;
                add_divergence_grad(net, clean, x, b.normal_pert->r, rw * w.normal, out.grad);
            }
        }
    }
    nn::backward(net, clean_trace, clean_up, &out.grad, nullptr);
    return out;
}

std::vector<ExampleTerms> run_examples_serial(const KernelContext& ctx,
                                              const std::vector<ExampleTask>& tasks) {
    std::vector<ExampleTerms> out;
    out.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) out.push_back(example_terms(ctx, tasks[i], i));
    return out;
}

std::vector<ExampleTerms> run_examples_parallel(const KernelContext& ctx,
                                                const std::vector<ExampleTask>& tasks) {
    const auto n = static_cast<long long>(tasks.size());
    std::vector<ExampleTerms> out(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = example_terms(ctx, tasks[k], k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

BatchLoss ssl_loss(const nn::Mlp& net, const std::vector<LabeledPoint>& batch_l,
                   const std::vector<Vector>& batch_ul, const manifold::Chart* chart,
                   const SslConfig& cfg, std::uint64_t step_seed) {
    if (cfg.needs_chart() && !chart) {
        throw MissingChart("method '" + method_name(cfg.method) + "' requires a manifold chart");
    }
    if (batch_l.empty()) throw EmptySet("ssl_loss: labeled batch is empty");

    std::vector<ExampleTask> tasks;
    tasks.reserve(batch_l.size() + batch_ul.size());
    std::size_t n_reg = 0;
    for (const auto& p : batch_l) {
        tasks.push_back({&p.x, p.label, cfg.regularize_labeled});
        if (cfg.regularize_labeled) ++n_reg;
    }
    for (const auto& x : batch_ul) {
        tasks.push_back({&x, std::nullopt, true});
        ++n_reg;
    }

    KernelContext ctx{&net, chart, &cfg, 1.0 / static_cast<double>(batch_l.size()),
                      n_reg ? 1.0 / static_cast<double>(n_reg) : 0.0, step_seed};
    const auto per_example =
        cfg.parallel ? run_examples_parallel(ctx, tasks) : run_examples_serial(ctx, tasks);

    BatchLoss out;
    out.grad = nn::MlpParams::zeros(net.spec);
    LossTerms& t = out.terms;
    for (const auto& e : per_example) {
        t.supervised += e.cross_entropy;
        t.r_tangent += e.r_tangent;
        t.r_normal += e.r_normal;
        t.r_entropy += e.r_entropy;
        t.r_vat += e.r_vat;
        out.grad += e.grad;
    }
    t.supervised *= ctx.sup_weight;
    t.r_tangent *= ctx.reg_weight;
    t.r_normal *= ctx.reg_weight;
    t.r_entropy *= ctx.reg_weight;
    t.r_vat *= ctx.reg_weight;
    const EffectiveWeights w = effective_weights(cfg);
    t.total = t.supervised + w.tangent * t.r_tangent + w.normal * t.r_normal +
              w.entropy * t.r_entropy + w.vat * t.r_vat;
    return out;
}

}  // namespace tnar::train
