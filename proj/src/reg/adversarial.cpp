#include "tnar/reg/adversarial.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tnar/errors.hpp"
#include "tnar/util/format.hpp"

namespace tnar::reg {

namespace {

void require_len(const Vector& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw DimensionMismatch(std::string(what) + ": length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
    }
}

nn::ProbVec clean_distribution(const nn::Mlp& net, const Vector& x) {
    return nn::softmax(nn::forward(net, x));
}

}  // namespace

void AdvConfig::validate() const {
    if (!(eps_tangent > 0.0 && eps_normal > 0.0 && eps_vat > 0.0)) {
        throw std::invalid_argument("AdvConfig: perturbation radii must be positive");
    }
    if (!(lambda_orth >= 0.0)) throw std::invalid_argument("AdvConfig: lambda_orth < 0");
    if (power_iters < 1 || cg_iters < 1) {
        throw std::invalid_argument("AdvConfig: power_iters and cg_iters must be >= 1");
    }
    if (!(fd_step > 0.0)) throw std::invalid_argument("AdvConfig: fd_step must be positive");
    if (!(cg_tol >= 0.0)) throw std::invalid_argument("AdvConfig: cg_tol < 0");
}

double AdvConfig::probe_scale(const Vector& x) const { return fd_step * (1.0 + numkit::norm2(x)); }

double div_F(const nn::Mlp& net, const Vector& x, const Vector& r) {
    return div_F(net, clean_distribution(net, x), x, r);
}

double div_F(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& r) {
    require_len(r, x.size(), "div_F");
    return nn::kl_div(clean, nn::softmax(nn::forward(net, x + r)));
}

Vector grad_r_F(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& r) {
    require_len(r, x.size(), "grad_r_F");
    const nn::ForwardTrace t = nn::forward_trace(net, x + r);
    Vector g;
    nn::backward(net, t, nn::kl_logit_grad(clean, nn::softmax(t.output)), nullptr, &g);
    return g;
}

Vector hvp(const nn::Mlp& net, const Vector& x, const Vector& v, double xi) {
    return hvp(net, clean_distribution(net, x), x, v, xi);
}

Vector hvp(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& v,
           double xi) {
    require_len(v, x.size(), "hvp");
    if (!(xi > 0.0)) throw std::invalid_argument("hvp: xi must be positive");
    return grad_r_F(net, clean, x, xi * v) / xi;
}

AdvPerturbation vat_perturbation(const nn::Mlp& net, const Vector& x, const AdvConfig& cfg,
                                 numkit::Rng& rng) {
    cfg.validate();
    const nn::ProbVec clean = clean_distribution(net, x);
    const double xi = cfg.probe_scale(x);
    const numkit::LinearOperator h{x.size(),
                                   [&](const Vector& v) { return hvp(net, clean, x, v, xi); }};
    const Vector d = numkit::power_iteration(h, numkit::random_unit(rng, x.size()), cfg.power_iters);
    AdvPerturbation out;
    out.r = cfg.eps_vat * d;
    out.f_value = div_F(net, clean, x, out.r);
    return out;
}

Vector jtHj_apply(const nn::Mlp& net, const Chart& chart, const Vector& x, const ChartPoint& at,
                  const Vector& eta, double xi) {
    return jtHj_apply(net, clean_distribution(net, x), chart, x, at, eta, xi);
}

Vector jtHj_apply(const nn::Mlp& net, const nn::ProbVec& clean, const Chart& chart,
                  const Vector& x, const ChartPoint& at, const Vector& eta, double xi) {
    require_len(eta, chart.latent_dim(), "jtHj_apply");
    require_len(x, chart.ambient_dim(), "jtHj_apply");
    if (!(xi > 0.0)) throw std::invalid_argument("jtHj_apply: xi must be positive");
    const ChartPoint moved = at.shifted(xi * eta);
    const Vector r = chart.decode(moved) - chart.decode(at);
    return chart.vjp(moved, grad_r_F(net, clean, x, r)) / xi;
}

Vector jtj_apply(const Chart& chart, const ChartPoint& at, const Vector& mu, JtjMode mode,
                 double xi) {
    require_len(mu, chart.latent_dim(), "jtj_apply");
    if (mode == JtjMode::exact) return chart.vjp(at, chart.jvp(at, mu));
    // grad K(t mu) / t = J(z + t mu)^T (g(z + t mu) - g(z)) / t, with t mu of length xi
    const double n = numkit::norm2(mu);
    if (n == 0.0) return Vector(mu.size());
    const double t = xi / n;
    const ChartPoint moved = at.shifted(t * mu);
    return chart.vjp(moved, chart.decode(moved) - chart.decode(at)) / t;
}

Vector generalized_power_iteration(const numkit::LinearOperator& a, const numkit::LinearOperator& b,
                                   const Vector& init, std::size_t iters, std::size_t cg_iters,
                                   double cg_tol) {
    if (a.dim != b.dim || init.size() != a.dim) {
        throw DimensionMismatch("generalized_power_iteration: operator/init dimensions differ");
    }
    Vector eta = numkit::l2_normalize(init);
    for (std::size_t k = 0; k < iters; ++k) {
        const Vector v = a(eta);
        const numkit::CgResult mu = numkit::cg_solve(b, v, cg_iters, cg_tol);
        eta = numkit::l2_normalize(mu.x);
    }
    return eta;
}

namespace {

AdvPerturbation tangent_impl(const nn::Mlp& net, const nn::ProbVec& clean, const Chart& chart,
                             const Vector& x, const AdvConfig& cfg, numkit::Rng& rng) {
    const ChartPoint at = chart.encode(x);
    const std::size_t d = chart.latent_dim();
    const double xi = cfg.probe_scale(x);
    const numkit::LinearOperator curvature{
        d, [&](const Vector& eta) { return jtHj_apply(net, clean, chart, x, at, eta, xi); }};
    const numkit::LinearOperator metric{
        d, [&](const Vector& mu) { return jtj_apply(chart, at, mu, cfg.jtj_mode, xi); }};
    const Vector init = numkit::random_unit(rng, d);
    const Vector eta =
        generalized_power_iteration(curvature, metric, init, cfg.power_iters, cfg.cg_iters, cfg.cg_tol);
    const Vector j_eta = chart.jvp(at, eta);
    const double n = numkit::norm2(j_eta);
    if (!(n > 1e-12)) throw DegenerateChart("tangent_perturbation: ||J eta|| vanished");
    AdvPerturbation out;
    out.r = (cfg.eps_tangent / n) * j_eta;
    out.eta = eta;
    out.f_value = div_F(net, clean, x, out.r);
    out.chart_residual = numkit::norm2(chart.decode(at) - x);
    return out;
}

}  // namespace

AdvPerturbation tangent_perturbation(const nn::Mlp& net, const Chart& chart, const Vector& x,
                                     const AdvConfig& cfg, numkit::Rng& rng) {
    cfg.validate();
    return tangent_impl(net, clean_distribution(net, x), chart, x, cfg, rng);
}

std::optional<AdvPerturbation> normal_or_flat(const nn::Mlp& net, const nn::ProbVec& clean,
                                              const Vector& x, const Vector* r_par,
                                              const AdvConfig& cfg, numkit::Rng& rng) {
    const double xi = cfg.probe_scale(x);
    const double lambda = r_par ? cfg.lambda_orth : 0.0;
    const Vector u = r_par ? numkit::l2_normalize(*r_par) : Vector(x.size());
    const numkit::LinearOperator shifted{x.size(), [&](const Vector& r) {
        Vector out = 0.5 * hvp(net, clean, x, r, xi);
        // ||u|| = 1, so the spectral shift lambda * ||u|| is lambda
        numkit::axpy(-lambda * numkit::dot(u, r), u, out);
        numkit::axpy(lambda, r, out);
        return out;
    }};
    const Vector init = numkit::random_unit(rng, x.size());
    Vector dir;
    try {
        dir = numkit::power_iteration(shifted, init, cfg.power_iters);
    } catch (const ZeroVector&) {
        return std::nullopt;
    }
    AdvPerturbation out;
    out.r = cfg.eps_normal * dir;
    out.f_value = div_F(net, clean, x, out.r);
    return out;
}

AdvPerturbation normal_perturbation(const nn::Mlp& net, const Vector& x, const Vector& r_par,
                                    const AdvConfig& cfg, numkit::Rng& rng) {
    cfg.validate();
    require_len(r_par, x.size(), "normal_perturbation");
    const auto out = normal_or_flat(net, clean_distribution(net, x), x, &r_par, cfg, rng);
    if (!out) throw ZeroVector("normal_perturbation: iteration collapsed (flat classifier)");
    return *out;
}

RegularizerBundle regularizer_bundle(const nn::Mlp& net, const Chart& chart, const Vector& x,
                                     const AdvConfig& cfg, numkit::Rng& rng) {
    return regularizer_bundle(net, clean_distribution(net, x), chart, x, cfg, rng);
}

RegularizerBundle regularizer_bundle(const nn::Mlp& net, const nn::ProbVec& clean,
                                     const Chart& chart, const Vector& x, const AdvConfig& cfg,
                                     numkit::Rng& rng) {
    cfg.validate();
    RegularizerBundle out;
    try {
        out.tangent_pert = tangent_impl(net, clean, chart, x, cfg, rng);
        out.tangent = out.tangent_pert->f_value;
    } catch (const ZeroVector&) {
        out.tangent_pert.reset();
    }
    // without a tangent direction the orthogonality term is dropped
    const Vector* r_par = out.tangent_pert ? &out.tangent_pert->r : nullptr;
    out.normal_pert = normal_or_flat(net, clean, x, r_par, cfg, rng);
    if (out.normal_pert) out.normal = out.normal_pert->f_value;
    out.entropy = nn::entropy(clean);
    return out;
}

void write_perturbation_csv(std::ostream& os, const std::vector<PerturbationRecord>& rows) {
    if (rows.empty()) return;
    const std::size_t dim = rows.front().x.size();
    os << "kind";
    for (std::size_t i = 0; i < dim; ++i) os << ",x" << i + 1;
    for (std::size_t i = 0; i < dim; ++i) os << ",r" << i + 1;
    os << ",f_value\n";
    for (const auto& row : rows) {
        require_len(row.x, dim, "write_perturbation_csv");
        require_len(row.r, dim, "write_perturbation_csv");
        os << row.kind;
        for (double v : row.x) os << ',' << util::format_double(v);
        for (double v : row.r) os << ',' << util::format_double(v);
        os << ',' << util::format_double(row.f_value) << '\n';
    }
}

}  // namespace tnar::reg
