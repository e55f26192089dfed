#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tnar/manifold/chart.hpp"
#include "tnar/nn/mlp.hpp"
#include "tnar/nn/prob.hpp"
#include "tnar/numkit/rng.hpp"
#include "tnar/numkit/solvers.hpp"

namespace tnar::reg {

using manifold::Chart;
using manifold::ChartPoint;
using numkit::Vector;

// How J^T J mu is evaluated: exact vjp(jvp(mu)), or by finite-differencing the
// gradient of K(eta) = ||g(z + eta) - g(z)||^2 / 2.
enum class JtjMode { exact, k_finite_difference };

struct AdvConfig {
    double eps_tangent = 0.3;
    double eps_normal = 0.05;
    double eps_vat = 0.3;
    double lambda_orth = 1.0;
    std::size_t power_iters = 1;
    std::size_t cg_iters = 10;
    double cg_tol = 1e-8;
    // finite-difference probe scale; the probe used at x is fd_step * (1 + ||x||)
    double fd_step = 1e-6;
    JtjMode jtj_mode = JtjMode::exact;

    void validate() const;
    double probe_scale(const Vector& x) const;
};

struct AdvPerturbation {
    Vector r;
    std::optional<Vector> eta;  // latent direction, tangent perturbations only
    double f_value = 0.0;
    // ||g(h(x)) - x||; large values mean x sits off the chart (tangent only)
    double chart_residual = 0.0;
};

// F(x, r) = KL(p(y|x) || p(y|x + r)); the clean distribution is a constant.
double div_F(const nn::Mlp& net, const Vector& x, const Vector& r);
double div_F(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& r);

// Exact reverse-mode gradient of F with respect to r.
Vector grad_r_F(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& r);

// H v ~= grad_r F(x, xi v) / xi, where H is the Hessian of F in r at r = 0.
Vector hvp(const nn::Mlp& net, const Vector& x, const Vector& v, double xi);
Vector hvp(const nn::Mlp& net, const nn::ProbVec& clean, const Vector& x, const Vector& v,
           double xi);

// Power iteration on H from a random unit start; r = eps_vat * d.
// Throws ZeroVector when the classifier is locally flat.
AdvPerturbation vat_perturbation(const nn::Mlp& net, const Vector& x, const AdvConfig& cfg,
                                 numkit::Rng& rng);

// J^T H J eta = grad_eta F(x, r(xi eta)) / xi with r(eta) = g(z + eta) - g(z).
Vector jtHj_apply(const nn::Mlp& net, const Chart& chart, const Vector& x, const ChartPoint& at,
                  const Vector& eta, double xi);
Vector jtHj_apply(const nn::Mlp& net, const nn::ProbVec& clean, const Chart& chart,
                  const Vector& x, const ChartPoint& at, const Vector& eta, double xi);

// J^T J mu. `xi` is only used by JtjMode::k_finite_difference.
Vector jtj_apply(const Chart& chart, const ChartPoint& at, const Vector& mu,
                 JtjMode mode = JtjMode::exact, double xi = 1e-6);

// Generalized eigenvector iteration for (A, B), A PSD and B SPD:
//   v <- A eta; mu <- B^{-1} v (CG); eta <- mu / ||mu||.
Vector generalized_power_iteration(const numkit::LinearOperator& a, const numkit::LinearOperator& b,
                                   const Vector& init, std::size_t iters, std::size_t cg_iters,
                                   double cg_tol);

// Tangent-space adversarial perturbation r = eps_tangent * J eta / ||J eta||.
// Throws DegenerateChart if ||J eta|| <= 1e-12, ZeroVector if the curvature vanishes.
AdvPerturbation tangent_perturbation(const nn::Mlp& net, const Chart& chart, const Vector& x,
                                     const AdvConfig& cfg, numkit::Rng& rng);

// Normal-space adversarial perturbation: power iteration on
//   1/2 H - lambda u u^T + lambda I,   u = r_par / ||r_par||
// and r = eps_normal * (unit iterate).
AdvPerturbation normal_perturbation(const nn::Mlp& net, const Vector& x, const Vector& r_par,
                                    const AdvConfig& cfg, numkit::Rng& rng);

struct RegularizerBundle {
    double tangent = 0.0;
    double normal = 0.0;
    double entropy = 0.0;
    std::optional<AdvPerturbation> tangent_pert;  // empty when the curvature vanished
    std::optional<AdvPerturbation> normal_pert;
};

// Tangent, then normal (which consumes the tangent direction), then entropy.
// A vanishing curvature contributes 0 instead of throwing.
RegularizerBundle regularizer_bundle(const nn::Mlp& net, const Chart& chart, const Vector& x,
                                     const AdvConfig& cfg, numkit::Rng& rng);
RegularizerBundle regularizer_bundle(const nn::Mlp& net, const nn::ProbVec& clean,
                                     const Chart& chart, const Vector& x, const AdvConfig& cfg,
                                     numkit::Rng& rng);

// Normal perturbation when no tangent direction is available (plain H iteration).
std::optional<AdvPerturbation> normal_or_flat(const nn::Mlp& net, const nn::ProbVec& clean,
                                              const Vector& x, const Vector* r_par,
                                              const AdvConfig& cfg, numkit::Rng& rng);

// CSV rows `kind,x1..xD,r1..rD,f_value` for offline inspection.
struct PerturbationRecord {
    std::string kind;  // vat | tangent | normal
    Vector x;
    Vector r;
    double f_value = 0.0;
};
void write_perturbation_csv(std::ostream& os, const std::vector<PerturbationRecord>& rows);

}  // namespace tnar::reg
