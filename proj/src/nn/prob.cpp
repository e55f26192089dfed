#include "tnar/nn/prob.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tnar/errors.hpp"

namespace tnar::nn {

using numkit::Vector;

ProbVec::ProbVec(Vector p) : p_(std::move(p)) {
    if (p_.empty()) throw std::invalid_argument("ProbVec: empty");
    double sum = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ProbVec: entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ProbVec: entries do not sum to 1");
}

std::size_t ProbVec::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p_.size(); ++i) {
        if (p_[i] > p_[best]) best = i;
    }
    return best;
}

ProbVec softmax(const Vector& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    Vector e(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        e[i] = std::exp(logits[i] - m);
        sum += e[i];
    }
    for (double& v : e) v /= sum;
    return ProbVec(std::move(e));
}

double kl_div(const ProbVec& p, const ProbVec& q) {
    if (p.size() != q.size()) throw DimensionMismatch("kl_div: distributions differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        if (pi == 0.0) continue;
        sum += pi * (std::log(std::max(pi, kProbFloor)) - std::log(std::max(q[i], kProbFloor)));
    }
    // rounding can leave -1e-17 when p ~ q
    return std::max(sum, 0.0);
}

double entropy(const ProbVec& p) {
    double sum = 0.0;
    for (double v : p.values()) {
        if (v > 0.0) sum -= v * std::log(v);
    }
    return std::max(sum, 0.0);
}

double cross_entropy(const ProbVec& p, std::size_t label) {
    if (label >= p.size()) throw DimensionMismatch("cross_entropy: label out of range");
    return -std::log(std::max(p[label], kProbFloor));
}

Vector kl_logit_grad(const ProbVec& p, const ProbVec& q) {
    if (p.size() != q.size()) throw DimensionMismatch("kl_logit_grad: length mismatch");
    Vector g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = q[i] - p[i];
    return g;
}

Vector entropy_logit_grad(const ProbVec& p) {
    const double h = entropy(p);
    Vector g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) g[i] = -p[i] * (std::log(p[i]) + h);
    }
    return g;
}

Vector cross_entropy_logit_grad(const ProbVec& p, std::size_t label) {
    if (label >= p.size()) throw DimensionMismatch("cross_entropy_logit_grad: label out of range");
    Vector g = p.values();
    g[label] -= 1.0;
    return g;
}

}  // namespace tnar::nn
