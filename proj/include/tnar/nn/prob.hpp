#pragma once

#include <cstddef>

#include "tnar/numkit/linalg.hpp"

namespace tnar::nn {

// Lower clamp applied to probabilities inside logarithms.
inline constexpr double kProbFloor = 1e-12;

// Categorical distribution: entries in [0, 1] summing to 1 within 1e-9.
class ProbVec {
public:
    // Throws std::invalid_argument if the entries are not a distribution.
    explicit ProbVec(numkit::Vector p);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const numkit::Vector& values() const noexcept { return p_; }

    // Lowest index among the maximal entries.
    std::size_t argmax() const;

private:
    numkit::Vector p_;
};

// Max-shifted softmax.
ProbVec softmax(const numkit::Vector& logits);

// KL(p || q) = sum p_i log(p_i / q_i), 0 log 0 := 0, both arguments floored in the log.
double kl_div(const ProbVec& p, const ProbVec& q);

// -sum p_i log p_i
double entropy(const ProbVec& p);

// -log p_label
double cross_entropy(const ProbVec& p, std::size_t label);

// d KL(p_const || softmax(l)) / d l = q - p
numkit::Vector kl_logit_grad(const ProbVec& p, const ProbVec& q);
// d H(softmax(l)) / d l = -p (log p + H)
numkit::Vector entropy_logit_grad(const ProbVec& p);
// d CE / d l = p - onehot(label)
numkit::Vector cross_entropy_logit_grad(const ProbVec& p, std::size_t label);

}  // namespace tnar::nn
