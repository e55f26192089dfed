#pragma once

#include <cstddef>
#include <functional>

#include "tnar/numkit/linalg.hpp"

namespace tnar::numkit {

// Matrix-free square operator. `apply` must map Vector(dim) -> Vector(dim).
struct LinearOperator {
    std::size_t dim = 0;
    std::function<Vector(const Vector&)> apply;

    Vector operator()(const Vector& v) const;

    static LinearOperator from_matrix(const Matrix& m);
    static LinearOperator identity(std::size_t n);
};

struct CgResult {
    Vector x;
    double residual_norm = 0.0;  // ||Ax - b||_2 of the returned iterate
    std::size_t iterations = 0;
    bool converged = false;
};

// Conjugate gradient from x0 = 0. Stops when ||Ax - b|| <= tol * ||b|| or
// after max_iters steps. Throws BreakdownError if p^T A p <= 0.
CgResult cg_solve(const LinearOperator& a, const Vector& b, std::size_t max_iters,
                  double tol);

// `iters` rounds of x <- normalize(A x) starting from normalize(init).
Vector power_iteration(const LinearOperator& a, const Vector& init, std::size_t iters);

}  // namespace tnar::numkit
