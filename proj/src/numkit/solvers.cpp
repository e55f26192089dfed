#include "tnar/numkit/solvers.hpp"

#include <cmath>
#include <string>

#include "tnar/errors.hpp"

namespace tnar::numkit {

Vector LinearOperator::operator()(const Vector& v) const {
    if (v.size() != dim) {
        throw DimensionMismatch("LinearOperator: input has length " + std::to_string(v.size()) +
                                ", operator dim is " + std::to_string(dim));
    }
    Vector out = apply(v);
    if (out.size() != dim) throw DimensionMismatch("LinearOperator: apply changed dimension");
    return out;
}

LinearOperator LinearOperator::from_matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("LinearOperator::from_matrix: not square");
    return {m.rows(), [m](const Vector& v) { return matvec(m, v); }};
}

LinearOperator LinearOperator::identity(std::size_t n) {
    return {n, [](const Vector& v) { return v; }};
}

CgResult cg_solve(const LinearOperator& a, const Vector& b, std::size_t max_iters, double tol) {
    if (b.size() != a.dim) {
        throw DimensionMismatch("cg_solve: rhs length " + std::to_string(b.size()) +
                                " vs operator dim " + std::to_string(a.dim));
    }
    CgResult res{Vector(a.dim), 0.0, 0, false};
    Vector r = b;
    Vector p = r;
    double rr = dot(r, r);
    const double target = tol * norm2(b);
    res.residual_norm = std::sqrt(rr);
    if (res.residual_norm <= target) {
        res.converged = true;
        return res;
    }
    while (res.iterations < max_iters) {
        const Vector ap = a(p);
        const double curvature = dot(p, ap);
        if (!(curvature > 0.0)) {
            throw BreakdownError("cg_solve: non-positive curvature p^T A p = " +
                                 std::to_string(curvature));
        }
        const double alpha = rr / curvature;
        axpy(alpha, p, res.x);
        axpy(-alpha, ap, r);
        ++res.iterations;
        const double rr_next = dot(r, r);
        res.residual_norm = std::sqrt(rr_next);
        if (res.residual_norm <= target) {
            res.converged = true;
            break;
        }
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        rr = rr_next;
    }
    return res;
}

Vector power_iteration(const LinearOperator& a, const Vector& init, std::size_t iters) {
    if (init.size() != a.dim) throw DimensionMismatch("power_iteration: init length mismatch");
    Vector x = l2_normalize(init);
    for (std::size_t k = 0; k < iters; ++k) x = l2_normalize(a(x));
    return x;
}

}  // namespace tnar::numkit
