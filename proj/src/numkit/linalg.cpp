#include "tnar/numkit/linalg.hpp"

#include <cmath>
#include <string>

#include "tnar/errors.hpp"

namespace tnar::numkit {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) +
                                " vs " + std::to_string(b));
    }
}

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
    require_same(size(), other.size(), "Vector::operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& other) {
    require_same(size(), other.size(), "Vector::operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Vector& Vector::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Vector operator+(const Vector& a, const Vector& b) {
    Vector out = a;
    out += b;
    return out;
}

Vector operator-(const Vector& a, const Vector& b) {
    Vector out = a;
    out -= b;
    return out;
}

Vector operator*(double s, const Vector& a) {
    Vector out = a;
    out *= s;
    return out;
}

Vector operator*(const Vector& a, double s) { return s * a; }

Vector operator/(const Vector& a, double s) {
    Vector out = a;
    for (double& v : out) v /= s;
    return out;
}

double dot(const Vector& a, const Vector& b) {
    require_same(a.size(), b.size(), "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

void axpy(double alpha, const Vector& x, Vector& y) {
    require_same(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector l2_normalize(const Vector& v) {
    const double n = norm2(v);
    if (!(n > 1e-300)) throw ZeroVector("l2_normalize: vector norm is zero");
    return v / n;
}

bool all_finite(const Vector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        require_same(row.size(), cols_, "Matrix initializer row");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector matvec(const Matrix& a, const Vector& x) {
    require_same(a.cols(), x.size(), "matvec");
    Vector y(a.rows());
    const double* row = a.data();
    for (std::size_t r = 0; r < a.rows(); ++r, row += a.cols()) {
        double sum = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    require_same(a.rows(), x.size(), "matvec_transposed");
    Vector y(a.cols());
    const double* row = a.data();
    for (std::size_t r = 0; r < a.rows(); ++r, row += a.cols()) {
        const double xr = x[r];
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
    }
    return y;
}

void add_outer(double alpha, const Vector& u, const Vector& v, Matrix& a) {
    require_same(a.rows(), u.size(), "add_outer rows");
    require_same(a.cols(), v.size(), "add_outer cols");
    double* row = a.data();
    for (std::size_t r = 0; r < a.rows(); ++r, row += a.cols()) {
        const double s = alpha * u[r];
        for (std::size_t c = 0; c < a.cols(); ++c) row[c] += s * v[c];
    }
}

}  // namespace tnar::numkit
