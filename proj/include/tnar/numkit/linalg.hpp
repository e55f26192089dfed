#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tnar::numkit {

// Dense vector of doubles. All arithmetic accumulates in index order.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t n, double v = 0.0) : data_(n, v) {}
    Vector(std::initializer_list<double> il) : data_(il) {}
    explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    const double& operator[](std::size_t i) const { return data_[i]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }

    const std::vector<double>& raw() const noexcept { return data_; }

    Vector& operator+=(const Vector& other);
    Vector& operator-=(const Vector& other);
    Vector& operator*=(double s);

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> data_;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);
Vector operator*(const Vector& a, double s);
Vector operator/(const Vector& a, double s);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);

// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

// v / ||v||_2. Throws ZeroVector when ||v||_2 <= 1e-300.
Vector l2_normalize(const Vector& v);

bool all_finite(const Vector& v);

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double v = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, v) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// A * x
Vector matvec(const Matrix& a, const Vector& x);
// A^T * x
Vector matvec_transposed(const Matrix& a, const Vector& x);
// A += alpha * u v^T
void add_outer(double alpha, const Vector& u, const Vector& v, Matrix& a);

}  // namespace tnar::numkit
