#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "dlayer/error.hpp"

namespace dlayer {

// Dense column vector of doubles.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double fill = 0.0);
    explicit Vector(std::vector<double> entries);
    Vector(std::initializer_list<double> entries);

    std::size_t dim() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }
    const std::vector<double>& std() const noexcept { return data_; }

    // Contiguous sub-vector [offset, offset + count).
    Vector segment(std::size_t offset, std::size_t count) const;
    void set_segment(std::size_t offset, const Vector& v);

    Vector& operator+=(const Vector& rhs);
    Vector& operator-=(const Vector& rhs);
    Vector& operator*=(double s);

    double norm() const;
    double norm_inf() const;
    double squared_norm() const;
    bool all_finite() const;

    friend bool operator==(const Vector&, const Vector&) = default;

private:
    std::vector<double> data_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator*(double s, Vector v);
double dot(const Vector& a, const Vector& b);
Vector concat(std::span<const Vector> parts);

// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix diagonal(const Vector& d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> values() const noexcept { return data_; }

    Matrix transpose() const;
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& m);

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    double norm_max() const;
    double norm_frobenius() const;
    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix m);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

// a' * x without forming the transpose.
Vector transpose_times(const Matrix& a, const Vector& x);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix block_diagonal(std::span<const Matrix> blocks);
Matrix vstack(std::span<const Matrix> blocks);
Matrix hstack(std::span<const Matrix> blocks);
Matrix block2x2(const Matrix& top_left, const Matrix& top_right,
                const Matrix& bottom_left, const Matrix& bottom_right);

double symmetry_defect(const Matrix& m);

// Relative singular value cutoff used for every numerical rank in the library.
inline constexpr double kRankThreshold = 1e-10;

// Smallest cosine between ker m and ker m' that still counts as independent
// when deriving rank(m^2).
inline constexpr double kPairingThreshold = 1e-5;

struct Spectrum {
    std::vector<std::complex<double>> eigenvalues;
    std::size_t rank = 0;          // numerical rank of m
    std::size_t rank_squared = 0;  // numerical rank of m*m
    double norm2 = 0.0;            // largest singular value of m
};

// Eigenvalues of a general square matrix together with the ranks of m and m^2.
// Throws ShapeMismatch for non-square input and ConvergenceFailure when the
// QR iteration does not settle.
Spectrum eig(const Matrix& m);

// Eigenvalues of a symmetric matrix in ascending order.
std::vector<double> eig_symmetric(const Matrix& m);

std::vector<double> singular_values(const Matrix& m);
std::size_t numerical_rank(const Matrix& m);
double norm2(const Matrix& m);

// Spectral projector onto ker m along range m. Empty when zero is a defective
// eigenvalue, so that the two subspaces do not complement each other.
std::optional<Matrix> kernel_projector(const Matrix& m);

// Minimum-norm least-squares solution of a x = b.
Vector solve_least_squares(const Matrix& a, const Vector& b);

}  // namespace dlayer
