#include "dlayer/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dlayer {

namespace {

using EigenRowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_finite(std::span<const double> v, const char* what)
{
    for (double x : v) {
        if (!std::isfinite(x))
            throw Error(ErrorKind::NonFinite, std::string(what) + " contains a non-finite entry");
    }
}

void require_same_dim(const Vector& a, const Vector& b, const char* op)
{
    if (a.dim() != b.dim())
        throw Error(ErrorKind::ShapeMismatch,
                    std::string(op) + ": dimension " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": operand shapes differ");
}

EigenRowMatrix to_eigen(const Matrix& m)
{
    EigenRowMatrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = m(r, c);
    return out;
}

}  // namespace

// ---------------------------------------------------------------- Vector

Vector::Vector(std::size_t dim, double fill) : data_(dim, fill)
{
    require_finite(std::span<const double>(&fill, 1), "vector fill value");
}

Vector::Vector(std::vector<double> entries) : data_(std::move(entries))
{
    require_finite(data_, "vector");
}

Vector::Vector(std::initializer_list<double> entries) : data_(entries)
{
    require_finite(data_, "vector");
}

Vector Vector::segment(std::size_t offset, std::size_t count) const
{
    if (offset + count > data_.size())
        throw Error(ErrorKind::ShapeMismatch, "vector segment out of range");
    Vector out;
    out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(offset),
                     data_.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return out;
}

void Vector::set_segment(std::size_t offset, const Vector& v)
{
    if (offset + v.dim() > data_.size())
        throw Error(ErrorKind::ShapeMismatch, "vector segment out of range");
    std::copy(v.data_.begin(), v.data_.end(), data_.begin() + static_cast<std::ptrdiff_t>(offset));
}

Vector& Vector::operator+=(const Vector& rhs)
{
    require_same_dim(*this, rhs, "vector +");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += rhs.data_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& rhs)
{
    require_same_dim(*this, rhs, "vector -");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] -= rhs.data_[i];
    return *this;
}

Vector& Vector::operator*=(double s)
{
    for (double& x : data_)
        x *= s;
    return *this;
}

double Vector::squared_norm() const
{
    double s = 0.0;
    for (double x : data_)
        s += x * x;
    return s;
}

double Vector::norm() const { return std::sqrt(squared_norm()); }

double Vector::norm_inf() const
{
    double m = 0.0;
    for (double x : data_)
        m = std::max(m, std::abs(x));
    return m;
}

bool Vector::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
Vector operator*(double s, Vector v) { return v *= s; }

double dot(const Vector& a, const Vector& b)
{
    require_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        s += a[i] * b[i];
    return s;
}

Vector concat(std::span<const Vector> parts)
{
    std::vector<double> out;
    for (const Vector& p : parts)
        out.insert(out.end(), p.std().begin(), p.std().end());
    return Vector(std::move(out));
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
    require_finite(std::span<const double>(&fill, 1), "matrix fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major))
{
    if (data_.size() != rows * cols)
        throw Error(ErrorKind::ShapeMismatch, "matrix entry count does not match rows*cols");
    require_finite(data_, "matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_)
            throw Error(ErrorKind::ShapeMismatch, "ragged matrix literal");
        data_.insert(data_.end(), row.begin(), row.end());
    }
    require_finite(data_, "matrix");
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(const Vector& d)
{
    Matrix m(d.dim(), d.dim());
    for (std::size_t i = 0; i < d.dim(); ++i)
        m(i, i) = d[i];
    return m;
}

Matrix Matrix::transpose() const
{
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
{
    if (r0 + nr > rows_ || c0 + nc > cols_)
        throw Error(ErrorKind::ShapeMismatch, "matrix block out of range");
    Matrix out(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c)
            out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& m)
{
    if (r0 + m.rows() > rows_ || c0 + m.cols() > cols_)
        throw Error(ErrorKind::ShapeMismatch, "matrix block out of range");
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            (*this)(r0 + r, c0 + c) = m(r, c);
}

Matrix& Matrix::operator+=(const Matrix& rhs)
{
    require_same_shape(*this, rhs, "matrix +");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs)
{
    require_same_shape(*this, rhs, "matrix -");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] -= rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s)
{
    for (double& x : data_)
        x *= s;
    return *this;
}

double Matrix::norm_max() const
{
    double m = 0.0;
    for (double x : data_)
        m = std::max(m, std::abs(x));
    return m;
}

double Matrix::norm_frobenius() const
{
    double s = 0.0;
    for (double x : data_)
        s += x * x;
    return std::sqrt(s);
}

bool Matrix::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator-(Matrix m) { return m *= -1.0; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows())
        throw Error(ErrorKind::ShapeMismatch, "matrix product: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Vector operator*(const Matrix& a, const Vector& x)
{
    if (a.cols() != x.dim())
        throw Error(ErrorKind::ShapeMismatch, "matrix-vector product: dimensions differ");
    Vector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j)
            s += a(i, j) * x[j];
        out[i] = s;
    }
    return out;
}

Vector transpose_times(const Matrix& a, const Vector& x)
{
    if (a.rows() != x.dim())
        throw Error(ErrorKind::ShapeMismatch, "transposed product: dimensions differ");
    Vector out(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out[j] += a(i, j) * x[i];
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

Matrix block_diagonal(std::span<const Matrix> blocks)
{
    std::size_t rows = 0, cols = 0;
    for (const Matrix& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out(rows, cols);
    std::size_t r = 0, c = 0;
    for (const Matrix& b : blocks) {
        out.set_block(r, c, b);
        r += b.rows();
        c += b.cols();
    }
    return out;
}

Matrix vstack(std::span<const Matrix> blocks)
{
    if (blocks.empty())
        return {};
    std::size_t rows = 0;
    const std::size_t cols = blocks.front().cols();
    for (const Matrix& b : blocks) {
        if (b.cols() != cols)
            throw Error(ErrorKind::ShapeMismatch, "vstack: column counts differ");
        rows += b.rows();
    }
    Matrix out(rows, cols);
    std::size_t r = 0;
    for (const Matrix& b : blocks) {
        out.set_block(r, 0, b);
        r += b.rows();
    }
    return out;
}

Matrix hstack(std::span<const Matrix> blocks)
{
    if (blocks.empty())
        return {};
    std::size_t cols = 0;
    const std::size_t rows = blocks.front().rows();
    for (const Matrix& b : blocks) {
        if (b.rows() != rows)
            throw Error(ErrorKind::ShapeMismatch, "hstack: row counts differ");
        cols += b.cols();
    }
    Matrix out(rows, cols);
    std::size_t c = 0;
    for (const Matrix& b : blocks) {
        out.set_block(0, c, b);
        c += b.cols();
    }
    return out;
}

Matrix block2x2(const Matrix& top_left, const Matrix& top_right,
                const Matrix& bottom_left, const Matrix& bottom_right)
{
    if (top_left.rows() != top_right.rows() || bottom_left.rows() != bottom_right.rows() ||
        top_left.cols() != bottom_left.cols() || top_right.cols() != bottom_right.cols())
        throw Error(ErrorKind::ShapeMismatch, "block2x2: incompatible block shapes");
    Matrix out(top_left.rows() + bottom_left.rows(), top_left.cols() + top_right.cols());
    out.set_block(0, 0, top_left);
    out.set_block(0, top_left.cols(), top_right);
    out.set_block(top_left.rows(), 0, bottom_left);
    out.set_block(top_left.rows(), top_left.cols(), bottom_right);
    return out;
}

double symmetry_defect(const Matrix& m)
{
    if (!m.is_square())
        throw Error(ErrorKind::ShapeMismatch, "symmetry check on a non-square matrix");
    double d = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            d = std::max(d, std::abs(m(i, j) - m(j, i)));
    return d;
}

// ---------------------------------------------------------------- decompositions

std::vector<double> singular_values(const Matrix& m)
{
    if (m.rows() == 0 || m.cols() == 0)
        return {};
    Eigen::JacobiSVD<EigenRowMatrix> svd(to_eigen(m));
    const auto& s = svd.singularValues();
    return {s.data(), s.data() + s.size()};
}

namespace {

std::size_t rank_from_singular_values(const std::vector<double>& s)
{
    if (s.empty() || s.front() == 0.0)
        return 0;
    const double cutoff = kRankThreshold * s.front();
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [cutoff](double v) { return v > cutoff; }));
}

}  // namespace

std::size_t numerical_rank(const Matrix& m) { return rank_from_singular_values(singular_values(m)); }

double norm2(const Matrix& m)
{
    const auto s = singular_values(m);
    return s.empty() ? 0.0 : s.front();
}

Spectrum eig(const Matrix& m)
{
    if (!m.is_square())
        throw Error(ErrorKind::ShapeMismatch,
                    "eig: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    Spectrum out;
    if (m.rows() == 0)
        return out;

    Eigen::EigenSolver<Eigen::MatrixXd> solver;
    solver.compute(to_eigen(m), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::ConvergenceFailure, "eig: QR iteration did not converge");
    const auto& ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](const auto& a, const auto& b) {
                  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });

    // rank(m^2) = rank(m) - dim(ker m ∩ range m). Using the null bases of one
    // SVD of m keeps slow but nonzero modes from vanishing below the cutoff,
    // which happens when m*m is formed explicitly.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const std::vector<double> s(sv.data(), sv.data() + sv.size());
    out.norm2 = s.front();
    out.rank = rank_from_singular_values(s);

    const Eigen::Index k = static_cast<Eigen::Index>(m.rows() - out.rank);
    if (k == 0) {
        out.rank_squared = out.rank;
        return out;
    }
    const Eigen::MatrixXd pairing =
        svd.matrixU().rightCols(k).transpose() * svd.matrixV().rightCols(k);
    Eigen::JacobiSVD<Eigen::MatrixXd> cosines(pairing);
    const auto& c = cosines.singularValues();
    const auto independent = std::count_if(c.data(), c.data() + c.size(),
                                           [](double v) { return v > kPairingThreshold; });
    out.rank_squared = out.rank - static_cast<std::size_t>(k - independent);
    return out;
}

std::optional<Matrix> kernel_projector(const Matrix& m)
{
    if (!m.is_square())
        throw Error(ErrorKind::ShapeMismatch, "kernel_projector: matrix is not square");
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const std::size_t rank = rank_from_singular_values({sv.data(), sv.data() + sv.size()});
    const Eigen::Index k = n - static_cast<Eigen::Index>(rank);
    if (k == 0)
        return Matrix(m.rows(), m.cols());

    const Eigen::MatrixXd right = svd.matrixV().rightCols(k);
    const Eigen::MatrixXd left = svd.matrixU().rightCols(k);
    const Eigen::MatrixXd pairing = left.transpose() * right;
    Eigen::JacobiSVD<Eigen::MatrixXd> cosines(pairing);
    if (cosines.singularValues().minCoeff() <= kPairingThreshold)
        return std::nullopt;
    const Eigen::MatrixXd p = right * pairing.inverse() * left.transpose();

    Matrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = p(r, c);
    return out;
}

std::vector<double> eig_symmetric(const Matrix& m)
{
    if (!m.is_square())
        throw Error(ErrorKind::ShapeMismatch, "eig_symmetric: matrix is not square");
    if (m.rows() == 0)
        return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::ConvergenceFailure, "eig_symmetric: iteration did not converge");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

Vector solve_least_squares(const Matrix& a, const Vector& b)
{
    if (a.rows() != b.dim())
        throw Error(ErrorKind::ShapeMismatch,
                    "solve_least_squares: matrix has " + std::to_string(a.rows()) +
                        " rows but right-hand side has dimension " + std::to_string(b.dim()));
    if (a.cols() == 0)
        return {};
    if (a.rows() == 0)
        return Vector(a.cols());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kRankThreshold);
    const Eigen::Map<const Eigen::VectorXd> rhs(b.std().data(), static_cast<Eigen::Index>(b.dim()));
    const Eigen::VectorXd x = svd.solve(rhs);
    return Vector(std::vector<double>(x.data(), x.data() + x.size()));
}

}  // namespace dlayer
