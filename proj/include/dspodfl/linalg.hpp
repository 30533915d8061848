#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dspodfl {

using Vector = std::vector<double>;

// Dense row-major matrix. Desk scale only (m <= ~200 clients, small model dims).
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static Matrix identity(int n)
    {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    double* row(int i) { return a_.data() + static_cast<size_t>(i) * cols_; }
    const double* row(int i) const { return a_.data() + static_cast<size_t>(i) * cols_; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    bool operator==(const Matrix& o) const
    {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

private:
    int rows_, cols_;
    std::vector<double> a_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

double frobenius_norm_sq(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
void axpy(double alpha, const Vector& x, Vector& y);  // y += alpha * x

// Row mean of an m x n matrix (the average model).
Vector row_mean(const Matrix& theta);

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
// Deterministic; suitable for the dense desk-scale matrices used here.
std::vector<double> symmetric_eigenvalues(const Matrix& a, double tol = 1e-14);

// Largest |eigenvalue| of a symmetric matrix.
double spectral_radius_symmetric(const Matrix& a);

// Solve A x = b for symmetric positive definite A (Cholesky).
Vector spd_solve(const Matrix& a, const Vector& b);

// Largest eigenvalue of the symmetric PSD matrix X^T X / scale without forming
// it when X is tall (power iteration on the Gram operator).
double gram_top_eigenvalue(const Matrix& x, int iters = 200, uint64_t seed = 12345);

}  // namespace dspodfl
