#include "dspodfl/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "dspodfl/rng.hpp"

namespace dspodfl {

Matrix matmul(const Matrix& a, const Matrix& b)
{
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            double* crow = c.row(i);
            for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a)
{
    Matrix t(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b)
{
    Matrix c = a;
    for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b)
{
    Matrix c = a;
    for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

Matrix scale(const Matrix& a, double s)
{
    Matrix c = a;
    for (double& v : c.data()) v *= s;
    return c;
}

double frobenius_norm_sq(const Matrix& a)
{
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b)
{
    double m = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

double dot(const Vector& a, const Vector& b)
{
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vector& x, Vector& y)
{
    for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

Vector row_mean(const Matrix& theta)
{
    Vector mean(theta.cols(), 0.0);
    for (int i = 0; i < theta.rows(); ++i) {
        const double* r = theta.row(i);
        for (int j = 0; j < theta.cols(); ++j) mean[j] += r[j];
    }
    const double inv = 1.0 / theta.rows();
    for (double& v : mean) v *= inv;
    return mean;
}

std::vector<double> symmetric_eigenvalues(const Matrix& a, double tol)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: not square");
    const int n = a.rows();
    Matrix m = a;

    auto off_diag_sq = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += m(i, j) * m(i, j);
        return s;
    };

    double scale = 0.0;
    for (double v : m.data()) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) return std::vector<double>(n, 0.0);
    const double thresh = tol * tol * scale * scale;

    for (int sweep = 0; sweep < 100 && off_diag_sq() > thresh; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::fabs(apq) <= tol * scale * 1e-3) continue;
                const double app = m(p, p), aqq = m(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                                 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = m(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double spectral_radius_symmetric(const Matrix& a)
{
    const auto eig = symmetric_eigenvalues(a);
    double r = 0.0;
    for (double v : eig) r = std::max(r, std::fabs(v));
    return r;
}

Vector spd_solve(const Matrix& a, const Vector& b)
{
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("spd_solve: shape mismatch");
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("spd_solve: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

double gram_top_eigenvalue(const Matrix& x, int iters, uint64_t seed)
{
    const int n = x.cols();
    Vector v(n);
    for (int j = 0; j < n; ++j)
        v[j] = rng::uniform01(seed, rng::Stream::Test, 0, j) - 0.5;
    double nv = norm2(v);
    if (nv == 0.0) v[0] = 1.0, nv = 1.0;
    for (double& e : v) e /= nv;

    double lambda = 0.0;
    Vector xv(x.rows()), w(n);
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            const double* r = x.row(i);
            for (int j = 0; j < n; ++j) s += r[j] * v[j];
            xv[i] = s;
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < x.rows(); ++i) {
            const double* r = x.row(i);
            for (int j = 0; j < n; ++j) w[j] += r[j] * xv[i];
        }
        lambda = norm2(w);
        if (lambda == 0.0) return 0.0;
        for (int j = 0; j < n; ++j) v[j] = w[j] / lambda;
    }
    return lambda;
}

}  // namespace dspodfl
