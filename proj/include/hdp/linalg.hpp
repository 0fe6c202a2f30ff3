#pragma once

// Dense row-major matrices and a self-contained SVD for square operators.
//
// The SVD is the classic Golub-Reinsch scheme: Householder bidiagonalization
// followed by implicit-shift QR on the bidiagonal, with the orthogonal
// factors accumulated as they are built. Factors are carried transposed so
// every inner loop runs over contiguous memory.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include "hdp/common.hpp"

namespace hdp {

// Relative cutoff under which trailing singular values are treated as noise.
inline constexpr double kRankRelTol = 1e-14;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double two_norm(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline Vector matvec(const Matrix& a, const Vector& x) {
    if (x.size() != a.cols) throw std::invalid_argument("matvec: size mismatch");
    Vector y(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double* ar = a.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols; ++c) s += ar[c] * x[c];
        y[r] = s;
    }
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: size mismatch");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t c = 0; c < a.cols; ++c) t(c, r) = a(r, c);
    return t;
}

// Coefficients of y against the columns of b, i.e. b^T y.
inline Vector project_onto_columns(const Matrix& b, const Vector& y) {
    if (y.size() != b.rows) throw std::invalid_argument("project_onto_columns: size mismatch");
    Vector out(b.cols, 0.0);
    for (std::size_t r = 0; r < b.rows; ++r) {
        const double* br = b.row(r);
        const double yr = y[r];
        for (std::size_t c = 0; c < b.cols; ++c) out[c] += br[c] * yr;
    }
    return out;
}

struct SingularSystem {
    Matrix u_basis;        // columns u_j
    Matrix v_basis;        // columns v_j
    Vector sigmas;         // nonincreasing, nonnegative
    std::size_t numerical_rank = 0;
};

inline std::size_t numerical_rank_of(const Vector& sigmas) {
    if (sigmas.empty() || sigmas.front() <= 0.0) return 0;
    const double cut = sigmas.front() * kRankRelTol;
    std::size_t r = 0;
    while (r < sigmas.size() && sigmas[r] > cut) ++r;
    return r;
}

namespace detail {

// Rotate rows j and i of a row-major matrix: (row_j, row_i) <- (c*row_j + s*row_i,
// c*row_i - s*row_j). Acting on the transposed factor this is a column rotation
// of the factor itself.
inline void rotate_rows(Matrix& m, std::size_t j, std::size_t i, double c, double s) {
    double* pj = m.row(j);
    double* pi = m.row(i);
    for (std::size_t t = 0; t < m.cols; ++t) {
        const double x = pj[t];
        const double z = pi[t];
        pj[t] = x * c + z * s;
        pi[t] = z * c - x * s;
    }
}

// Householder bidiagonalization of a (n x n): a is overwritten, ut and vt
// accumulate the transposed orthogonal factors, d and e receive the diagonal
// and superdiagonal.
inline void bidiagonalize(Matrix& a, Matrix& ut, Matrix& vt, Vector& d, Vector& e) {
    const std::size_t n = a.rows;
    Vector u(n, 0.0), w(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        // Left reflector: zero a(k+1..n-1, k).
        double norm2 = 0.0;
        for (std::size_t r = k; r < n; ++r) norm2 += a(r, k) * a(r, k);
        double alpha = std::sqrt(norm2);
        if (alpha > 0.0) {
            if (a(k, k) > 0.0) alpha = -alpha;
            const std::size_t len = n - k;
            u[0] = a(k, k) - alpha;
            for (std::size_t r = 1; r < len; ++r) u[r] = a(k + r, k);
            const double beta = -1.0 / (alpha * u[0]);

            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t r = 0; r < len; ++r) {
                const double* ar = a.row(k + r);
                const double ur = u[r];
                for (std::size_t c = k + 1; c < n; ++c) w[c] += ur * ar[c];
            }
            for (std::size_t r = 0; r < len; ++r) {
                double* ar = a.row(k + r);
                const double bu = beta * u[r];
                for (std::size_t c = k + 1; c < n; ++c) ar[c] -= bu * w[c];
            }
            a(k, k) = alpha;
            for (std::size_t r = k + 1; r < n; ++r) a(r, k) = 0.0;

            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t r = 0; r < len; ++r) {
                const double* utr = ut.row(k + r);
                const double ur = u[r];
                for (std::size_t c = 0; c < n; ++c) w[c] += ur * utr[c];
            }
            for (std::size_t r = 0; r < len; ++r) {
                double* utr = ut.row(k + r);
                const double bu = beta * u[r];
                for (std::size_t c = 0; c < n; ++c) utr[c] -= bu * w[c];
            }
        }
        d[k] = a(k, k);

        // Right reflector: zero a(k, k+2..n-1).
        if (k + 2 < n) {
            norm2 = 0.0;
            const double* ak = a.row(k);
            for (std::size_t c = k + 1; c < n; ++c) norm2 += ak[c] * ak[c];
            alpha = std::sqrt(norm2);
            if (alpha > 0.0) {
                if (a(k, k + 1) > 0.0) alpha = -alpha;
                const std::size_t len = n - k - 1;
                u[0] = a(k, k + 1) - alpha;
                for (std::size_t c = 1; c < len; ++c) u[c] = a(k, k + 1 + c);
                const double beta = -1.0 / (alpha * u[0]);

                for (std::size_t r = k + 1; r < n; ++r) {
                    double* ar = a.row(r);
                    double dot = 0.0;
                    for (std::size_t c = 0; c < len; ++c) dot += ar[k + 1 + c] * u[c];
                    const double bd = beta * dot;
                    for (std::size_t c = 0; c < len; ++c) ar[k + 1 + c] -= bd * u[c];
                }
                a(k, k + 1) = alpha;
                for (std::size_t c = k + 2; c < n; ++c) a(k, c) = 0.0;

                std::fill(w.begin(), w.end(), 0.0);
                for (std::size_t r = 0; r < len; ++r) {
                    const double* vtr = vt.row(k + 1 + r);
                    const double ur = u[r];
                    for (std::size_t c = 0; c < n; ++c) w[c] += ur * vtr[c];
                }
                for (std::size_t r = 0; r < len; ++r) {
                    double* vtr = vt.row(k + 1 + r);
                    const double bu = beta * u[r];
                    for (std::size_t c = 0; c < n; ++c) vtr[c] -= bu * w[c];
                }
            }
        }
        if (k + 1 < n) e[k] = a(k, k + 1);
    }
}

// Implicit-shift QR on the bidiagonal (d, e), rotations accumulated into the
// transposed factors. Throws NumericalError if a singular value fails to
// deflate within the sweep budget.
//
// The trailing-2x2 shift is computed at the bottom corner, so it only survives
// the f = (x^2 - mu^2) / x cancellation when the bottom of the block is not
// dwarfed by the top. A bidiagonal graded large-to-small (every kernel here)
// must therefore be index-reversed first: J B^T J is again upper bidiagonal
// with d and e reversed. `flipped` runs the iteration in that reversed frame;
// each rotation maps back to the original factors with indices r -> n-1-r and
// the left/right roles exchanged, so the accumulated ut/vt stay in the
// caller's index space and only d needs un-reversing afterwards.
inline void qr_diagonalize(Vector& d, Vector& e, Matrix& ut, Matrix& vt, bool flipped) {
    const int n = static_cast<int>(d.size());
    const double eps = std::numeric_limits<double>::epsilon();
    const int max_sweeps = 75;

    const auto rot_left = [&](int p, int q, double c, double s) {
        if (flipped)
            rotate_rows(vt, static_cast<std::size_t>(n - 1 - p), static_cast<std::size_t>(n - 1 - q), c, s);
        else
            rotate_rows(ut, static_cast<std::size_t>(p), static_cast<std::size_t>(q), c, s);
    };
    const auto rot_right = [&](int p, int q, double c, double s) {
        if (flipped)
            rotate_rows(ut, static_cast<std::size_t>(n - 1 - p), static_cast<std::size_t>(n - 1 - q), c, s);
        else
            rotate_rows(vt, static_cast<std::size_t>(p), static_cast<std::size_t>(q), c, s);
    };
    const auto negate_right = [&](int p) {
        Matrix& m = flipped ? ut : vt;
        double* row = m.row(static_cast<std::size_t>(flipped ? n - 1 - p : p));
        for (int t = 0; t < n; ++t) row[t] = -row[t];
    };

    double anorm = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = std::abs(d[i]);
        if (i > 0) t += std::abs(e[i - 1]);
        anorm = std::max(anorm, t);
    }
    if (anorm == 0.0) return;

    for (int k = n - 1; k >= 0; --k) {
        for (int sweep = 1;; ++sweep) {
            bool cancel = false;
            int l = k;
            while (l > 0) {
                if (std::abs(e[l - 1]) <= eps * anorm) {
                    e[l - 1] = 0.0;
                    break;
                }
                if (std::abs(d[l - 1]) <= eps * anorm) {
                    cancel = true;
                    break;
                }
                --l;
            }
            // d[l] heads the shift denominator; a negligible value there is the
            // same splitting case one position over
            if (!cancel && l < k && std::abs(d[l]) <= eps * anorm) {
                d[l] = 0.0;
                cancel = true;
                ++l;
            }

            if (cancel) {
                // d[l-1] is negligible: chase e[l-1] out with row rotations.
                double c = 0.0, s = 1.0;
                for (int i = l; i <= k; ++i) {
                    double f = s * e[i - 1];
                    e[i - 1] = c * e[i - 1];
                    if (std::abs(f) <= eps * anorm) break;
                    const double g = d[i];
                    const double h = std::hypot(f, g);
                    d[i] = h;
                    c = g / h;
                    s = -f / h;
                    rot_left(l - 1, i, c, s);
                }
            }

            if (l == k) {
                if (d[k] < 0.0) {
                    d[k] = -d[k];
                    negate_right(k);
                }
                break;
            }
            if (sweep >= max_sweeps)
                throw NumericalError("svd: QR iteration failed to converge",
                                     std::abs(e[k - 1]));

            // Wilkinson-style shift from the trailing 2x2, then bulge chase.
            double x = d[l];
            double y = d[k - 1];
            double z = d[k];
            double g = (k >= 2) ? e[k - 2] : 0.0;
            double h = e[k - 1];
            double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = std::hypot(f, 1.0);
            f = ((x - z) * (x + z) + h * (y / (f + std::copysign(g, f)) - h)) / x;

            double c = 1.0, s = 1.0;
            for (int j = l; j < k; ++j) {
                const int i = j + 1;
                g = e[j];
                y = d[i];
                h = s * g;
                g = c * g;
                z = std::hypot(f, h);
                if (j > l) e[j - 1] = z;
                if (z != 0.0) {
                    c = f / z;
                    s = h / z;
                } else {
                    c = 1.0;
                    s = 0.0;
                }
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                rot_right(j, i, c, s);
                z = std::hypot(f, h);
                d[j] = z;
                if (z != 0.0) {
                    const double inv = 1.0 / z;
                    c = f * inv;
                    s = h * inv;
                }
                f = c * g + s * y;
                x = c * y - s * g;
                rot_left(j, i, c, s);
            }
            if (l >= 1) e[l - 1] = 0.0;
            e[k - 1] = f;
            d[k] = x;
        }
    }
}

} // namespace detail

// Full SVD of a square matrix: k = u_basis * diag(sigmas) * v_basis^T with
// sigmas sorted nonincreasing (stable under ties) and the first nonzero entry
// of every right singular vector positive.
inline SingularSystem svd(const Matrix& k) {
    if (k.rows == 0 || k.rows != k.cols)
        throw std::invalid_argument("svd: matrix must be square and nonempty");
    for (double x : k.data)
        if (!std::isfinite(x)) throw std::invalid_argument("svd: nonfinite entry");

    const std::size_t n = k.rows;
    Matrix a = k;
    Matrix ut = Matrix::identity(n);
    Matrix vt = Matrix::identity(n);
    Vector d(n, 0.0), e(n > 1 ? n - 1 : 0, 0.0);

    detail::bidiagonalize(a, ut, vt, d, e);

    // run the QR iteration from the small end of the grading (see
    // qr_diagonalize); e is scratch afterwards, only d is read back
    double head = std::abs(d.front());
    double tail = std::abs(d.back());
    if (n > 1) {
        head = std::max(head, std::abs(e.front()));
        tail = std::max(tail, std::abs(e.back()));
    }
    const bool flip = head > tail;
    if (flip) {
        std::reverse(d.begin(), d.end());
        std::reverse(e.begin(), e.end());
    }
    detail::qr_diagonalize(d, e, ut, vt, flip);
    if (flip) std::reverse(d.begin(), d.end());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&d](std::size_t x, std::size_t y) { return d[x] > d[y]; });

    SingularSystem sys;
    sys.sigmas.resize(n);
    sys.u_basis = Matrix(n, n);
    sys.v_basis = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        sys.sigmas[c] = d[src];

        double sign = 1.0;
        const double* vrow = vt.row(src);
        for (std::size_t r = 0; r < n; ++r) {
            if (vrow[r] != 0.0) {
                sign = (vrow[r] > 0.0) ? 1.0 : -1.0;
                break;
            }
        }
        const double* urow = ut.row(src);
        for (std::size_t r = 0; r < n; ++r) {
            sys.v_basis(r, c) = sign * vrow[r];
            sys.u_basis(r, c) = sign * urow[r];
        }
    }
    sys.numerical_rank = numerical_rank_of(sys.sigmas);
    return sys;
}

} // namespace hdp
