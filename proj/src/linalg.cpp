#include "orbitrace/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace orbitrace {

namespace {

double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols()) throw Error(ErrorKind::InvalidArgument, std::string(what) + ": matrix not square");
}

struct Givens {
    double c;
    Complex s;
};

Givens make_givens(Complex a, Complex b) {
    const double r = std::hypot(std::abs(a), std::abs(b));
    if (r == 0.0) return {1.0, 0.0};
    if (std::abs(a) == 0.0) return {0.0, 1.0};
    return {std::abs(a) / r, (a / std::abs(a)) * std::conj(b) / r};
}

void balance(CMatrix& a) {
    const std::size_t n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += abs1(a(j, i));
                r += abs1(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / 2.0, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c >= g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                for (std::size_t j = 0; j < n; ++j) a(i, j) /= f;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

}  // namespace

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::adjoint() const {
    CMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

CMatrix CMatrix::transpose() const {
    CMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
}

double CMatrix::frobenius_norm() const {
    double big = 0.0;
    for (Complex z : data_) big = std::max(big, std::abs(z));
    if (big == 0.0 || !std::isfinite(big)) return big;
    double s = 0.0;
    for (Complex z : data_) s += std::norm(z / big);
    return big * std::sqrt(s);
}

double CMatrix::norm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
    for (Complex& z : data_) z *= s;
    return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw Error(ErrorKind::InvalidArgument, "matrix product: shape mismatch");
    CMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(Complex s, CMatrix a) { return a *= s; }

CMatrix hessenberg(const CMatrix& input) {
    require_square(input, "hessenberg");
    CMatrix a = input;
    const std::size_t n = a.rows();
    std::vector<Complex> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(a(i, k));
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const Complex x0 = a(k + 1, k);
        const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0) : x0 / std::abs(x0);
        const Complex alpha = -phase * xnorm;
        for (std::size_t i = 0; i < n; ++i) v[i] = 0.0;
        v[k + 1] = x0 - alpha;
        for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
        double vn = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) vn += std::norm(v[i]);
        if (vn == 0.0) continue;
        const double beta = 2.0 / vn;
        // Left: rows k+1.., A -= beta v (v^H A)
        for (std::size_t j = k; j < n; ++j) {
            Complex s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * a(i, j);
            s *= beta;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= v[i] * s;
        }
        // Right: A -= beta (A v) v^H
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s *= beta;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * std::conj(v[j]);
        }
        a(k + 1, k) = alpha;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
    return a;
}

std::vector<Complex> eigenvalues(const CMatrix& input) {
    require_square(input, "eigenvalues");
    const std::size_t n = input.rows();
    std::vector<Complex> eig;
    if (n == 0) return eig;
    CMatrix b = input;
    balance(b);
    CMatrix h = hessenberg(b);
    const double scale = std::max(h.frobenius_norm(), 1e-300);
    constexpr int kMaxIterations = 100;

    long hi = static_cast<long>(n) - 1;
    int iter = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eig.push_back(h(0, 0));
            break;
        }
        long l = hi;
        for (; l > 0; --l) {
            double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (s == 0.0) s = scale;
            if (std::abs(h(l, l - 1)) <= 1e-14 * s) {
                h(l, l - 1) = 0.0;
                break;
            }
        }
        if (l == hi) {
            eig.push_back(h(hi, hi));
            --hi;
            iter = 0;
            continue;
        }
        if (++iter > kMaxIterations) {
            std::ostringstream os;
            os << "QR iteration did not deflate eigenvalue " << hi << " of " << n;
            throw Error(ErrorKind::NoConvergenceQR, os.str());
        }
        Complex sigma;
        if (iter % 11 == 0) {
            sigma = h(hi, hi) + 0.75 * abs1(h(hi, hi - 1));
        } else {
            const Complex a = h(hi - 1, hi - 1), bb = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
            const Complex m = 0.5 * (a - d);
            const Complex disc = std::sqrt(m * m + bb * c);
            const Complex l1 = 0.5 * (a + d) + disc, l2 = 0.5 * (a + d) - disc;
            sigma = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
        }
        const auto lo = static_cast<std::size_t>(l), top = static_cast<std::size_t>(hi);
        for (std::size_t k = lo; k <= top; ++k) h(k, k) -= sigma;
        std::vector<Givens> rot(top - lo);
        for (std::size_t k = lo; k < top; ++k) {
            const Givens g = make_givens(h(k, k), h(k + 1, k));
            rot[k - lo] = g;
            for (std::size_t j = k; j <= top; ++j) {
                const Complex x = h(k, j), y = h(k + 1, j);
                h(k, j) = g.c * x + g.s * y;
                h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
            }
        }
        for (std::size_t k = lo; k < top; ++k) {
            const Givens g = rot[k - lo];
            const std::size_t last = std::min(k + 1, top);
            for (std::size_t i = lo; i <= last; ++i) {
                const Complex x = h(i, k), y = h(i, k + 1);
                h(i, k) = g.c * x + std::conj(g.s) * y;
                h(i, k + 1) = -g.s * x + g.c * y;
            }
        }
        for (std::size_t k = lo; k <= top; ++k) h(k, k) += sigma;
    }
    std::sort(eig.begin(), eig.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return eig;
}

double singular_witness(const CMatrix& hess, Complex lambda) {
    require_square(hess, "singular_witness");
    const std::size_t n = hess.rows();
    if (n == 0) return 0.0;
    // LU of the shifted Hessenberg matrix with adjacent-row partial pivoting.
    CMatrix u = hess;
    for (std::size_t i = 0; i < n; ++i) u(i, i) -= lambda;
    const CMatrix shifted = u;
    const double tiny = 1e-300 + 1e-18 * std::max(1.0, hess.frobenius_norm());
    std::vector<Complex> mult(n);
    std::vector<bool> swapped(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (std::abs(u(k + 1, k)) > std::abs(u(k, k))) {
            for (std::size_t j = k; j < n; ++j) std::swap(u(k, j), u(k + 1, j));
            swapped[k] = true;
        }
        if (std::abs(u(k, k)) < tiny) u(k, k) = tiny;
        mult[k] = u(k + 1, k) / u(k, k);
        u(k + 1, k) = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) u(k + 1, j) -= mult[k] * u(k, j);
    }
    if (std::abs(u(n - 1, n - 1)) < tiny) u(n - 1, n - 1) = tiny;

    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = Complex(1.0 + 0.1 * double(i % 7), 0.3 * double(i % 3));
    double best = INFINITY;
    for (int it = 0; it < 4; ++it) {
        double nx = 0.0;
        for (Complex z : x) nx += std::norm(z);
        nx = std::sqrt(nx);
        for (Complex& z : x) z /= nx;
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = (i == 0 ? 0 : i - 1); j < n; ++j) s += shifted(i, j) * x[j];
            r += std::norm(s);
        }
        best = std::min(best, std::sqrt(r));
        std::vector<Complex> y = x;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (swapped[k]) std::swap(y[k], y[k + 1]);
            y[k + 1] -= mult[k] * y[k];
        }
        for (std::size_t i = n; i-- > 0;) {
            Complex s = y[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= u(i, j) * y[j];
            y[i] = s / u(i, i);
        }
        x = std::move(y);
    }
    return best;
}

CMatrix expm(const CMatrix& a) {
    require_square(a, "expm");
    const std::size_t n = a.rows();
    const double norm = a.norm1();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    CMatrix b = std::ldexp(1.0, -s) * a;
    constexpr int kDegree = 18;
    CMatrix t = CMatrix::identity(n);
    for (int k = kDegree; k >= 1; --k) {
        t = (1.0 / double(k)) * (b * t);
        t += CMatrix::identity(n);
    }
    for (int i = 0; i < s; ++i) t = t * t;
    return t;
}

CMatrix inverse(const CMatrix& input) {
    require_square(input, "inverse");
    const std::size_t n = input.rows();
    CMatrix a = input, inv = CMatrix::identity(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) == 0.0) throw Error(ErrorKind::InvalidArgument, "inverse: singular matrix");
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(k, j), a(piv, j));
            std::swap(inv(k, j), inv(piv, j));
        }
        const Complex d = a(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            a(k, j) /= d;
            inv(k, j) /= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const Complex f = a(i, k);
            if (f == Complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

}  // namespace orbitrace
