#include "num.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lawson {

double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

std::vector<double> UniformGrid::points() const {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = (*this)[i];
    return p;
}

UniformGrid make_grid(double x0, double x1, double h) {
    if (!(x1 > x0) || !(h > 0.0)) throw std::invalid_argument("make_grid: bad range");
    auto n = static_cast<std::size_t>(std::llround((x1 - x0) / h)) + 1;
    return UniformGrid{x0, h, n};
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    double s = 0.0;
    std::size_t m = n;
    bool tail = false;
    if (n % 2 == 0) {  // even sample count: Simpson on first n-1, trapezoid on last
        m = n - 1;
        tail = true;
    }
    if (m >= 3) {
        double odd = 0.0, even = 0.0;
        for (std::size_t i = 1; i + 1 < m; i += 2) odd += f[i];
        for (std::size_t i = 2; i + 1 < m; i += 2) even += f[i];
        s = h / 3.0 * (f[0] + f[m - 1] + 4.0 * odd + 2.0 * even);
    }
    if (tail) s += 0.5 * h * (f[n - 2] + f[n - 1]);
    return s;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
    return s;
}

std::vector<double> cumtrapz(const std::vector<double>& x, const std::vector<double>& f) {
    std::vector<double> F(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        F[i] = F[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return F;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, SplineEnd end)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 4 && end == SplineEnd::not_a_knot)
        throw std::invalid_argument("CubicSpline: not-a-knot needs >= 4 points");
    if (n < 3 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 3 points");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(x_[i + 1] > x_[i])) throw std::invalid_argument("CubicSpline: x not increasing");
    std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
        lo[i] = hl / 6.0;
        di[i] = (hl + hr) / 3.0;
        up[i] = hr / 6.0;
        rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    if (end == SplineEnd::natural) {
        m_ = solve_tridiagonal(lo, di, up, rhs);
        return;
    }
    // not-a-knot: third derivative continuous across x1 and x_{n-2};
    // eliminate m0 and m_{n-1}, solve the reduced tridiagonal system.
    const double h0 = x_[1] - x_[0], h1 = x_[2] - x_[1];
    const double hn2 = x_[n - 2] - x_[n - 3], hn1 = x_[n - 1] - x_[n - 2];
    // m0 = ((h0 + h1) m1 - h0 m2) / h1,  m_{n-1} = ((hn1 + hn2) m_{n-2} - hn1 m_{n-3}) / hn2
    std::vector<double> lo2(n - 2, 0.0), di2(n - 2, 0.0), up2(n - 2, 0.0), r2(n - 2, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const std::size_t r = i - 1;
        lo2[r] = lo[i];
        di2[r] = di[i];
        up2[r] = up[i];
        r2[r] = rhs[i];
    }
    di2[0] += lo2[0] * (h0 + h1) / h1;
    up2[0] -= lo2[0] * h0 / h1;
    lo2[0] = 0.0;
    di2[n - 3] += up2[n - 3] * (hn1 + hn2) / hn2;
    lo2[n - 3] -= up2[n - 3] * hn1 / hn2;
    up2[n - 3] = 0.0;
    const std::vector<double> mi = solve_tridiagonal(lo2, di2, up2, r2);
    m_.assign(n, 0.0);
    for (std::size_t i = 0; i + 2 < n; ++i) m_[i + 1] = mi[i];
    m_[0] = ((h0 + h1) * m_[1] - h0 * m_[2]) / h1;
    m_[n - 1] = ((hn1 + hn2) * m_[n - 2] - hn1 * m_[n - 3]) / hn2;
}

std::size_t CubicSpline::find_interval(double xq) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return i;
}

double CubicSpline::operator()(double xq) const {
    const std::size_t i = find_interval(xq);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - xq) / h, B = 1.0 - A;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double xq) const {
    const std::size_t i = find_interval(xq);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - xq) / h, B = 1.0 - A;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * m_[i + 1] - (3.0 * A * A - 1.0) * m_[i]) * h / 6.0;
}

double CubicSpline::second_derivative(double xq) const {
    const std::size_t i = find_interval(xq);
    const double h = x_[i + 1] - x_[i];
    const double A = (x_[i + 1] - xq) / h, B = 1.0 - A;
    return A * m_[i] + B * m_[i + 1];
}

std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    if (order == 1) {
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    } else if (order == 2) {
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        if (n >= 4) {
            d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
            d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
        } else {
            d[0] = d[1];
            d[n - 1] = d[n - 2];
        }
    } else {
        throw std::invalid_argument("fd_derivative: order must be 1 or 2");
    }
    return d;
}

double fd1_o4(const std::vector<double>& f, std::size_t i, double h) {
    return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
}

double fd2_o4(const std::vector<double>& f, std::size_t i, double h) {
    return (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) /
           (12.0 * h * h);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * sxx - sx * sx;
    LineFit fit;
    fit.slope = (dn * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / dn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / dn);
    return fit;
}

std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0), ipiv_(n, 0) {}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
    // storage: ab[kl + ku + i - j, j]
    const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(kl_ + ku_) +
                             static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j);
    if (r < static_cast<std::ptrdiff_t>(kl_) || r >= static_cast<std::ptrdiff_t>(ldab_))
        throw std::out_of_range("BandedMatrix::at outside band");
    return ab_[static_cast<std::size_t>(r) + ldab_ * j];
}

void BandedMatrix::factor() {
    // dgbtrf-style banded LU with partial pivoting
    min_pivot_ = std::numeric_limits<double>::infinity();
    const std::size_t kv = kl_ + ku_;
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i_max = std::min(n_ - 1, j + kl_);
        // pivot search in column j, rows j..i_max
        std::size_t piv = j;
        double pmax = std::abs(ab_[kv + ldab_ * j]);
        for (std::size_t i = j + 1; i <= i_max; ++i) {
            const double v = std::abs(ab_[kv + (i - j) + ldab_ * j]);
            if (v > pmax) {
                pmax = v;
                piv = i;
            }
        }
        ipiv_[j] = static_cast<int>(piv);
        if (pmax == 0.0) throw std::runtime_error("BandedMatrix: singular (zero pivot)");
        min_pivot_ = std::min(min_pivot_, pmax);
        const std::size_t j_max = std::min(n_ - 1, j + kv);
        if (piv != j) {
            for (std::size_t c = j; c <= j_max; ++c) {
                const std::size_t rj = kv + j - c, rp = kv + piv - c;
                if (rp >= ldab_) continue;
                std::swap(ab_[rj + ldab_ * c], ab_[rp + ldab_ * c]);
            }
        }
        const double pivot = ab_[kv + ldab_ * j];
        for (std::size_t i = j + 1; i <= i_max; ++i) {
            double& lij = ab_[kv + (i - j) + ldab_ * j];
            lij /= pivot;
            for (std::size_t c = j + 1; c <= j_max; ++c)
                ab_[kv + i - c + ldab_ * c] -= lij * ab_[kv + j - c + ldab_ * c];
        }
    }
    factored_ = true;
}

std::vector<double> BandedMatrix::solve(std::vector<double> rhs) {
    if (rhs.size() != n_) throw std::invalid_argument("BandedMatrix::solve size mismatch");
    if (!factored_) factor();
    const std::size_t kv = kl_ + ku_;
    for (std::size_t j = 0; j < n_; ++j) {
        const auto piv = static_cast<std::size_t>(ipiv_[j]);
        if (piv != j) std::swap(rhs[j], rhs[piv]);
        const std::size_t i_max = std::min(n_ - 1, j + kl_);
        for (std::size_t i = j + 1; i <= i_max; ++i)
            rhs[i] -= ab_[kv + (i - j) + ldab_ * j] * rhs[j];
    }
    for (std::size_t j = n_; j-- > 0;) {
        rhs[j] /= ab_[kv + ldab_ * j];
        const std::size_t i_min = (j > kv) ? j - kv : 0;
        for (std::size_t i = i_min; i < j; ++i) rhs[i] -= ab_[kv + i - j + ldab_ * j] * rhs[j];
    }
    return rhs;
}

void symmetric_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigenvalues,
                     std::vector<double>& v) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = ((theta >= 0) ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i * n + p], viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = A(i, i);
    // sort ascending, permute eigenvector columns accordingly
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return eigenvalues[i] < eigenvalues[j]; });
    std::vector<double> ev(n), vv(n * n);
    for (std::size_t c = 0; c < n; ++c) {
        ev[c] = eigenvalues[idx[c]];
        for (std::size_t r = 0; r < n; ++r) vv[r * n + c] = v[r * n + idx[c]];
    }
    eigenvalues = std::move(ev);
    v = std::move(vv);
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t piv = j;
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::abs(a[i * n + j]) > std::abs(a[piv * n + j])) piv = i;
        if (a[piv * n + j] == 0.0) throw std::runtime_error("solve_dense: singular");
        if (piv != j) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[j * n + c], a[piv * n + c]);
            std::swap(rhs[j], rhs[piv]);
        }
        for (std::size_t i = j + 1; i < n; ++i) {
            const double w = a[i * n + j] / a[j * n + j];
            for (std::size_t c = j; c < n; ++c) a[i * n + c] -= w * a[j * n + c];
            rhs[i] -= w * rhs[j];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
        x[i] = s / a[i * n + i];
    }
    return x;
}

Eigen2 eigen2(double a, double b, double c, double d) {
    Eigen2 e;
    const double tr = a + d, det = a * d - b * c;
    const double disc = tr * tr / 4.0 - det;
    if (disc < 0.0) {
        e.complex_pair = true;
        e.lambda1 = e.lambda2 = tr / 2.0;
        e.imag = std::sqrt(-disc);
        return e;
    }
    const double r = std::sqrt(disc);
    e.lambda1 = tr / 2.0 + r;
    e.lambda2 = tr / 2.0 - r;
    auto eigvec = [&](double lam) -> Vec2 {
        // rows of (A - lam I) are (a-lam, b) and (c, d-lam); null vector from
        // the larger row
        Vec2 v1{-b, a - lam}, v2{lam - d, c};
        Vec2 v = (norm(v1) >= norm(v2)) ? v1 : v2;
        const double nv = norm(v);
        if (nv == 0.0) return {1.0, 0.0};
        v = (1.0 / nv) * v;
        if (v.x < 0 || (v.x == 0 && v.y < 0)) v = -1.0 * v;
        return v;
    };
    e.v1 = eigvec(e.lambda1);
    e.v2 = eigvec(e.lambda2);
    return e;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace lawson
