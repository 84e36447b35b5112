#pragma once

// Small shared numerics: grids, quadrature, splines, finite differences,
// least-squares fits, banded LU, symmetric eigensolver, FNV hashing.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lawson {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
double norm(Vec2 a);

// Uniform grid x_i = x0 + i*h, i = 0..n-1.
struct UniformGrid {
    double x0 = 0.0;
    double h = 0.0;
    std::size_t n = 0;

    double operator[](std::size_t i) const { return x0 + h * static_cast<double>(i); }
    double back() const { return (*this)[n - 1]; }
    std::vector<double> points() const;
};

UniformGrid make_grid(double x0, double x1, double h);

// Composite Simpson on a uniform grid (trapezoid fallback on the last
// interval when the sample count is even).
double simpson(const std::vector<double>& f, double h);

// Trapezoid on non-uniform samples.
double trapezoid(const std::vector<double>& x, const std::vector<double>& f);

// Cumulative trapezoid, F[0] = 0.
std::vector<double> cumtrapz(const std::vector<double>& x, const std::vector<double>& f);

// Cubic spline through (x, y), x strictly increasing. Natural ends by
// default; not-a-knot avoids the artificial zero-curvature end condition.
enum class SplineEnd { natural, not_a_knot };

class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y,
                SplineEnd end = SplineEnd::natural);

    double operator()(double xq) const;
    double derivative(double xq) const;
    double second_derivative(double xq) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

  private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
    std::size_t find_interval(double xq) const;
};

// Centered finite differences on a uniform grid; one-sided 2nd order at the
// ends. order = 1 or 2.
std::vector<double> fd_derivative(const std::vector<double>& f, double h, int order);

// 4th-order first/second derivative at interior index i (needs i in [2, n-3]).
double fd1_o4(const std::vector<double>& f, std::size_t i, double h);
double fd2_o4(const std::vector<double>& f, std::size_t i, double h);

// Least squares line y = a + b x; returns {a, b, rms residual}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Solve tridiagonal system (Thomas). Diagonals: lower[i] x_{i-1} + diag[i] x_i
// + upper[i] x_{i+1} = rhs[i].
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs);

// General banded matrix with kl sub- and ku super-diagonals, LU with partial
// pivoting (LAPACK-style band storage with kl extra rows for fill-in).
class BandedMatrix {
  public:
    BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

    double& at(std::size_t i, std::size_t j);
    void add(std::size_t i, std::size_t j, double v) { at(i, j) += v; }

    // Factor in place and solve; throws std::runtime_error on a zero pivot.
    std::vector<double> solve(std::vector<double> rhs);
    double min_abs_pivot() const { return min_pivot_; }

  private:
    std::size_t n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
    double min_pivot_ = 0.0;
    void factor();
};

// Eigen-decomposition of a real symmetric matrix (cyclic Jacobi). a is n*n
// row-major and is destroyed; returns eigenvalues ascending, eigenvectors in
// columns of v.
void symmetric_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& eigenvalues,
                     std::vector<double>& v);

// Dense LU solve for small systems (used for k x k blocks).
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs, std::size_t n);

// 2x2 real eigenproblem for [[a,b],[c,d]].
struct Eigen2 {
    bool complex_pair = false;
    double lambda1 = 0.0, lambda2 = 0.0;  // real parts if complex
    double imag = 0.0;
    Vec2 v1{}, v2{};
};
Eigen2 eigen2(double a, double b, double c, double d);

// FNV-1a 64-bit hash of a string, hex-encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace lawson
