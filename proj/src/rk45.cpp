#include "rk45.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lawson {

namespace {
// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
}  // namespace

DormandPrince::DormandPrince(Field f, std::size_t dim, double atol, double rtol, double h_max)
    : f_(std::move(f)), dim_(dim), atol_(atol), rtol_(rtol), h_max_(h_max), h_next_(h_max) {
    k_.assign(7, std::vector<double>(dim_, 0.0));
    ytmp_.assign(dim_, 0.0);
    y5_.assign(dim_, 0.0);
    y4_.assign(dim_, 0.0);
}

double DormandPrince::trial(double t, const std::vector<double>& y, double h) const {
    const double sgn = (h >= 0) ? 1.0 : -1.0;
    (void)sgn;
    f_(t, y, k_[0]);
    auto stage = [&](double c, std::initializer_list<std::pair<int, double>> terms, int out) {
        for (std::size_t i = 0; i < dim_; ++i) {
            double acc = y[i];
            for (auto [ki, aij] : terms) acc += h * aij * k_[ki][i];
            ytmp_[i] = acc;
        }
        f_(t + c * h, ytmp_, k_[out]);
    };
    stage(c2, {{0, a21}}, 1);
    stage(c3, {{0, a31}, {1, a32}}, 2);
    stage(c4, {{0, a41}, {1, a42}, {2, a43}}, 3);
    stage(c5, {{0, a51}, {1, a52}, {2, a53}, {3, a54}}, 4);
    stage(1.0, {{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}}, 5);
    for (std::size_t i = 0; i < dim_; ++i)
        y5_[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] +
                             b6 * k_[5][i]);
    f_(t + h, y5_, k_[6]);
    for (std::size_t i = 0; i < dim_; ++i)
        y4_[i] = y[i] + h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                             e6 * k_[5][i] + e7 * k_[6][i]);
    double err = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(y5_[i]));
        const double r = (y5_[i] - y4_[i]) / sc;
        err += r * r;
    }
    return std::sqrt(err / static_cast<double>(dim_));
}

double DormandPrince::step(double& t, std::vector<double>& y) {
    double h = h_next_;
    for (int attempt = 0; attempt < 60; ++attempt) {
        const double err = trial(t, y, h);
        if (err <= 1.0 || std::abs(h) <= 1e-14) {
            t += h;
            y = y5_;
            const double grow =
                (err > 0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            h_next_ = h * std::clamp(grow, 0.2, 5.0);
            if (std::abs(h_next_) > h_max_) h_next_ = (h_next_ > 0 ? h_max_ : -h_max_);
            return h;
        }
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5);
    }
    throw std::runtime_error("DormandPrince: step size underflow");
}

void DormandPrince::fixed_step(double& t, std::vector<double>& y, double h) const {
    trial(t, y, h);
    t += h;
    y = y5_;
}

}  // namespace lawson
