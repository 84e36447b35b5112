#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta with standard PI-free step control.

#include <functional>
#include <vector>

namespace lawson {

class DormandPrince {
  public:
    using Field = std::function<void(double t, const std::vector<double>& y,
                                     std::vector<double>& dydt)>;

    DormandPrince(Field f, std::size_t dim, double atol, double rtol, double h_max);

    // One adaptive step; updates (t, y), returns the accepted step size.
    double step(double& t, std::vector<double>& y);

    // One step of exactly size h, no error control (used for event bisection).
    void fixed_step(double& t, std::vector<double>& y, double h) const;

    void set_initial_step(double h) { h_next_ = h; }
    double suggested_step() const { return h_next_; }

  private:
    Field f_;
    std::size_t dim_;
    double atol_, rtol_, h_max_;
    double h_next_;
    mutable std::vector<std::vector<double>> k_;
    mutable std::vector<double> ytmp_, y5_, y4_;

    // returns the scaled error norm of a trial step
    double trial(double t, const std::vector<double>& y, double h) const;
};

}  // namespace lawson
