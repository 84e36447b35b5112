#pragma once

// Invariant Jacobi fields of the reconstructed surfaces and the Emden-Fowler
// transform of the Jacobi operator d^2/ds^2 + alpha d/ds + beta.

#include <vector>

#include "surface.hpp"

namespace lawson {

struct JacobiField {
    enum class Kind { plus, minus };
    Kind kind = Kind::plus;
    std::size_t first_index = 0;  // offset into the profile grid (minus skips s = 0)
    std::vector<double> s, v, vp;
    double fitted_exponent = 0.0;   // tail exponent
    double head_exponent = 0.0;     // s -> 0 exponent (minus field only)
    double wronskian_drift = 0.0;   // relative drift of the transformed Wronskian
};

// a b' - a' b sampled on the grid, no positivity gate and no fit; the m = 2
// borderline curves cross their cone once, so this field can vanish.
JacobiField support_jacobi_field(const ProfileCurve& profile);

// v_plus = a b' - a' b, the support-function Jacobi field; positive on the
// whole grid with v(0) = 1 after normalization. Throws PositivityViolated.
JacobiField jacobi_plus(const ProfileCurve& profile);

// Second invariant field by reduction of order in the Emden-Fowler variable,
// normalized to leading coefficient 1 of s^{-(n-2)} at the axis (n > 2).
// Lower cutoff s0 = 10 h; the singular head is extended by the fitted power
// law. When v_plus has an interior zero (the (2,6) family), the reduction is
// done on the positivity window near the axis and continued outward by
// direct integration. Throws SingularQuadrature if the quadrature
// degenerates.
JacobiField jacobi_minus(const ProfileCurve& profile, const JacobiField& v_plus);

// Max |v'' + alpha v' + beta v| over interior samples by centered
// differences (4th order, with parity ghosts across the axis for even
// fields); `first_index` aligns fields that skip the axis, `s_min` excludes
// a neighborhood of the singular head.
double jacobi_residual(const ProfileCurve& profile, const std::vector<double>& values,
                       std::size_t first_index = 0, double s_min = 0.0);

struct EmdenFowlerData {
    double t0 = 0.0, ht = 0.0;
    std::vector<double> t, alpha_tilde, beta_tilde, p, V;
    double identity_residual = 0.0;  // max |2 p'/p + alpha_tilde|
};

EmdenFowlerData emden_fowler(const ProfileCurve& profile, double t_min = -2.3, double t_max = 0.0,
                             double ht = 1e-3);  // t_max <= 0 means log(s_max)

// Quadratic form int (phi'^2 - beta phi^2) a^{m-1} b^{n-1} ds for compactly
// supported phi on the profile grid (stability surrogate).
double stability_form(const ProfileCurve& profile, const std::vector<double>& phi);

}  // namespace lawson
