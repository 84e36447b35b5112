#pragma once

// One-dimensional profile machinery (v_star, psi_0..2, a_star, c_star), the
// Fermi-coordinate assembly of the layered approximate solutions, the glued
// global field, and its residual / projection / energy diagnostics.

#include <vector>

#include "num.hpp"
#include "parallel.hpp"
#include "toda.hpp"

namespace lawson {

double v_star(double t);
double v_star_prime(double t);

struct ProfileKit {
    double T = 0, ht = 0;
    std::vector<double> t, vp;            // grid and v_star'
    std::vector<double> psi0, psi1, psi2, g0;
    double a_star = 0, c_star = 0;
    double orth[3] = {0, 0, 0};           // |int psi_i v_star'|
    double identity1_error = 0;           // 6 int psi2 v (v')^2 = -c*/2
    double identity2_error = 0;           // 6 int (psi0 - 2e^{-sqrt2 t}) v (v')^2 = sqrt2 a* c*
    CubicSpline psi0_sp, psi1_sp, psi2_sp;

    double eval_psi0(double x) const;
    double eval_psi1(double x) const;
    double eval_psi2(double x) const;
};

// Solves the three linearized profile ODEs, fixes a_star by quadrature and
// verifies the orthogonality and proof identities; throws QuadratureError
// beyond 1e-8.
ProfileKit make_profile_kit(double T = 18.0, double ht = 5e-5);

struct FermiGridSpec {
    double s_max = 50.0;  // arc-length extent of the rectangle
    double hs = 0.05;
    double hz = 0.005;
    double z_pad = 2.5;   // extra room beyond the outermost cutoff
};

// Fermi-coordinate rectangle (s, z): z is the unscaled normal coordinate of
// the dilated surface; fiber l uses t = z - h_l(s). Fields are row-major
// [is * nz + iz].
struct LayeredField {
    DimensionPair dims{};
    Branch branch = Branch::sigma_minus;
    int k = 0;
    double epsilon = 0;
    double a_star = 0, c_star = 0;
    double hs = 0, hz = 0, z0 = 0;
    std::size_t ns = 0, nz = 0;
    std::vector<double> s;
    std::vector<double> a, b, ap, bp, kappa0, alpha, beta, tau_max;
    std::vector<std::vector<double>> h, hp, Jh;  // per layer on the s-grid
    std::vector<double> U0, U1, w;               // w = glued global field
    double overlap_margin = 0;

    double z_at(std::size_t iz) const { return z0 + hz * static_cast<double>(iz); }
    std::size_t at(std::size_t is, std::size_t iz) const { return is * nz + iz; }
};

// Builds U0, U1 and the glued w; requires the stack to solve the system with
// delta = epsilon^2 and gamma = a_star. Throws OverlapError when adjacent
// layer fibers intersect.
LayeredField fermi_assemble(const ProfileCurve& profile, const LayerStack& stack, double epsilon,
                            const ProfileKit& kit, const FermiGridSpec& spec = {},
                            Exec exec = Exec::parallel);

// S(u) = Laplace(u) + u (1 - u^2) through the exact invariant Laplacian of
// the Fermi rectangle (4th-order stencils; boundary cells are left zero).
std::vector<double> allen_cahn_operator(const LayeredField& field, const std::vector<double>& u,
                                        Exec exec = Exec::parallel);

struct ResidualReport {
    int layer = 0;
    double max_remainder = 0;       // sup over the fiber of |R|
    double weighted_sup = 0;        // sup |R| e^{rho |t|} (s^2+2)^{(2+g)/2} / eps^{2+g}
    double max_leading_cancel = 0;  // sup |toda residual part|, for reference
    double rho = 1.0, gamma_exp = 0.25;
};

// Remainder of S(U1) after subtracting the two leading terms on layer l's
// fiber (1-based layer index).
ResidualReport residual_eval(const LayeredField& field, int layer, Exec exec = Exec::parallel);

// Fiber-wise projection (-1)^{l-1} int S(U1) v_star'(t) dt, and the
// bifurcation identity value c_star (-eps^2 J h_l + a_star couplings).
std::vector<double> projection_raw(const LayeredField& field, int layer,
                                   Exec exec = Exec::parallel);
std::vector<double> projection_leading(const LayeredField& field, int layer);

struct EnergyReport {
    std::vector<double> R, E, ratio;  // ratio = E / R^N
    double fitted_exponent = 0;
};

// Energy of the glued field over centered balls, by axisymmetric quadrature
// of the invariant volume element.
EnergyReport energy(const LayeredField& field, const std::vector<double>& R_values,
                    Exec exec = Exec::parallel);

// Quadratic form int |grad v|^2 + (3 w^2 - 1) v^2 for a test function given
// on the rectangle (used by the Morse-index probes).
double linearized_quadratic_form(const LayeredField& field, const std::vector<double>& v,
                                 Exec exec = Exec::parallel);
double linearized_bilinear_form(const LayeredField& field, const std::vector<double>& v1,
                                const std::vector<double>& v2, Exec exec = Exec::parallel);

}  // namespace lawson
