#pragma once

// Lambert function, the layered approximate solutions of the Jacobi-Toda
// system, the decoupling algebra, the linearized solver diagnostics, and the
// damped Newton solve of the full system
//   delta (h_j'' + alpha h_j' + beta h_j)
//       = gamma (e^{-sqrt2 (h_j - h_{j-1})} - e^{-sqrt2 (h_{j+1} - h_j)}).

#include <vector>

#include "surface.hpp"

namespace lawson {

struct TodaConfig {
    int k = 2;                    // number of layers
    double delta = 1e-6;          // epsilon^2 in the Allen-Cahn pipeline
    double gamma_coupling = 1.0;  // a_star in the Allen-Cahn pipeline
    int l = 2;                    // recursion depth of the approximate solution
    double sigma() const;         // |log delta|
};

struct LayerStack {
    enum class Provenance { approximate_l, newton_converged };
    Provenance provenance = Provenance::approximate_l;
    int k = 0;
    int level = 0;
    double delta = 0, gamma = 0;
    std::vector<double> s;
    std::vector<std::vector<double>> h;      // k layer functions on the grid
    std::vector<std::vector<double>> error;  // E_{delta,j} per layer
    double ordering_margin = 0;              // min over samples of h_{j+1} - h_j
    double telescoping_residual = 0;         // max |E - delta J w^l| on the recursion grid
    double newton_residual = 0;
    std::vector<double> residual_history;
};

// Principal-branch Lambert function on z >= 0 (Halley, tol 1e-14).
double lambert_w(double z);

// w(s) = W(gamma sqrt2 / (delta beta)) / sqrt2 and the relative residual of
// the defining identity delta beta w = gamma e^{-sqrt2 w}.
std::vector<double> base_layer(const ProfileCurve& profile, const TodaConfig& config);
double base_layer_identity_residual(const ProfileCurve& profile, const TodaConfig& config,
                                    const std::vector<double>& w);

// Discrete J_Sigma f = f'' + alpha f' + beta f with the even-symmetry axis
// row and a one-sided stencil at s_max.
std::vector<double> apply_jacobi_operator(const ProfileCurve& profile,
                                          const std::vector<double>& f);

// Solves M a = c for the k x (k-1) kernel matrix of the recursion
// (a_j = -sum_{i<=j} c_i / b_j); requires sum c = 0 and b > 0.
std::vector<double> tridiagonal_kernel_solve(const std::vector<double>& b,
                                             const std::vector<double>& c);

// E_{delta,j}(v) on the grid for a k-row stack.
std::vector<std::vector<double>> toda_error(const ProfileCurve& profile, const TodaConfig& config,
                                            const std::vector<std::vector<double>>& v);

// The recursion w^0 .. w^l; returns v^l with the error report attached.
LayerStack approx_solution(const ProfileCurve& profile, const TodaConfig& config);

struct DecouplingData {
    int k = 0;
    std::vector<double> B;        // k x k row-major
    double det_B = 0;
    std::vector<double> C;        // (k-1) x (k-1) row-major
    std::vector<double> mu0;      // eigenvalues of A0 = C diag(j(k-j)/2), ascending
    std::vector<double> s;        // samples where the per-sample data lives
    std::vector<std::vector<double>> a_coeffs;  // ta_j(s), k-1 rows
    std::vector<std::vector<double>> mu;        // eigenvalues of A(s), ascending
    std::vector<std::vector<double>> V;         // (k-1)^2 per sample, row-major
    double similarity_residual = 0;             // max |A - V M V^-1|
};

// ta_j from a stack, the matrices B, C, A = C diag(ta) = V M V^-1 per sample.
DecouplingData decoupling(const ProfileCurve& profile, const TodaConfig& config,
                          const LayerStack& stack);

// r_j(s) = mu_j / (delta gamma^-1 beta w) - mu0_j.
std::vector<std::vector<double>> eigenvalue_perturbations(const ProfileCurve& profile,
                                                          const TodaConfig& config,
                                                          const DecouplingData& dec);

struct RegimeReport {
    double t_sigma = 0, T0 = 0, T1 = 1.5;
    double c0 = 0, C0 = 0, c1 = 0, C1 = 0, c2 = 0, C2 = 0;
    bool monotone_below_T0 = false;
    std::vector<double> t, Q;
};

// Q(t) of the transformed linear operator with its three-regime bounds.
RegimeReport potential_regimes(const ProfileCurve& profile, const TodaConfig& config, int layer_j);

enum class NormKind { sup_weighted, holder_weighted };

// sup (s^2+2)^{mu/2} log(s+2)^rho |f| over unit windows; the Hoelder variant
// adds the max difference quotient with exponent 1/2 inside each window.
double weighted_norm(const std::vector<double>& s, const std::vector<double>& f, double mu,
                     double rho, NormKind kind = NormKind::sup_weighted);

struct LinearSolveReport {
    std::vector<double> q;
    double q_norm = 0, f_norm = 0;
    double bound_ratio = 0;  // ||q|| / (sigma^{3/4} log(sigma) ||f||)
    double min_pivot = 0;
};

// Solves delta-free linearized equation q'' + alpha q' + beta (1 + sqrt2
// (mu0_j + r_j) w) q = f with even symmetry at the axis and a Robin far-field
// closure matching the decaying envelope exponent.
LinearSolveReport linear_solve(const ProfileCurve& profile, const TodaConfig& config, int layer_j,
                               const std::vector<double>& f, double rho_weight = 1.0);

struct NewtonOptions {
    double tol = 1e-9;       // outer acceptance on max residual
    int max_iterations = 60;
    bool polish = true;      // keep iterating while the residual improves
};

// Damped Newton on the discretized system; the ordering h_1 < ... < h_k is
// enforced at every iterate by the line search.
LayerStack newton_solve(const ProfileCurve& profile, const TodaConfig& config,
                        const LayerStack& initial, const NewtonOptions& opt = {});

// Largest delta (geometric bisection) for which Newton converges with the
// ordering intact; used for the solve metadata.
double find_delta_star(const ProfileCurve& profile, TodaConfig config, int bisection_steps = 14);

}  // namespace lawson
