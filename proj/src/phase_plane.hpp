#pragma once

// Planar dynamical system for O(m)xO(n)-invariant minimal hypersurfaces:
// equilibria, linearization, and shooting of the heteroclinic orbits that
// generate the surfaces asymptotic to the Lawson cone.

#include <vector>

#include "num.hpp"

namespace lawson {

struct DimensionPair {
    int m = 0;
    int n = 0;
    int N = 0;            // m + n - 1
    double alpha_bar = 0; // arctan(sqrt((n-1)/(m-1)))
    double gamma_plus = 0, gamma_minus = 0;
};

// Throws DomainError unless m,n >= 2 and m+n >= 8.
DimensionPair make_dims(int m, int n);

struct PhasePoint {
    double u = 0;
    double v = 0;
};

enum class EquilibriumKind { saddle, unstable_node, stable_node };

struct Equilibrium {
    int index = 0;  // 1..7
    PhasePoint location{};
    EquilibriumKind kind = EquilibriumKind::saddle;
    bool complex_pair = false;
    double lambda1 = 0, lambda2 = 0;  // eigenvalues of the Jacobian, |l1| >= |l2|
    Vec2 xi1{}, xi2{};                // unit eigenvectors
};

// X = (X1, X2) of the planar system, and its divergence.
Vec2 vector_field(const DimensionPair& dims, PhasePoint p);
double divergence(const DimensionPair& dims, PhasePoint p);

// Jacobian of X at p (row-major a,b,c,d).
void jacobian(const DimensionPair& dims, PhasePoint p, double J[4]);

// The seven singular points p1..p7 with classifications.
std::vector<Equilibrium> equilibria(const DimensionPair& dims);

// Eigen-decomposition of the Jacobian at an equilibrium; throws DomainError
// if |X(p)| exceeds 1e-10.
Equilibrium linearize(const DimensionPair& dims, PhasePoint p);

enum class Branch { sigma_plus, sigma_minus };

// Heteroclinic orbit samples. Alongside the phase point the integrator
// carries rho = log r (normalized to 0 at the first sample) and the signed
// arc length of the generating curve, both needed by the surface
// reconstruction. Sample order is orbit time: from near p6 to the target
// saddle; arc decreases along the orbit (arc length runs outward from the
// axis, anti-parallel to orbit time).
struct Orbit {
    DimensionPair dims{};
    Branch branch = Branch::sigma_minus;
    std::vector<double> t;
    std::vector<PhasePoint> point;
    std::vector<double> rho;
    std::vector<double> arc;
    Equilibrium origin{};  // p6
    Equilibrium target{};  // p2 (sigma_plus) or p4 (sigma_minus)
    int monotone_u_sign = 0;
    double endpoint_distance = 0;
    double departure_angle = 0;
    double join_mismatch = 0;        // leading off-manifold error of the seed
    // Largest adverse u-step against monotone_u_sign. Zero except in the
    // m = 2 / n = 2 borderline cases, where the true orbit re-crosses the
    // cone angle near p6 (excursion ~2.2e-5 for (2,6)); the strict
    // monotonicity claim fails there and the defect is reported instead.
    double monotonicity_defect = 0;
};

struct ShootOptions {
    double eps0 = 1e-6;      // departure offset from p6
    double atol = 1e-12;
    double rtol = 1e-12;
    double h_max = 0.02;
    double head_ratio = 2.0e2;  // extend backward until r_head/r_min >= this
    double t_max = 2000.0;
    // cap on the arc-length step (in axis-gauge units) so the downstream
    // spline resolves the curve: ds <= ds_base * max(1, s / ds_scale)
    double ds_base = 1.5e-3;
    double ds_scale = 5.0;
};

Orbit shoot_heteroclinic(const DimensionPair& dims, Branch branch, double tol = 1e-8,
                         const ShootOptions& opt = {});

}  // namespace lawson
