#pragma once

// Reconstruction of the generating curve (a(s), b(s)) from a heteroclinic
// orbit, its geometric data (alpha, beta = |A|^2), and asymptotic fits.

#include <vector>

#include "phase_plane.hpp"

namespace lawson {

struct ProfileCurve {
    DimensionPair dims{};
    Branch branch = Branch::sigma_minus;
    double h = 0.0;  // uniform arc-length spacing, s[i] = i*h
    std::vector<double> s, a, b, ap, bp, app, bpp;
    std::vector<double> alpha;      // (m-1) a'/a + (n-1) b'/b;  +inf at s=0
    std::vector<double> beta;       // |A|^2
    std::vector<double> kappa0;     // profile curvature a'b'' - a''b'
    std::vector<double> ap_over_b;  // a'/b with the axis limit filled in
    std::vector<double> bp_over_a;  // b'/a with the axis limit filled in
    int axis_weight = 0;            // alpha ~ axis_weight / s at the axis
    double scale_applied = 0.0;     // dilation used for dist(curve, 0) = 1

    std::size_t size() const { return s.size(); }
};

struct ProfileGridSpec {
    double h = 1e-2;
    double s_max = 100.0;
};

// Inverts the (u, v) change of variables along the orbit, reparametrizes by
// arc length on a uniform grid and rescales so the minimum distance to the
// origin is 1. Throws ReconstructionError if the orbit does not span the
// requested grid or the minimality residual rejects the time-rescaling.
ProfileCurve reconstruct_profile(const Orbit& orbit, const ProfileGridSpec& spec = {});

// Max |a'b'' - a''b' + (n-1)b'/a - (m-1)a'/b| over interior samples by
// centered differences of the stored (a, b); independent of the stored
// derivative arrays.
double minimality_residual(const ProfileCurve& profile);

// Recomputes (alpha, beta) from the stored samples (also done during
// reconstruction); exposed for synthetic profiles in tests.
void geometric_data(ProfileCurve& profile);

struct AsymptoticFit {
    double gamma_fit = 0.0;
    double c_fit = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double rms = 0.0;
    double matched_exponent = 0.0;
};

// Least-squares power-law fit of |values| over the last decade of the grid;
// throws FitAmbiguous unless the slope lands within 5% of one of the
// expected exponents.
AsymptoticFit asymptotic_fit(const std::vector<double>& s, const std::vector<double>& values,
                             const std::vector<double>& expected_exponents);

// Signed normal distance of the curve to its asymptotic cone ray.
std::vector<double> cone_deviation(const ProfileCurve& profile);

// Synthetic exact-cone profile (the singular solution) on the same grid
// layout; used as an oracle anchor in tests and diagnostics.
ProfileCurve exact_cone_profile(const DimensionPair& dims, double h, double s_min, double s_max);

// Shoots the heteroclinic and reconstructs in one step.
ProfileCurve build_profile(const DimensionPair& dims, Branch branch,
                           const ProfileGridSpec& spec = {}, double shoot_tol = 1e-8);

}  // namespace lawson
