#include "allen_cahn.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace lawson {

double v_star(double t) { return std::tanh(t / kSqrt2); }

double v_star_prime(double t) {
    const double c = std::cosh(t / kSqrt2);
    return 1.0 / (kSqrt2 * c * c);
}

double ProfileKit::eval_psi0(double x) const {
    if (x <= -T) return -0.5 * (6.0 * (1.0 - v_star(x) * v_star(x)) * std::exp(-kSqrt2 * x) -
                                a_star * v_star_prime(x));
    if (x >= T) return 0.0;
    return psi0_sp(x);
}
double ProfileKit::eval_psi1(double x) const {
    if (x <= -T || x >= T) return 0.0;
    return psi1_sp(x);
}
double ProfileKit::eval_psi2(double x) const {
    if (x <= -T || x >= T) return 0.0;
    return psi2_sp(x);
}

ProfileKit make_profile_kit(double T, double ht) {
    ProfileKit kit;
    kit.T = T;
    kit.ht = ht;
    const UniformGrid tg = make_grid(-T, T, ht);
    const std::size_t n = tg.n;
    kit.t = tg.points();
    kit.vp.resize(n);
    std::vector<double> vs(n), one_m_vs2(n);
    for (std::size_t i = 0; i < n; ++i) {
        vs[i] = v_star(kit.t[i]);
        kit.vp[i] = v_star_prime(kit.t[i]);
        one_m_vs2[i] = 1.0 - vs[i] * vs[i];
    }

    // c_star and a_star by quadrature
    std::vector<double> integ(n);
    for (std::size_t i = 0; i < n; ++i) integ[i] = kit.vp[i] * kit.vp[i];
    kit.c_star = simpson(integ, ht);
    for (std::size_t i = 0; i < n; ++i)
        integ[i] = 6.0 * one_m_vs2[i] * std::exp(-kSqrt2 * kit.t[i]) * kit.vp[i];
    kit.a_star = simpson(integ, ht) / kit.c_star;

    kit.g0.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        integ[i] = kit.g0[i] = 6.0 * one_m_vs2[i] * std::exp(-kSqrt2 * kit.t[i]) -
                               kit.a_star * kit.vp[i];

    // psi solves: (d^2/dt^2 + 1 - 3 v^2) psi = rhs, Dirichlet at +-T matched
    // to the asymptotic value -rhs/2, then projected off v_star'.
    auto solve_psi = [&](const std::vector<double>& rhs) {
        std::vector<double> lo(n, 0.0), di(n, 1.0), up(n, 0.0), r(n, 0.0);
        r[0] = -0.5 * rhs[0];
        r[n - 1] = -0.5 * rhs[n - 1];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            lo[i] = 1.0 / (ht * ht);
            up[i] = 1.0 / (ht * ht);
            di[i] = -2.0 / (ht * ht) + (1.0 - 3.0 * vs[i] * vs[i]);
            r[i] = rhs[i];
        }
        std::vector<double> psi = solve_tridiagonal(lo, di, up, r);
        std::vector<double> pr(n);
        for (std::size_t i = 0; i < n; ++i) pr[i] = psi[i] * kit.vp[i];
        const double c = simpson(pr, ht) / kit.c_star;
        for (std::size_t i = 0; i < n; ++i) psi[i] -= c * kit.vp[i];
        return psi;
    };
    kit.psi0 = solve_psi(kit.g0);
    std::vector<double> rhs1(n), rhs2(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs1[i] = vs[i] * one_m_vs2[i];  // -v'' = v - v^3
        rhs2[i] = kit.t[i] * kit.vp[i];
    }
    kit.psi1 = solve_psi(rhs1);
    kit.psi2 = solve_psi(rhs2);

    // diagnostics
    auto integral = [&](auto f) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f(i);
        return simpson(v, ht);
    };
    kit.orth[0] = std::abs(integral([&](std::size_t i) { return kit.psi0[i] * kit.vp[i]; }));
    kit.orth[1] = std::abs(integral([&](std::size_t i) { return kit.psi1[i] * kit.vp[i]; }));
    kit.orth[2] = std::abs(integral([&](std::size_t i) { return kit.psi2[i] * kit.vp[i]; }));
    const double id1 =
        integral([&](std::size_t i) { return 6.0 * kit.psi2[i] * vs[i] * kit.vp[i] * kit.vp[i]; });
    const double id2 = integral([&](std::size_t i) {
        return 6.0 * (kit.psi0[i] - 2.0 * std::exp(-kSqrt2 * kit.t[i])) * vs[i] * kit.vp[i] *
               kit.vp[i];
    });
    kit.identity1_error = std::abs(id1 + 0.5 * kit.c_star);
    kit.identity2_error = std::abs(id2 - kSqrt2 * kit.a_star * kit.c_star);
    for (double o : kit.orth)
        if (!(o < 1e-10)) throw QuadratureError("make_profile_kit: orthogonality failed");
    if (!(kit.identity1_error < 1e-8) || !(kit.identity2_error < 1e-8))
        throw QuadratureError("make_profile_kit: proof identities failed: " +
                              std::to_string(kit.identity1_error) + ", " +
                              std::to_string(kit.identity2_error));

    // decimated splines for field assembly
    std::vector<double> xs, y0, y1, y2;
    for (std::size_t i = 0; i < n; i += 20) {
        xs.push_back(kit.t[i]);
        y0.push_back(kit.psi0[i]);
        y1.push_back(kit.psi1[i]);
        y2.push_back(kit.psi2[i]);
    }
    kit.psi0_sp = CubicSpline(xs, y0);
    kit.psi1_sp = CubicSpline(xs, y1);
    kit.psi2_sp = CubicSpline(xs, y2);
    return kit;
}

namespace {

// C^2 cutoff: 1 for x <= 1, 0 for x >= 2
double chi_profile(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double u = x - 1.0;
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

// background staircase: the constant U0 approaches between / outside layers
double staircase(int k, int gaps_below) {
    // value after crossing `gaps_below` layers from below (E^-)
    double v = 0.0;
    for (int j = 1; j <= k; ++j) {
        const double sgn = (j % 2 == 1) ? 1.0 : -1.0;  // (-1)^{j-1}
        v += (j <= gaps_below) ? sgn : -sgn;
    }
    v += 0.5 * ((k % 2 == 1) ? 1.0 : -1.0) - 0.5;  // ((-1)^{k-1} - 1) / 2
    return v;
}

}  // namespace

LayeredField fermi_assemble(const ProfileCurve& profile, const LayerStack& stack, double epsilon,
                            const ProfileKit& kit, const FermiGridSpec& spec, Exec exec) {
    if (stack.s.size() != profile.size())
        throw std::invalid_argument("fermi_assemble: stack grid mismatch");
    if (!(epsilon > 0)) throw std::invalid_argument("fermi_assemble: epsilon must be positive");
    const int k = stack.k;
    LayeredField F;
    F.dims = profile.dims;
    F.branch = profile.branch;
    F.k = k;
    F.epsilon = epsilon;
    F.a_star = kit.a_star;
    F.c_star = kit.c_star;
    F.hs = spec.hs;

    // s-subsample of the profile grid
    const auto stride = static_cast<std::size_t>(std::llround(spec.hs / profile.h));
    if (stride < 1 || std::abs(stride * profile.h - spec.hs) > 1e-12)
        throw std::invalid_argument("fermi_assemble: hs must be a multiple of the profile h");
    const std::size_t ns = static_cast<std::size_t>(std::llround(spec.s_max / spec.hs)) + 1;
    if ((ns - 1) * stride >= profile.size())
        throw std::invalid_argument("fermi_assemble: s_max beyond the profile grid");
    F.ns = ns;
    F.s.resize(ns);
    F.a.resize(ns);
    F.b.resize(ns);
    F.ap.resize(ns);
    F.bp.resize(ns);
    F.kappa0.resize(ns);
    F.alpha.resize(ns);
    F.beta.resize(ns);
    F.tau_max.resize(ns);
    const double log_eps = std::abs(std::log(epsilon));
    for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t gi = i * stride;
        F.s[i] = profile.s[gi];
        F.a[i] = profile.a[gi];
        F.b[i] = profile.b[gi];
        F.ap[i] = profile.ap[gi];
        F.bp[i] = profile.bp[gi];
        F.kappa0[i] = profile.kappa0[gi];
        F.alpha[i] = profile.alpha[gi];
        F.beta[i] = profile.beta[gi];
        F.tau_max[i] =
            (std::log(F.s[i] * F.s[i] + 2.0) + 2.0 * log_eps) / (4.0 * kSqrt2);
    }
    // layer rows, their derivatives and J h on the fine grid, subsampled
    F.h.assign(k, std::vector<double>(ns));
    F.hp.assign(k, std::vector<double>(ns));
    F.Jh.assign(k, std::vector<double>(ns));
    for (int j = 0; j < k; ++j) {
        const std::vector<double> d1 = fd_derivative(stack.h[j], profile.h, 1);
        const std::vector<double> Jh = apply_jacobi_operator(profile, stack.h[j]);
        for (std::size_t i = 0; i < ns; ++i) {
            F.h[j][i] = stack.h[j][i * stride];
            F.hp[j][i] = d1[i * stride];
            F.Jh[j][i] = Jh[i * stride];
        }
    }

    // fiber disjointness: adjacent neighborhoods must not intersect
    F.overlap_margin = 1e300;
    for (int j = 0; j + 1 < k; ++j)
        for (std::size_t i = 0; i < ns; ++i)
            F.overlap_margin = std::min(
                F.overlap_margin, (F.h[j + 1][i] - F.h[j][i]) - 2.0 * F.tau_max[i]);
    if (k > 1 && !(F.overlap_margin > 0.0))
        throw OverlapError("fermi_assemble: layer neighborhoods overlap (epsilon too large); "
                           "margin " +
                           std::to_string(F.overlap_margin));

    // z-extent covers every fiber plus the cutoff transition
    double z_hi = 0.0, z_lo = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        z_hi = std::max(z_hi, F.h[k - 1][i] + F.tau_max[i] + spec.z_pad);
        z_lo = std::min(z_lo, F.h[0][i] - F.tau_max[i] - spec.z_pad);
    }
    F.hz = spec.hz;
    F.z0 = z_lo;
    F.nz = static_cast<std::size_t>(std::ceil((z_hi - z_lo) / spec.hz)) + 1;

    const std::size_t total = F.ns * F.nz;
    F.U0.assign(total, 0.0);
    F.U1.assign(total, 0.0);
    F.w.assign(total, 0.0);
    const double offset = 0.5 * ((k % 2 == 1) ? 1.0 : -1.0) - 0.5;

    parallel_for(exec, F.ns, [&](std::size_t is) {
        for (std::size_t iz = 0; iz < F.nz; ++iz) {
            const double z = F.z_at(iz);
            double u0 = offset;
            for (int j = 0; j < k; ++j) {
                const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
                u0 += sgn * v_star(z - F.h[j][is]);
            }
            double eta = 0.0;
            for (int j = 0; j < k; ++j) {
                const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
                const double t = z - F.h[j][is];
                const double e_lo =
                    (j == 0) ? 0.0 : std::exp(-kSqrt2 * (F.h[j][is] - F.h[j - 1][is]));
                const double e_hi =
                    (j == k - 1) ? 0.0 : std::exp(-kSqrt2 * (F.h[j + 1][is] - F.h[j][is]));
                const double grad2 = F.hp[j][is] * F.hp[j][is];
                eta += sgn * (-e_lo * kit.eval_psi0(-t) + e_hi * kit.eval_psi0(t) +
                              epsilon * epsilon * grad2 * kit.eval_psi1(t) +
                              epsilon * epsilon * F.beta[is] * kit.eval_psi2(t));
            }
            const double u1 = u0 + eta;
            // glued field: within a fiber blend U1 with the staircase
            int gaps_below = 0;
            int near = -1;
            for (int j = 0; j < k; ++j) {
                if (z > F.h[j][is]) gaps_below = j + 1;
                if (std::abs(z - F.h[j][is]) <= F.tau_max[is]) near = j;
            }
            double wv;
            if (near < 0) {
                wv = staircase(k, gaps_below);
            } else {
                const double t = std::abs(z - F.h[near][is]);
                const double zeta = chi_profile(t - F.tau_max[is] + 2.0);
                const int side = (z > F.h[near][is]) ? near + 1 : near;
                wv = zeta * u1 + (1.0 - zeta) * staircase(k, side);
            }
            const std::size_t q = F.at(is, iz);
            F.U0[q] = u0;
            F.U1[q] = u1;
            F.w[q] = wv;
        }
    });
    return F;
}

std::vector<double> allen_cahn_operator(const LayeredField& F, const std::vector<double>& u,
                                        Exec exec) {
    if (u.size() != F.ns * F.nz)
        throw std::invalid_argument("allen_cahn_operator: field size mismatch");
    const double eps = F.epsilon, ie = 1.0 / eps;
    const double hs = F.hs, hz = F.hz;
    // s-derivatives of the curve data used in the log-volume terms
    std::vector<double> dkappa = fd_derivative(F.kappa0, hs, 1);
    std::vector<double> app(F.ns), bpp(F.ns);
    for (std::size_t i = 0; i < F.ns; ++i) {
        // a'' = -kappa0 b', b'' = kappa0 a'  (arc-length frame)
        app[i] = -F.kappa0[i] * F.bp[i];
        bpp[i] = F.kappa0[i] * F.ap[i];
    }
    std::vector<double> out(F.ns * F.nz, 0.0);
    const int m = F.dims.m, n = F.dims.n;
    parallel_for(exec, F.ns, [&](std::size_t is) {
        if (is < 2 || is + 2 >= F.ns) return;
        for (std::size_t iz = 2; iz + 2 < F.nz; ++iz) {
            const double z = F.z_at(iz);
            const double A = ie * F.a[is] - z * F.bp[is];
            const double B = ie * F.b[is] + z * F.ap[is];
            if (A <= 0.0 || B <= 0.0) continue;  // outside the coordinate patch
            const double stretch = 1.0 - eps * z * F.kappa0[is];
            const double gss = eps * eps / (stretch * stretch);
            const double As = ie * F.ap[is] - z * bpp[is];
            const double Bs = ie * F.bp[is] + z * app[is];
            const double Az = -F.bp[is];
            const double Bz = F.ap[is];
            // d log J / ds and / dz with J = stretch A^{m-1} B^{n-1}
            const double dlogJ_s = -eps * z * dkappa[is] / stretch + (m - 1) * As / A +
                                   (n - 1) * Bs / B;
            const double dlogJ_z =
                -eps * F.kappa0[is] / stretch + (m - 1) * Az / A + (n - 1) * Bz / B;
            const double dlog_gss_s = 2.0 * eps * z * dkappa[is] / stretch;
            const std::size_t q = F.at(is, iz);
            const double us = (-u[q + 2 * F.nz] + 8 * u[q + F.nz] - 8 * u[q - F.nz] +
                               u[q - 2 * F.nz]) /
                              (12 * hs);
            const double uss = (-u[q + 2 * F.nz] + 16 * u[q + F.nz] - 30 * u[q] +
                                16 * u[q - F.nz] - u[q - 2 * F.nz]) /
                               (12 * hs * hs);
            const double uz = (-u[q + 2] + 8 * u[q + 1] - 8 * u[q - 1] + u[q - 2]) / (12 * hz);
            const double uzz =
                (-u[q + 2] + 16 * u[q + 1] - 30 * u[q] + 16 * u[q - 1] - u[q - 2]) /
                (12 * hz * hz);
            const double lap = gss * uss + uzz + gss * (dlogJ_s + dlog_gss_s) * us +
                               dlogJ_z * uz;
            out[q] = lap + u[q] * (1.0 - u[q] * u[q]);
        }
    });
    return out;
}

ResidualReport residual_eval(const LayeredField& F, int layer, Exec exec) {
    if (layer < 1 || layer > F.k) throw std::invalid_argument("residual_eval: bad layer");
    const int l = layer - 1;
    const std::vector<double> S = allen_cahn_operator(F, F.U1, exec);
    ResidualReport rep;
    rep.layer = layer;
    const double sgn = (l % 2 == 0) ? 1.0 : -1.0;  // (-1)^{l-1} with 1-based l
    const double e2 = F.epsilon * F.epsilon;
    const double expo = 2.0 + rep.gamma_exp;
    std::vector<double> worst(F.ns, 0.0), worstw(F.ns, 0.0), worstc(F.ns, 0.0);
    parallel_for(exec, F.ns, [&](std::size_t is) {
        if (is < 2 || is + 2 >= F.ns) return;
        const double e_lo = (l == 0) ? 0.0 : std::exp(-kSqrt2 * (F.h[l][is] - F.h[l - 1][is]));
        const double e_hi =
            (l == F.k - 1) ? 0.0 : std::exp(-kSqrt2 * (F.h[l + 1][is] - F.h[l][is]));
        const double toda_part = -e2 * F.Jh[l][is] + F.a_star * (e_lo - e_hi);
        const double wfac = std::pow(F.s[is] * F.s[is] + 2.0, 0.5 * expo) /
                            std::pow(F.epsilon, expo);
        for (std::size_t iz = 2; iz + 2 < F.nz; ++iz) {
            const double t = F.z_at(iz) - F.h[l][is];
            if (std::abs(t) > F.tau_max[is]) continue;
            const double lead = toda_part * v_star_prime(t);
            const double R = sgn * S[F.at(is, iz)] - lead;
            worst[is] = std::max(worst[is], std::abs(R));
            worstw[is] =
                std::max(worstw[is], std::abs(R) * std::exp(rep.rho * std::abs(t)) * wfac);
            worstc[is] = std::max(worstc[is], std::abs(lead));
        }
    });
    for (std::size_t is = 0; is < F.ns; ++is) {
        rep.max_remainder = std::max(rep.max_remainder, worst[is]);
        rep.weighted_sup = std::max(rep.weighted_sup, worstw[is]);
        rep.max_leading_cancel = std::max(rep.max_leading_cancel, worstc[is]);
    }
    return rep;
}

std::vector<double> projection_raw(const LayeredField& F, int layer, Exec exec) {
    if (layer < 1 || layer > F.k) throw std::invalid_argument("projection_raw: bad layer");
    const int l = layer - 1;
    const std::vector<double> S = allen_cahn_operator(F, F.U1, exec);
    const double sgn = (l % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> P(F.ns, 0.0);
    parallel_for(exec, F.ns, [&](std::size_t is) {
        if (is < 2 || is + 2 >= F.ns) return;
        double acc = 0.0;
        for (std::size_t iz = 2; iz + 2 < F.nz; ++iz) {
            const double t = F.z_at(iz) - F.h[l][is];
            if (std::abs(t) > F.tau_max[is]) continue;
            acc += S[F.at(is, iz)] * v_star_prime(t);
        }
        P[is] = sgn * acc * F.hz;
    });
    return P;
}

std::vector<double> projection_leading(const LayeredField& F, int layer) {
    if (layer < 1 || layer > F.k) throw std::invalid_argument("projection_leading: bad layer");
    const int l = layer - 1;
    const double e2 = F.epsilon * F.epsilon;
    std::vector<double> P(F.ns, 0.0);
    for (std::size_t is = 0; is < F.ns; ++is) {
        const double e_lo = (l == 0) ? 0.0 : std::exp(-kSqrt2 * (F.h[l][is] - F.h[l - 1][is]));
        const double e_hi =
            (l == F.k - 1) ? 0.0 : std::exp(-kSqrt2 * (F.h[l + 1][is] - F.h[l][is]));
        P[is] = F.c_star * (-e2 * F.Jh[l][is] + F.a_star * (e_lo - e_hi));
    }
    return P;
}

namespace {

double sphere_area(int dim) {  // |S^{dim-1}|
    return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

}  // namespace

EnergyReport energy(const LayeredField& F, const std::vector<double>& R_values, Exec exec) {
    EnergyReport rep;
    rep.R = R_values;
    const double eps = F.epsilon, ie = 1.0 / eps;
    const double hs = F.hs, hz = F.hz;
    const int m = F.dims.m, n = F.dims.n;
    const double measure = sphere_area(m) * sphere_area(n);
    for (double R : R_values) {
        if (!(R > 2.0 / eps))
            throw std::invalid_argument("energy: R must exceed 2 / epsilon");
        if (eps * R + std::abs(F.z0) + 1.0 > F.s.back() + 1e-9)
            throw std::invalid_argument("energy: rectangle too short for R (need s_max >= eps R)");
        const double ssum = ordered_row_sum(exec, F.ns, [&](std::size_t is) {
            if (is < 2 || is + 2 >= F.ns) return 0.0;
            double acc = 0.0;
            for (std::size_t iz = 2; iz + 2 < F.nz; ++iz) {
                const double z = F.z_at(iz);
                const double A = ie * F.a[is] - z * F.bp[is];
                const double B = ie * F.b[is] + z * F.ap[is];
                if (A <= 0.0 || B <= 0.0) continue;
                if (A * A + B * B > R * R) continue;
                const std::size_t q = F.at(is, iz);
                const double us = (-F.w[q + 2 * F.nz] + 8 * F.w[q + F.nz] - 8 * F.w[q - F.nz] +
                                   F.w[q - 2 * F.nz]) /
                                  (12 * hs);
                const double uz =
                    (-F.w[q + 2] + 8 * F.w[q + 1] - 8 * F.w[q - 1] + F.w[q - 2]) / (12 * hz);
                const double stretch = 1.0 - eps * z * F.kappa0[is];
                const double grad2 = eps * eps * us * us / (stretch * stretch) + uz * uz;
                const double one_m = 1.0 - F.w[q] * F.w[q];
                const double dens = 0.5 * grad2 + 0.25 * one_m * one_m;
                const double vol = ie * stretch * std::pow(A, m - 1) * std::pow(B, n - 1);
                acc += dens * vol;
            }
            return acc;
        });
        rep.E.push_back(ssum * hs * hz * measure);
        rep.ratio.push_back(rep.E.back() / std::pow(R, F.dims.N));
    }
    if (rep.R.size() >= 2) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < rep.R.size(); ++i) {
            lx.push_back(std::log(rep.R[i]));
            ly.push_back(std::log(std::max(rep.E[i], 1e-300)));
        }
        rep.fitted_exponent = fit_line(lx, ly).slope;
    }
    return rep;
}

double linearized_quadratic_form(const LayeredField& F, const std::vector<double>& v, Exec exec) {
    return linearized_bilinear_form(F, v, v, exec);
}

double linearized_bilinear_form(const LayeredField& F, const std::vector<double>& v1,
                                const std::vector<double>& v2, Exec exec) {
    if (v1.size() != F.ns * F.nz || v2.size() != F.ns * F.nz)
        throw std::invalid_argument("linearized_bilinear_form: size mismatch");
    const double eps = F.epsilon, ie = 1.0 / eps;
    const double hs = F.hs, hz = F.hz;
    const int m = F.dims.m, n = F.dims.n;
    const double measure = sphere_area(m) * sphere_area(n);
    const double total = ordered_row_sum(exec, F.ns, [&](std::size_t is) {
        if (is < 2 || is + 2 >= F.ns) return 0.0;
        double acc = 0.0;
        for (std::size_t iz = 2; iz + 2 < F.nz; ++iz) {
            const double z = F.z_at(iz);
            const double A = ie * F.a[is] - z * F.bp[is];
            const double B = ie * F.b[is] + z * F.ap[is];
            if (A <= 0.0 || B <= 0.0) continue;
            const std::size_t q = F.at(is, iz);
            const double u1s = (-v1[q + 2 * F.nz] + 8 * v1[q + F.nz] - 8 * v1[q - F.nz] +
                                v1[q - 2 * F.nz]) /
                               (12 * hs);
            const double u2s = (-v2[q + 2 * F.nz] + 8 * v2[q + F.nz] - 8 * v2[q - F.nz] +
                                v2[q - 2 * F.nz]) /
                               (12 * hs);
            const double u1z = (-v1[q + 2] + 8 * v1[q + 1] - 8 * v1[q - 1] + v1[q - 2]) /
                               (12 * hz);
            const double u2z = (-v2[q + 2] + 8 * v2[q + 1] - 8 * v2[q - 1] + v2[q - 2]) /
                               (12 * hz);
            const double stretch = 1.0 - eps * z * F.kappa0[is];
            const double grad = eps * eps * u1s * u2s / (stretch * stretch) + u1z * u2z;
            const double pot = (3.0 * F.w[q] * F.w[q] - 1.0) * v1[q] * v2[q];
            const double vol = ie * stretch * std::pow(A, m - 1) * std::pow(B, n - 1);
            acc += (grad + pot) * vol;
        }
        return acc;
    });
    return total * hs * hz * measure;
}

}  // namespace lawson
