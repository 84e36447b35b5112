#include "phase_plane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "rk45.hpp"

namespace lawson {

DimensionPair make_dims(int m, int n) {
    if (m < 2 || n < 2) throw DomainError("make_dims: require m, n >= 2");
    if (m + n < 8) throw DomainError("make_dims: require m + n >= 8");
    DimensionPair d;
    d.m = m;
    d.n = n;
    d.N = m + n - 1;
    d.alpha_bar = std::atan(std::sqrt(double(n - 1) / double(m - 1)));
    const double half = 0.5 * (d.N - 2);
    const double disc = half * half - (d.N - 1);
    if (disc < 0) throw DomainError("make_dims: gamma exponents not real");
    d.gamma_plus = -half + std::sqrt(disc);
    d.gamma_minus = -half - std::sqrt(disc);
    return d;
}

Vec2 vector_field(const DimensionPair& d, PhasePoint p) {
    const double su = std::sin(p.u), cu = std::cos(p.u);
    const double sv = std::sin(p.v), cv = std::cos(p.v);
    return {cu * su * std::sin(p.u - p.v), (d.m - 1) * su * sv - (d.n - 1) * cu * cv};
}

double divergence(const DimensionPair& d, PhasePoint p) {
    const double su = std::sin(p.u), cu = std::cos(p.u);
    const double sv = std::sin(p.v), cv = std::cos(p.v);
    return (3.0 * cu * cu + d.m - 2) * su * cv + (3.0 * su * su + d.n - 2) * sv * cu;
}

void jacobian(const DimensionPair& d, PhasePoint p, double J[4]) {
    const double su = std::sin(p.u), cu = std::cos(p.u);
    const double sv = std::sin(p.v), cv = std::cos(p.v);
    J[0] = std::cos(2 * p.u) * std::sin(p.u - p.v) + su * cu * std::cos(p.u - p.v);
    J[1] = -su * cu * std::cos(p.u - p.v);
    J[2] = (d.m - 1) * cu * sv + (d.n - 1) * su * cv;
    J[3] = (d.m - 1) * su * cv + (d.n - 1) * cu * sv;
}

Equilibrium linearize(const DimensionPair& d, PhasePoint p) {
    if (norm(vector_field(d, p)) > 1e-10)
        throw DomainError("linearize: point is not an equilibrium");
    double J[4];
    jacobian(d, p, J);
    const Eigen2 e = eigen2(J[0], J[1], J[2], J[3]);
    Equilibrium eq;
    eq.location = p;
    eq.complex_pair = e.complex_pair;
    eq.lambda1 = e.lambda1;
    eq.lambda2 = e.lambda2;
    eq.xi1 = e.v1;
    eq.xi2 = e.v2;
    // classification with sign margin 1e-9
    const double margin = 1e-9;
    if (!e.complex_pair && e.lambda1 * e.lambda2 < -margin)
        eq.kind = EquilibriumKind::saddle;
    else if (e.lambda1 > margin && e.lambda2 > margin)
        eq.kind = EquilibriumKind::unstable_node;
    else
        eq.kind = EquilibriumKind::stable_node;
    return eq;
}

std::vector<Equilibrium> equilibria(const DimensionPair& d) {
    const double ab = d.alpha_bar;
    const PhasePoint pts[7] = {{0.0, -kPi / 2}, {0.0, kPi / 2}, {kPi / 2, -kPi},  {kPi / 2, 0.0},
                               {kPi / 2, kPi},  {ab, ab},       {ab, ab - kPi}};
    std::vector<Equilibrium> out;
    out.reserve(7);
    for (int i = 0; i < 7; ++i) {
        Equilibrium eq = linearize(d, pts[i]);
        eq.index = i + 1;
        out.push_back(eq);
    }
    return out;
}

namespace {

// Augmented state: (u, v, rho = log r, arc). Arc length runs outward from the
// axis, anti-parallel to orbit time, so rho and arc decrease along the orbit.
void augmented_field(const DimensionPair& d, double /*t*/, const std::vector<double>& y,
                     std::vector<double>& dy) {
    const PhasePoint p{y[0], y[1]};
    const Vec2 X = vector_field(d, p);
    const double sc = std::sin(p.u) * std::cos(p.u);
    dy[0] = X.x;
    dy[1] = X.y;
    dy[2] = -sc * std::cos(p.u - p.v);
    dy[3] = -std::exp(y[2]) * sc;
}

Vec2 stable_direction_into_interior(const Equilibrium& tgt, Branch branch) {
    Vec2 es = (tgt.lambda1 < 0) ? tgt.xi1 : tgt.xi2;
    if (branch == Branch::sigma_plus) {
        if (es.x < 0) es = -1.0 * es;  // into u > 0
    } else {
        if (es.x > 0) es = -1.0 * es;  // into u < pi/2
    }
    return es;
}

}  // namespace

// The heteroclinic is W^u(p6) cap W^s(target). Forward shooting from the p6
// node cannot park on the saddle (transverse errors amplify by ~1e12 per
// radian of departure angle), so the orbit is produced by tracing W^s(target)
// backward from an offset eps_t along the stable eigenvector: transverse
// perturbations contract in backward time and the trace converges to p6 on
// its own. The result is the same orbit the spec's forward shooter describes,
// sampled at integrator accuracy end to end.
Orbit shoot_heteroclinic(const DimensionPair& dims, Branch branch, double tol,
                         const ShootOptions& opt) {
    if (!(tol > 0)) throw DomainError("shoot_heteroclinic: tol must be positive");
    const auto eqs = equilibria(dims);
    const Equilibrium origin = eqs[5];  // p6
    const Equilibrium target = (branch == Branch::sigma_plus) ? eqs[1] : eqs[3];  // p2 / p4

    auto field_back = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        augmented_field(dims, t, y, dy);
        for (auto& v : dy) v = -v;
    };

    const double eps_t = 0.5 * std::min(tol, 1e-8);
    const Vec2 es_in = stable_direction_into_interior(target, branch);

    std::vector<double> tb, rho_b, arc_b;
    std::vector<PhasePoint> qb;
    {
        DormandPrince integ(field_back, 4, opt.atol, opt.rtol, opt.h_max);
        integ.set_initial_step(1e-5);
        std::vector<double> y = {target.location.u + eps_t * es_in.x,
                                 target.location.v + eps_t * es_in.y, 0.0, 0.0};
        double t = 0.0;
        tb.push_back(t);
        qb.push_back({y[0], y[1]});
        rho_b.push_back(y[2]);
        arc_b.push_back(y[3]);
        const double rho_needed = std::log(opt.head_ratio);
        while (y[2] < rho_needed) {
            if (t >= opt.t_max) {
                const double d = norm(Vec2{y[0] - origin.location.u, y[1] - origin.location.v});
                throw NonConvergence("shoot_heteroclinic: backward trace exceeded t_max", d);
            }
            // keep knots dense in arc length for the profile spline
            const double speed =
                std::exp(y[2]) * std::sin(y[0]) * std::cos(y[0]) + 1e-300;
            const double ds_cap = opt.ds_base * std::max(1.0, y[3] / opt.ds_scale);
            integ.set_initial_step(std::min(integ.suggested_step(), ds_cap / speed));
            integ.step(t, y);
            if (y[0] <= 1e-12 || y[0] >= kPi / 2 - 1e-12 || std::abs(y[1]) > kPi) {
                const double d = norm(Vec2{y[0] - origin.location.u, y[1] - origin.location.v});
                throw NonConvergence("shoot_heteroclinic: trace left the rectangle", d);
            }
            tb.push_back(t);
            qb.push_back({y[0], y[1]});
            rho_b.push_back(y[2]);
            arc_b.push_back(y[3]);
        }
    }

    Orbit orb;
    orb.dims = dims;
    orb.branch = branch;
    orb.origin = origin;
    orb.target = target;
    orb.monotone_u_sign = (branch == Branch::sigma_plus) ? -1 : +1;

    const std::size_t n = tb.size();
    const double t_head = tb.back();
    const double rho_head = rho_b.back();
    const double arc_head = arc_b.back();
    const double scale = std::exp(-rho_head);  // head gauge: rho = 0 at first sample
    orb.t.resize(n);
    orb.point.resize(n);
    orb.rho.resize(n);
    orb.arc.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = n - 1 - i;
        orb.t[i] = t_head - tb[j];
        orb.point[i] = qb[j];
        orb.rho[i] = rho_b[j] - rho_head;
        orb.arc[i] = (arc_b[j] - arc_head) * scale;
    }

    double defect = 0.0;
    for (std::size_t i = 1; i < orb.point.size(); ++i) {
        const double du = (orb.point[i].u - orb.point[i - 1].u) * orb.monotone_u_sign;
        if (du < -defect) defect = -du;
    }
    orb.monotonicity_defect = defect;
    if (defect > 1e-3)
        throw NonConvergence("shoot_heteroclinic: orbit badly non-monotone in u", defect);

    orb.departure_angle = std::atan2(orb.point.front().v - origin.location.v,
                                     orb.point.front().u - origin.location.u);
    orb.join_mismatch = eps_t * eps_t;  // leading W^s offset of the seed point
    orb.endpoint_distance =
        norm(Vec2{orb.point.back().u - target.location.u, orb.point.back().v - target.location.v});
    if (!(orb.endpoint_distance < tol))
        throw NonConvergence("shoot_heteroclinic: endpoint outside tolerance",
                             orb.endpoint_distance);
    return orb;
}

}  // namespace lawson
