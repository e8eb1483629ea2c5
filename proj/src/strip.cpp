#include "hcma/strip.hpp"

#include <algorithm>
#include <cmath>

namespace hcma {

StripGeometry build_strip(double Theta, int nt, const TorusGrid& tg) {
    require(Theta > 4.0, "build_strip: Theta must exceed 4");
    StripGeometry g;
    g.curve = StadiumCurve{Theta, 0.5, 4};
    g.mesh = std::make_shared<StripMesh>(g.curve, nt);
    g.dom = std::make_shared<StripDomain>(g.mesh, tg);
    g.window = WindowGrid(-2.0, 2.0, 0.0, 1.0, 4 * nt, nt, tg);
    g.tg = tg;
    g.nt = nt;
    return g;
}

GTriple GTriple::zero(const StripGeometry& g) {
    GTriple t;
    t.u0 = RTorus(g.tg);
    t.u1 = RTorus(g.tg);
    t.v = RWindow(g.window);
    return t;
}

GTriple operator+(GTriple a, const GTriple& b) {
    a.u0 = a.u0 + b.u0;
    a.u1 = a.u1 + b.u1;
    a.v = a.v + b.v;
    return a;
}
GTriple operator-(GTriple a, const GTriple& b) {
    a.u0 = a.u0 - b.u0;
    a.u1 = a.u1 - b.u1;
    a.v = a.v - b.v;
    return a;
}
GTriple operator*(double s, GTriple a) {
    a.u0 = s * a.u0;
    a.u1 = s * a.u1;
    a.v = s * a.v;
    return a;
}
double triple_sup(const GTriple& a) {
    return std::max({sup_norm(a.u0), sup_norm(a.u1), sup_norm(a.v)});
}
double triple_norm(const GTriple& a, double q) {
    return hnorm(a.u0, q) + hnorm(a.u1, q) + hnorm(a.v, q);
}

std::vector<double> s_extend(const RWindow& phi, const StripGeometry& geom) {
    return s_extend_boundary_values(phi, *geom.mesh);
}

std::vector<double> strip_boundary_data(const StripGeometry& geom, const GTriple& f) {
    const TorusGrid& tg = geom.tg;
    const auto& bpts = geom.mesh->boundary();
    std::vector<double> M = s_extend(f.v, geom);
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double t = bpts[b].t;
        for (std::size_t tb = 0; tb < tg.size(); ++tb)
            M[b * tg.size() + tb] += (1.0 - t) * f.u0.v[tb] + t * f.u1.v[tb];
    }
    return M;
}

// ------------------------------- Riemann map --------------------------------

cplx RiemannMap::eval(cplx tau) const {
    cplx G;
    if (harness) {
        const cplx w = (tau - center) / radius;
        G = 0.0;
        for (std::size_t k = G_coef.size(); k-- > 0;) G = G * w + G_coef[k];
    } else {
        throw SolverError("RiemannMap::eval: mesh evaluation is node-based; use boundary_value");
    }
    return rot * (tau - pole) * std::exp(-G);
}

cplx RiemannMap::eval_deriv(cplx tau) const {
    require(harness, "RiemannMap::eval_deriv: harness only");
    const cplx w = (tau - center) / radius;
    cplx G = 0.0, Gp = 0.0;
    for (std::size_t k = G_coef.size(); k-- > 1;) Gp = Gp * w + static_cast<double>(k) * G_coef[k];
    Gp /= radius;
    for (std::size_t k = G_coef.size(); k-- > 0;) G = G * w + G_coef[k];
    return rot * std::exp(-G) * (1.0 - (tau - pole) * Gp);
}

cplx RiemannMap::inverse(cplx w) const {
    require(harness, "RiemannMap::inverse: harness only");
    cplx tau = pole;
    for (int n = 0; n < 80; ++n) {
        const cplx r = eval(tau) - w;
        if (std::abs(r) < 1e-14) break;
        cplx step = r / eval_deriv(tau);
        // keep iterates inside the harness disc
        while (std::abs(tau - step - center) > 0.999 * radius && std::abs(step) > 1e-16)
            step *= 0.5;
        tau -= step;
    }
    return tau;
}

cplx RiemannMap::boundary_value(std::size_t b) const {
    require(!harness && mesh, "RiemannMap::boundary_value: strip map only");
    const auto& bp = mesh->boundary()[b];
    const cplx tau(bp.t, bp.theta);
    const cplx G(G_re_bd[b], G_im_bd[b]);
    return rot * (tau - pole) * std::exp(-G);
}

RiemannMap riemann_map(const StripGeometry& geom, double tol) {
    const StripMesh& m = *geom.mesh;
    RiemannMap map;
    map.mesh = geom.mesh;
    map.pole = cplx(0.5, 0.0);
    const auto& bpts = m.boundary();
    std::vector<double> g(bpts.size());
    for (std::size_t b = 0; b < bpts.size(); ++b)
        g[b] = std::log(std::abs(cplx(bpts[b].t, bpts[b].theta) - map.pole));
    const int base = static_cast<int>(geom.dom->base_bd());
    HoloStrip G = holo_complete_strip(m, g, base, 0.0);
    map.G_re_int = G.u_int;
    map.G_im_int = G.v_int;
    map.G_re_bd = G.u_b;
    map.G_im_bd = G.v_b;
    // rotation so that T(0) = -i, exact at the base boundary point
    const cplx tau0(0.0, 0.0);
    const cplx Tp0 = (tau0 - map.pole) * std::exp(-cplx(G.u_b[base], G.v_b[base]));
    map.rot = cplx(0.0, -1.0) / Tp0;

    // Cauchy-Riemann residual of T on an interior sample lattice
    std::vector<double> Tre(m.interior_count()), Tim(m.interior_count());
    std::vector<double> Tre_b(bpts.size()), Tim_b(bpts.size());
    for (int k = 0; k < m.interior_count(); ++k) {
        const auto [j, i] = m.interior_node(k);
        const cplx tau(m.t_of(i), m.theta_of(j));
        const cplx T = map.rot * (tau - map.pole) * std::exp(-cplx(G.u_int[k], G.v_int[k]));
        Tre[k] = T.real();
        Tim[k] = T.imag();
    }
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const cplx T = map.boundary_value(b);
        Tre_b[b] = T.real();
        Tim_b[b] = T.imag();
    }
    double worst = 0.0;
    const int step = std::max(1, m.interior_count() / 512);
    for (int k = 0; k < m.interior_count(); k += step) {
        // dbar T = ((d/dt + i d/dtheta)/2)(Tre + i Tim)
        const double re_t = m.node_deriv(k, 1, Tre, Tre_b);
        const double re_th = m.node_deriv(k, 0, Tre, Tre_b);
        const double im_t = m.node_deriv(k, 1, Tim, Tim_b);
        const double im_th = m.node_deriv(k, 0, Tim, Tim_b);
        const cplx dbar = 0.5 * cplx(re_t - im_th, im_t + re_th);
        worst = std::max(worst, std::abs(dbar));
    }
    map.cr_residual = worst;
    require(worst < tol, "riemann_map: Cauchy-Riemann residual above tolerance");
    return map;
}

RiemannMap riemann_map_disc_harness(cplx center, double radius, cplx pole, int na) {
    require(std::abs(pole - center) < radius, "harness pole must be interior");
    RiemannMap map;
    map.harness = true;
    map.center = center;
    map.radius = radius;
    map.pole = pole;
    std::vector<double> u(static_cast<std::size_t>(na));
    for (int j = 0; j < na; ++j) {
        const cplx tau = center + radius * std::exp(I * (2.0 * PI * j / na));
        u[j] = std::log(std::abs(tau - pole));
    }
    map.G_coef = holo_complete_circle(u, 0, 0.0);
    // normalization: T(tau0) = -i at tau0 = the boundary point of angle -pi/2
    // relative to the harness... use the point tau = center - i radius.
    const cplx tau0 = center - I * radius;
    map.rot = 1.0;
    const cplx T0 = map.eval(tau0);
    map.rot = cplx(0.0, -1.0) / T0;
    return map;
}

// ------------------------------- strip solve --------------------------------

namespace {

RWindow window_from_nodes(const StripGeometry& geom, const std::vector<double>& node_vals,
                          const std::vector<double>& bd_vals) {
    const StripMesh& m = *geom.mesh;
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    RWindow out(geom.window);
    for (int i = 0; i <= geom.window.nt; ++i)
        for (int j = 0; j <= geom.window.nth; ++j) {
            const int mj = m.col_of(geom.window.theta(j));
            const int mi = i;
            const std::size_t dst =
                (static_cast<std::size_t>(i) * (geom.window.nth + 1) + j) * T;
            const int kint = m.interior_index(mj, mi);
            if (kint >= 0) {
                for (std::size_t tb = 0; tb < T; ++tb)
                    out.v[dst + tb] = node_vals[static_cast<std::size_t>(kint) * T + tb];
            } else {
                const int b = m.boundary_point_of_node(mj, mi);
                require(b >= 0, "window_from_nodes: node outside domain");
                for (std::size_t tb = 0; tb < T; ++tb)
                    out.v[dst + tb] = bd_vals[static_cast<std::size_t>(b) * T + tb];
            }
        }
    return out;
}

double data_positivity_min(const StripGeometry& geom, const Background& bg,
                           const std::vector<double>& M) {
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    double worst = std::numeric_limits<double>::infinity();
    const auto& bpts = geom.mesh->boundary();
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        RTorus s(tg);
        for (std::size_t tb = 0; tb < T; ++tb) s.v[tb] = M[b * T + tb];
        RTorus sxx = spectral_derivative(s, 2, 0);
        RTorus syy = spectral_derivative(s, 0, 2);
        for (std::size_t tb = 0; tb < T; ++tb)
            worst = std::min(worst,
                             bg.A.v[tb].real() + 0.25 * (sxx.v[tb] + syy.v[tb]));
    }
    return worst;
}

}  // namespace

StripSolveResult solve_strip(const StripGeometry& geom, const Background& bg, const GTriple& f,
                             const IterationConfig& cfg, const RiemannMap* map) {
    StripSolveResult out;
    std::vector<double> M = strip_boundary_data(geom, f);
    out.positivity_min = data_positivity_min(geom, bg, M);
    if (out.positivity_min <= 0.0) {
        const auto& bpts = geom.mesh->boundary();
        for (std::size_t b = 0; b < bpts.size(); ++b) {
            RTorus s(geom.tg);
            for (std::size_t tb = 0; tb < geom.tg.size(); ++tb) s.v[tb] = M[b * geom.tg.size() + tb];
            RTorus sxx = spectral_derivative(s, 2, 0);
            RTorus syy = spectral_derivative(s, 0, 2);
            for (std::size_t tb = 0; tb < geom.tg.size(); ++tb)
                if (bg.A.v[tb].real() + 0.25 * (sxx.v[tb] + syy.v[tb]) <= 0.0)
                    throw SolverError("boundary data not positive at theta=" +
                                      std::to_string(bpts[b].theta) +
                                      " t=" + std::to_string(bpts[b].t));
        }
    }
    out.state = solve_disc_family(*geom.dom, bg, M, cfg);
    out.map = build_foliation_map(*geom.dom, out.state);
    out.bundle = assemble_potential(*geom.dom, bg, out.state, out.map);
    out.Phi_window = window_from_nodes(geom, out.bundle.Phi_int, out.bundle.Phi_bd);
    out.boundary_match = out.bundle.boundary_residual;
    if (map && !map->harness) {
        // crowding diagnostic: total boundary-image arclength of the caps
        const auto& bpts = geom.mesh->boundary();
        double cap_measure = 0.0;
        for (std::size_t b = 0; b + 1 < bpts.size(); ++b) {
            if (std::abs(bpts[b].theta) <= geom.curve.Theta &&
                std::abs(bpts[b + 1].theta) <= geom.curve.Theta)
                continue;
            cap_measure += std::abs(map->boundary_value(b + 1) - map->boundary_value(b));
        }
        out.cap_harmonic_measure = cap_measure / (2.0 * PI);
    }
    return out;
}

GTriple iter_P(const StripGeometry& geom, const Background& bg, const GTriple& f,
               const IterationConfig& cfg, StripSolveResult* artifacts) {
    StripSolveResult sol = solve_strip(geom, bg, f, cfg);
    GTriple out;
    out.u0 = f.u0;
    out.u1 = f.u1;
    out.v = RWindow(geom.window);
    const WindowGrid& wg = geom.window;
    const std::size_t T = geom.tg.size();
    for (int i = 0; i <= wg.nt; ++i) {
        const double t = wg.t(i);
        for (int j = 0; j <= wg.nth; ++j)
            for (std::size_t tb = 0; tb < T; ++tb) {
                const std::size_t id = (static_cast<std::size_t>(i) * (wg.nth + 1) + j) * T + tb;
                const double phit = (1.0 - t) * f.u0.v[tb] + t * f.u1.v[tb];
                out.v.v[id] = sol.Phi_window.v[id] - phit - f.v.v[id];
            }
    }
    if (artifacts) *artifacts = std::move(sol);
    return out;
}

// ------------------------------- tangent maps -------------------------------

GTriple dP_apply(const StripGeometry& geom, const StripSolveResult& base, const GTriple& tan) {
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    // boundary data u_t + s(v)
    std::vector<double> B = s_extend(tan.v, geom);
    const auto& bpts = geom.mesh->boundary();
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double t = bpts[b].t;
        for (std::size_t tb = 0; tb < T; ++tb)
            B[b * T + tb] += (1.0 - t) * tan.u0.v[tb] + t * tan.u1.v[tb];
    }
    TangentField H = leafwise_harmonic(*geom.dom, base.map, B);
    RWindow Hw = window_from_nodes(geom, H.int_, H.bd_);
    GTriple out;
    out.u0 = tan.u0;
    out.u1 = tan.u1;
    out.v = RWindow(geom.window);
    const WindowGrid& wg = geom.window;
    for (int i = 0; i <= wg.nt; ++i) {
        const double t = wg.t(i);
        for (int j = 0; j <= wg.nth; ++j)
            for (std::size_t tb = 0; tb < T; ++tb) {
                const std::size_t id = (static_cast<std::size_t>(i) * (wg.nth + 1) + j) * T + tb;
                const double ut = (1.0 - t) * tan.u0.v[tb] + t * tan.u1.v[tb];
                out.v.v[id] = Hw.v[id] - ut - tan.v.v[id];
            }
    }
    return out;
}

namespace {
// D2B(v) = H(s(v)) restricted to the window
RWindow apply_D2B(const StripGeometry& geom, const StripSolveResult& base, const RWindow& v) {
    std::vector<double> B = s_extend(v, geom);
    TangentField H = leafwise_harmonic(*geom.dom, base.map, B);
    return window_from_nodes(geom, H.int_, H.bd_);
}
}  // namespace

GTriple dP_inverse(const StripGeometry& geom, const StripSolveResult& base, const GTriple& rhs,
                   DPInverseStats* stats, double series_tol, int max_terms) {
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    GTriple out;
    out.u0 = rhs.u0;
    out.u1 = rhs.u1;

    // D1B(u) = H(u_t)|_window - u_t
    std::vector<double> B(geom.mesh->boundary().size() * T);
    const auto& bpts = geom.mesh->boundary();
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double t = bpts[b].t;
        for (std::size_t tb = 0; tb < T; ++tb)
            B[b * T + tb] = (1.0 - t) * rhs.u0.v[tb] + t * rhs.u1.v[tb];
    }
    TangentField Hu = leafwise_harmonic(*geom.dom, base.map, B);
    RWindow D1B = window_from_nodes(geom, Hu.int_, Hu.bd_);
    const WindowGrid& wg = geom.window;
    for (int i = 0; i <= wg.nt; ++i) {
        const double t = wg.t(i);
        for (int j = 0; j <= wg.nth; ++j)
            for (std::size_t tb = 0; tb < T; ++tb) {
                const std::size_t id = (static_cast<std::size_t>(i) * (wg.nth + 1) + j) * T + tb;
                D1B.v[id] -= (1.0 - t) * rhs.u0.v[tb] + t * rhs.u1.v[tb];
            }
    }

    // v = (Id - D2B)^{-1} (D1B(u) - w) by the Neumann series
    RWindow x0 = D1B - rhs.v;
    RWindow acc = x0;
    RWindow term = x0;
    const double scale = std::max(1.0, sup_norm(x0));
    double prev = sup_norm(term);
    double factor = 0.0;
    int terms = 1;
    for (; terms <= max_terms; ++terms) {
        term = apply_D2B(geom, base, term);
        const double cur = sup_norm(term);
        if (prev > 0.0) factor = std::max(factor, cur / prev);
        prev = cur;
        acc = acc + term;
        if (cur < series_tol * scale) break;
        if (prev > 0.0 && factor >= 1.0)
            throw SolverError("Theta too small at this resolution: series factor >= 1");
    }
    require(terms <= max_terms, "dP_inverse: Neumann series did not converge in 200 terms");
    if (stats) {
        stats->c0_factor = factor;
        stats->terms = terms;
        stats->final_increment = prev;
    }
    out.v = acc;
    return out;
}

// ------------------------------ certificates --------------------------------

double theta_independence(const StripGeometry& geom, const StripSolveResult& sol) {
    const StripMesh& m = *geom.mesh;
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    // one translation period Theta-1 = 5 sampled on lattice columns around 0
    const double period = geom.curve.Theta - 1.0;
    const int np = static_cast<int>(std::lround(period / m.h()));
    const int j0 = m.col_of(-period / 2.0);
    double worst = 0.0;
    std::vector<cplx> line(static_cast<std::size_t>(np));
    for (int i = 1; i < m.nt(); ++i) {
        for (std::size_t tb = 0; tb < T; ++tb) {
            for (int p = 0; p < np; ++p) {
                const int k = m.interior_index(j0 + p, i);
                require(k >= 0, "theta_independence: sample outside interior");
                line[p] = sol.bundle.Phi_int[static_cast<std::size_t>(k) * T + tb];
            }
            fft::fwd(line);
            for (int p = 0; p < np; ++p) {
                double kf = fft::freq(p, np) * 2.0 * PI / period;
                if (np % 2 == 0 && p == np / 2) kf = 0.0;
                line[p] *= I * kf / static_cast<double>(np);
            }
            fft::inv(line);
            for (int p = 0; p < np; ++p) {
                line[p] *= static_cast<double>(np);
                const double th = m.theta_of(j0 + p);
                if (std::abs(th) <= 2.0) worst = std::max(worst, std::abs(line[p]));
            }
        }
    }
    return worst;
}

double periodicity_certificate(const StripGeometry& geom, const GTriple& f,
                               const StripSolveResult& sol) {
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    // regenerate the boundary data from the solved window deviation
    RWindow dev(geom.window);
    const WindowGrid& wg = geom.window;
    for (int i = 0; i <= wg.nt; ++i) {
        const double t = wg.t(i);
        for (int j = 0; j <= wg.nth; ++j)
            for (std::size_t tb = 0; tb < T; ++tb) {
                const std::size_t id = (static_cast<std::size_t>(i) * (wg.nth + 1) + j) * T + tb;
                dev.v[id] = sol.Phi_window.v[id] - ((1.0 - t) * f.u0.v[tb] + t * f.u1.v[tb]);
            }
    }
    std::vector<double> regen = s_extend(dev, geom);
    const auto& bpts = geom.mesh->boundary();
    double worst = 0.0;
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double t = bpts[b].t;
        for (std::size_t tb = 0; tb < T; ++tb) {
            const double phit = (1.0 - t) * f.u0.v[tb] + t * f.u1.v[tb];
            worst = std::max(worst, std::abs(sol.bundle.Phi_bd[b * T + tb] -
                                             (regen[b * T + tb] + phit)));
        }
    }
    return worst;
}

PathField extract_path(const StripGeometry& geom, const StripSolveResult& sol) {
    const StripMesh& m = *geom.mesh;
    const TorusGrid& tg = geom.tg;
    const std::size_t T = tg.size();
    PathField path(PathGrid{m.nt(), tg});
    const int jc = m.col_of(0.0);
    for (int i = 0; i <= m.nt(); ++i) {
        const int k = m.interior_index(jc, i);
        if (k >= 0) {
            for (std::size_t tb = 0; tb < T; ++tb)
                path.v[path.grid.at(i, 0, 0) + tb] =
                    sol.bundle.Phi_int[static_cast<std::size_t>(k) * T + tb];
        } else {
            const int b = m.boundary_point_of_node(jc, i);
            require(b >= 0, "extract_path: center column node missing");
            for (std::size_t tb = 0; tb < T; ++tb)
                path.v[path.grid.at(i, 0, 0) + tb] =
                    sol.bundle.Phi_bd[static_cast<std::size_t>(b) * T + tb];
        }
    }
    return path;
}

}  // namespace hcma
