#include "hcma/potential.hpp"

#include <algorithm>
#include <cmath>

namespace hcma {

namespace {

// invert grad p = (2 Re W, -2 Im W) on the torus; returns p with p(0,0) = 0
RTorus grad_invert(const CTorus& W, double* mean_defect) {
    const TorusGrid& g = W.grid;
    std::vector<cplx> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        a[i] = 2.0 * W.v[i].real();
        b[i] = -2.0 * W.v[i].imag();
    }
    fft::fwd2(a, g.nx, g.ny);
    fft::fwd2(b, g.nx, g.ny);
    const double scale = 2.0 * PI / g.period;
    if (mean_defect) {
        const double s = 1.0 / static_cast<double>(g.size());
        *mean_defect = std::max(std::abs(a[0]) * s, std::abs(b[0]) * s);
    }
    std::vector<cplx> p(g.size(), 0.0);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            if (ix == 0 && iy == 0) continue;
            const double kx = fft::freq(ix, g.nx) * scale;
            const double ky = fft::freq(iy, g.ny) * scale;
            const std::size_t id = g.at(ix, iy);
            p[id] = -I * (kx * a[id] + ky * b[id]) / (kx * kx + ky * ky);
        }
    fft::inv2(p, g.nx, g.ny);
    RTorus out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.v[i] = p[i].real();
    const double p0 = out.v[0];
    for (auto& x : out.v) x -= p0;
    return out;
}

// one slice of recover_P given (f-slice for the inverse already in `invdisp`,
// h-slice) at a fixed tau
RTorus recover_p_slice(const TorusGrid& tg, const Background& bg, const CTorus& invdisp,
                       const CTorus& hslice, double* defect) {
    TorusInterp hi(hslice, 5);
    CTorus W(tg);
    for (int iy = 0; iy < tg.ny; ++iy)
        for (int ix = 0; ix < tg.nx; ++ix) {
            const std::size_t tb = tg.at(ix, iy);
            const cplx zd = invdisp.v[tb];
            const double zx = tg.x(ix) + zd.real(), zy = tg.y(iy) + zd.imag();
            cplx psi_term = 0.0;
            if (!bg.flat) psi_term = bg.dpsi0_interp(zx, zy) - bg.dpsi0.v[tb];
            W.v[tb] = 0.5 * std::conj(zd) + psi_term + hi(zx, zy);
        }
    return grad_invert(W, defect);
}

}  // namespace

void recover_P(const LeafDomain& dom, const Background& bg, const DiscFamilyState& state,
               const FoliationMap& map, PotentialBundle& out, double exactness_tol) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    out.dom = &dom;
    out.P_int.resize(dom.nnodes() * T);
    out.P_bd.resize(dom.nbd() * T);
    std::vector<double> defects(dom.nnodes() + dom.nbd(), 0.0);

    auto do_slice = [&](const std::vector<cplx>& inv, const std::vector<cplx>& h,
                        std::vector<double>& dst, std::size_t slice, std::size_t dslot) {
        CTorus invs(tg), hs(tg);
        for (std::size_t tb = 0; tb < T; ++tb) {
            invs.v[tb] = inv[slice * T + tb];
            hs.v[tb] = h[slice * T + tb];
        }
        double d = 0.0;
        RTorus p = recover_p_slice(tg, bg, invs, hs, &d);
        defects[dslot] = d;
        for (std::size_t tb = 0; tb < T; ++tb) dst[slice * T + tb] = p.v[tb];
    };

    parallel_for(dom.nnodes(), [&](std::size_t k) {
        do_slice(map.inv_int, state.fh.h_int, out.P_int, k, k);
    });
    parallel_for(dom.nbd(), [&](std::size_t b) {
        do_slice(map.inv_bd, state.fh.h_bd, out.P_bd, b, dom.nnodes() + b);
    });
    out.exactness_defect = *std::max_element(defects.begin(), defects.end());
    require(out.exactness_defect <= exactness_tol,
            "integrability violated: pulled-back 1-form has nonzero mean");
}

namespace {

// Hessian blocks of P on the nodes: T2 = d_tau d_zbar P and the slice metric
// g = Re A + P_{z zbar}.
struct Hessians {
    std::vector<cplx> T2;     // [node*T+tb]
    std::vector<double> g;    // metric coefficient
    std::vector<double> Ptt;  // P_{tau taubar}
};

Hessians hessians_of_P(const LeafDomain& dom, const Background& bg, const PotentialBundle& b) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    Hessians H;
    std::vector<cplx> T1 = dom.dtau(b.P_int, b.P_bd);
    std::vector<double> lap = dom.laplace_tau(b.P_int, b.P_bd);
    H.T2.resize(b.P_int.size());
    H.g.resize(b.P_int.size());
    H.Ptt.resize(b.P_int.size());
    parallel_for(dom.nnodes(), [&](std::size_t k) {
        CTorus t1(tg);
        RTorus ps(tg);
        for (std::size_t tb = 0; tb < T; ++tb) {
            t1.v[tb] = T1[k * T + tb];
            ps.v[tb] = b.P_int[k * T + tb];
        }
        CTorus t2 = dzbar(t1);
        RTorus pxx = spectral_derivative(ps, 2, 0);
        RTorus pyy = spectral_derivative(ps, 0, 2);
        for (std::size_t tb = 0; tb < T; ++tb) {
            H.T2[k * T + tb] = t2.v[tb];
            H.g[k * T + tb] = bg.A.v[tb].real() + 0.25 * (pxx.v[tb] + pyy.v[tb]);
            H.Ptt[k * T + tb] = 0.25 * lap[k * T + tb];
        }
    });
    return H;
}

// Sharp source evaluation for the spectral disc: P at arbitrary tau via the
// coefficient series, differentiated with a 5-point 4th-order stencil.
struct SharpSource {
    double q_consistency = 0.0;
    double hcma_residual = 0.0;
};

RTorus eval_P_at(const DiscDomain& dom, const Background& bg, const LeafDomain::HoloPair& fh,
                 cplx tau, int interp_order) {
    const TorusGrid& tg = dom.torus();
    std::vector<cplx> fv, hv;
    dom.eval_fh_at(fh, tau, &fv, &hv);
    CTorus fslice(tg), hslice(tg);
    fslice.v = fv;
    hslice.v = hv;
    // invert z + f(z) = w on this slice
    TorusInterp fi(fslice, interp_order);
    CTorus invdisp(tg);
    for (int iy = 0; iy < tg.ny; ++iy)
        for (int ix = 0; ix < tg.nx; ++ix) {
            const double wx = tg.x(ix), wy = tg.y(iy);
            double zx = wx, zy = wy;
            for (int n = 0; n < 50; ++n) {
                const cplx fvp = fi(zx, zy);
                const double gx = zx + fvp.real() - wx, gy = zy + fvp.imag() - wy;
                if (std::abs(gx) + std::abs(gy) < 1e-13) break;
                const cplx fx = fi.deriv(zx, zy, 1, 0), fy = fi.deriv(zx, zy, 0, 1);
                const double a11 = 1.0 + fx.real(), a12 = fy.real();
                const double a21 = fx.imag(), a22 = 1.0 + fy.imag();
                const double det = a11 * a22 - a12 * a21;
                zx -= (a22 * gx - a12 * gy) / det;
                zy -= (-a21 * gx + a11 * gy) / det;
            }
            invdisp.v[tg.at(ix, iy)] = cplx(zx - wx, zy - wy);
        }
    return recover_p_slice(tg, bg, invdisp, hslice, nullptr);
}

SharpSource sharp_source_checks(const DiscDomain& dom, const Background& bg,
                                const DiscFamilyState& state) {
    const TorusGrid& tg = dom.torus();
    const double ht = 0.4 / std::sqrt(static_cast<double>(dom.mesh().nr()));
    Rng rng(0x9a11ULL);
    SharpSource out;
    for (int s = 0; s < 6; ++s) {
        const double r = 0.15 + 0.55 * rng.next_unit();
        const double ang = 2.0 * PI * rng.next_unit();
        const cplx tau = r * std::exp(I * ang);
        // 5-point 4th-order second derivatives in each real direction
        auto P = [&](cplx t) { return eval_P_at(dom, bg, state.fh, t, 5); };
        RTorus p0 = P(tau);
        RTorus pxp = P(tau + ht), pxm = P(tau - ht), px2p = P(tau + 2.0 * ht),
               px2m = P(tau - 2.0 * ht);
        RTorus pyp = P(tau + I * ht), pym = P(tau - I * ht), py2p = P(tau + 2.0 * I * ht),
               py2m = P(tau - 2.0 * I * ht);
        RTorus lap(tg);
        for (std::size_t i = 0; i < tg.size(); ++i)
            lap.v[i] = (-px2p.v[i] + 16.0 * pxp.v[i] - 30.0 * p0.v[i] + 16.0 * pxm.v[i] -
                        px2m.v[i] - py2p.v[i] + 16.0 * pyp.v[i] - 30.0 * p0.v[i] +
                        16.0 * pym.v[i] - py2m.v[i]) /
                       (12.0 * ht * ht);
        // P_tau = (d/dt - i d/dtheta)/2 with 4th-order first derivatives,
        // then d_zbar spectrally
        CTorus ptau(tg);
        for (std::size_t i = 0; i < tg.size(); ++i) {
            const double dx =
                (-px2p.v[i] + 8.0 * pxp.v[i] - 8.0 * pxm.v[i] + px2m.v[i]) / (12.0 * ht);
            const double dy =
                (-py2p.v[i] + 8.0 * pyp.v[i] - 8.0 * pym.v[i] + py2m.v[i]) / (12.0 * ht);
            ptau.v[i] = 0.5 * cplx(dx, -dy);
        }
        CTorus t2 = dzbar(ptau);
        RTorus pxx = spectral_derivative(p0, 2, 0), pyy = spectral_derivative(p0, 0, 2);
        RTorus R(tg);
        double mean = 0.0;
        for (std::size_t i = 0; i < tg.size(); ++i) {
            const double gm = bg.A.v[i].real() + 0.25 * (pxx.v[i] + pyy.v[i]);
            R.v[i] = -0.25 * lap.v[i] + std::norm(t2.v[i]) / gm;
            mean += R.v[i];
        }
        mean /= static_cast<double>(tg.size());
        double var = 0.0, gmax = 0.0;
        for (std::size_t i = 0; i < tg.size(); ++i) {
            var = std::max(var, std::abs(R.v[i] - mean));
            gmax = std::max(gmax, bg.A.v[i].real() + 0.25 * (pxx.v[i] + pyy.v[i]));
        }
        out.q_consistency = std::max(out.q_consistency, var);
        out.hcma_residual = std::max(out.hcma_residual, 2.0 * gmax * var);
    }
    return out;
}

}  // namespace

void compute_Q(const LeafDomain& dom, const Background& bg, const DiscFamilyState& state,
               PotentialBundle& out) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    Hessians H = hessians_of_P(dom, bg, out);

    out.positivity_min = *std::min_element(H.g.begin(), H.g.end());
    require(out.positivity_min > 0.0, "metric degenerate");

    std::vector<double> Ravg(dom.nnodes());
    double qmesh = 0.0;
    for (std::size_t k = 0; k < dom.nnodes(); ++k) {
        double mean = 0.0;
        for (std::size_t tb = 0; tb < T; ++tb) {
            const std::size_t id = k * T + tb;
            mean += -H.Ptt[id] + std::norm(H.T2[id]) / H.g[id];
        }
        mean /= static_cast<double>(T);
        Ravg[k] = mean;
        for (std::size_t tb = 0; tb < T; ++tb) {
            const std::size_t id = k * T + tb;
            qmesh = std::max(qmesh,
                             std::abs(-H.Ptt[id] + std::norm(H.T2[id]) / H.g[id] - mean));
        }
    }
    out.q_consistency = qmesh;

    // sharp off-node diagnostics when supported (spectral disc)
    if (dom.supports_offnode()) {
        const auto* disc = dynamic_cast<const DiscDomain*>(&dom);
        if (disc) {
            SharpSource s = sharp_source_checks(*disc, bg, state);
            out.q_consistency = s.q_consistency;
            out.hcma_residual = s.hcma_residual;
        }
    }

    // Laplace_tau Q = 4 R_avg,  Q|_bd = F(., z0) with z0 the torus origin
    std::vector<double> rhs(dom.nnodes());
    for (std::size_t k = 0; k < dom.nnodes(); ++k) rhs[k] = 4.0 * Ravg[k];
    std::vector<double> gq(dom.nbd());
    for (std::size_t b = 0; b < dom.nbd(); ++b) gq[b] = state.F_bd[b * T];
    out.Q_int = dom.poisson_slice(rhs, gq);
    out.Q_bd = gq;
}

void assemble_and_check(const LeafDomain& dom, const Background& bg,
                        const DiscFamilyState& state, PotentialBundle& out) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    out.Phi_int.resize(out.P_int.size());
    out.Phi_bd.resize(out.P_bd.size());
    for (std::size_t k = 0; k < dom.nnodes(); ++k)
        for (std::size_t tb = 0; tb < T; ++tb)
            out.Phi_int[k * T + tb] = out.P_int[k * T + tb] + out.Q_int[k];
    double bres = 0.0;
    for (std::size_t b = 0; b < dom.nbd(); ++b)
        for (std::size_t tb = 0; tb < T; ++tb) {
            out.Phi_bd[b * T + tb] = out.P_bd[b * T + tb] + out.Q_bd[b];
            bres = std::max(bres, std::abs(out.Phi_bd[b * T + tb] - state.F_bd[b * T + tb]));
        }
    out.boundary_residual = bres;

    if (!dom.supports_offnode()) {
        // mesh-FD determinant residual, normalized by the flat coefficient 1/2
        Hessians H = hessians_of_P(dom, bg, out);
        std::vector<double> lapQ = dom.laplace_tau(
            [&] {
                std::vector<double> q(out.P_int.size());
                for (std::size_t k = 0; k < dom.nnodes(); ++k)
                    for (std::size_t tb = 0; tb < T; ++tb) q[k * T + tb] = out.Q_int[k];
                return q;
            }(),
            [&] {
                std::vector<double> q(out.P_bd.size());
                for (std::size_t b = 0; b < dom.nbd(); ++b)
                    for (std::size_t tb = 0; tb < T; ++tb) q[b * T + tb] = out.Q_bd[b];
                return q;
            }());
        double worst = 0.0;
        for (std::size_t id = 0; id < out.P_int.size(); ++id) {
            const double phitt = H.Ptt[id] + 0.25 * lapQ[id];
            worst = std::max(worst, std::abs(H.g[id] * phitt - std::norm(H.T2[id])));
        }
        out.hcma_residual = 2.0 * worst;
    }
}

PotentialBundle assemble_potential(const LeafDomain& dom, const Background& bg,
                                   const DiscFamilyState& state, const FoliationMap& map) {
    PotentialBundle out;
    recover_P(dom, bg, state, map, out);
    compute_Q(dom, bg, state, out);
    assemble_and_check(dom, bg, state, out);
    return out;
}

// --------------------------- leafwise harmonic ------------------------------

TangentField leafwise_harmonic(const LeafDomain& dom, const FoliationMap& map,
                               const std::vector<double>& g_bd) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    TangentField out;
    // pull back through the boundary foliation
    std::vector<double> gA(dom.nbd() * T);
    parallel_for(dom.nbd(), [&](std::size_t b) {
        RTorus gs(tg);
        for (std::size_t tb = 0; tb < T; ++tb) gs.v[tb] = g_bd[b * T + tb];
        TorusInterp gi(gs, 5);
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const std::size_t tb = tg.at(ix, iy);
                const cplx f = map.fwd_bd[b * T + tb];
                gA[b * T + tb] = gi(tg.x(ix) + f.real(), tg.y(iy) + f.imag()).real();
            }
    });
    std::vector<double> ext = dom.harmonic_ext(gA);
    // leafwise residual: the extension solves the discrete slice problem
    std::vector<double> lap = dom.laplace_tau(ext, gA);
    out.leaf_residual = sup_norm(lap);
    // push forward
    out.int_.resize(dom.nnodes() * T);
    out.bd_ = g_bd;
    parallel_for(dom.nnodes(), [&](std::size_t k) {
        RTorus es(tg);
        for (std::size_t tb = 0; tb < T; ++tb) es.v[tb] = ext[k * T + tb];
        TorusInterp ei(es, 5);
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const std::size_t tb = tg.at(ix, iy);
                const cplx zd = map.inv_int[k * T + tb];
                out.int_[k * T + tb] =
                    ei(tg.x(ix) + zd.real(), tg.y(iy) + zd.imag()).real();
            }
    });
    return out;
}

double kernel_identity_residual(const LeafDomain& dom, const Background& bg,
                                const DiscFamilyState& state, const FoliationMap& map,
                                const PotentialBundle& bundle) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    std::vector<cplx> T1 = dom.dtau(bundle.P_int, bundle.P_bd);
    double worst = 0.0;
    const std::size_t step = std::max<std::size_t>(1, dom.nnodes() / 48);
    for (std::size_t k = 0; k < dom.nnodes(); k += step) {
        CTorus t1(tg);
        RTorus ps(tg);
        for (std::size_t tb = 0; tb < T; ++tb) {
            t1.v[tb] = T1[k * T + tb];
            ps.v[tb] = bundle.P_int[k * T + tb];
        }
        CTorus t2 = dzbar(t1);
        RTorus pxx = spectral_derivative(ps, 2, 0), pyy = spectral_derivative(ps, 0, 2);
        CTorus rhs(tg);
        for (std::size_t tb = 0; tb < T; ++tb) {
            const double gm = bg.A.v[tb].real() + 0.25 * (pxx.v[tb] + pyy.v[tb]);
            rhs.v[tb] = -t2.v[tb] / gm;
        }
        TorusInterp ri(rhs, 5);
        for (std::size_t tb = 0; tb < T; ++tb) {
            const int ix = static_cast<int>(tb) % tg.nx, iy = static_cast<int>(tb) / tg.nx;
            const cplx f = map.fwd_int[k * T + tb];
            const cplx want = ri(tg.x(ix) + f.real(), tg.y(iy) + f.imag());
            worst = std::max(worst, std::abs(state.fh.f_dtau_int[k * T + tb] - want));
        }
    }
    return worst;
}

// ------------------------------- comparison ---------------------------------

SolveResult solve_hcma(const LeafDomain& dom, const Background& bg,
                       const std::vector<double>& F_bd, const IterationConfig& cfg) {
    SolveResult r;
    r.state = solve_disc_family(dom, bg, F_bd, cfg);
    r.map = build_foliation_map(dom, r.state);
    r.bundle = assemble_potential(dom, bg, r.state, r.map);
    return r;
}

ComparisonReport linearized_comparison(const LeafDomain& dom, const Background& bg,
                                       const std::vector<double>& F0_bd,
                                       const std::vector<double>& F1_bd, int n_lambda,
                                       const IterationConfig& cfg) {
    require(n_lambda >= 2, "linearized_comparison: n_lambda too small");
    ComparisonReport rep;
    rep.n_lambda = n_lambda;
    const std::size_t N = F0_bd.size();
    std::vector<double> diff(N);
    for (std::size_t i = 0; i < N; ++i) diff[i] = F1_bd[i] - F0_bd[i];

    std::vector<SolveResult> sols(n_lambda + 1);
    std::vector<TangentField> Hs(n_lambda + 1);
    for (int i = 0; i <= n_lambda; ++i) {
        const double lam = static_cast<double>(i) / n_lambda;
        std::vector<double> F(N);
        for (std::size_t k = 0; k < N; ++k) F[k] = (1.0 - lam) * F0_bd[k] + lam * F1_bd[k];
        try {
            sols[i] = solve_hcma(dom, bg, F, cfg);
        } catch (const SolverError& e) {
            throw SolverError("linearized_comparison aborted at lambda=" + std::to_string(lam) +
                              ": " + e.what());
        }
        Hs[i] = leafwise_harmonic(dom, sols[i].map, diff);
    }
    const std::vector<double>& phi0 = sols[0].bundle.Phi_int;
    const std::vector<double>& phi1 = sols[n_lambda].bundle.Phi_int;
    double dsup = 0.0, gap = 0.0;
    for (std::size_t id = 0; id < phi0.size(); ++id) {
        double trapz = 0.0;
        for (int i = 0; i <= n_lambda; ++i) {
            const double w = (i == 0 || i == n_lambda) ? 0.5 : 1.0;
            trapz += w * Hs[i].int_[id];
        }
        trapz /= n_lambda;
        dsup = std::max(dsup, std::abs(phi1[id] - phi0[id]));
        gap = std::max(gap, std::abs(phi1[id] - phi0[id] - trapz));
    }
    rep.diff_sup = dsup;
    rep.integral_gap = gap;

    // quadratic remainder at nu = 0 with steps 1/2 and 1/4
    auto remainder = [&](double lam) {
        std::vector<double> F(N);
        for (std::size_t k = 0; k < N; ++k) F[k] = (1.0 - lam) * F0_bd[k] + lam * F1_bd[k];
        SolveResult s = solve_hcma(dom, bg, F, cfg);
        double z = 0.0;
        for (std::size_t id = 0; id < phi0.size(); ++id)
            z = std::max(z, std::abs(s.bundle.Phi_int[id] - phi0[id] - lam * Hs[0].int_[id]));
        return z;
    };
    rep.remainder_full = remainder(0.5);
    rep.remainder_half = remainder(0.25);
    rep.remainder_ratio =
        (rep.remainder_half > 0.0) ? rep.remainder_full / rep.remainder_half : 0.0;
    return rep;
}

}  // namespace hcma
