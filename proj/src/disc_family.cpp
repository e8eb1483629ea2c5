#include "hcma/disc_family.hpp"

#include <algorithm>
#include <cmath>

namespace hcma {

// ------------------------------- Background --------------------------------

Background Background::flat_torus(const TorusGrid& g) {
    Background bg;
    bg.tg = g;
    bg.flat = true;
    bg.A = CTorus::sample(g, [](double, double) { return cplx(0.5, 0.0); });
    bg.S = CTorus(g);
    bg.dpsi0 = CTorus(g);
    bg.dpsi0_interp = TorusInterp(bg.dpsi0, 3);
    return bg;
}

Background Background::shifted(const RTorus& psi0) {
    Background bg;
    bg.tg = psi0.grid;
    bg.flat = false;
    CTorus p = to_complex(psi0);
    bg.dpsi0 = dz(p);
    CTorus azz = dzbar(bg.dpsi0);
    bg.A = CTorus(psi0.grid);
    for (std::size_t i = 0; i < bg.A.v.size(); ++i) bg.A.v[i] = 0.5 + azz.v[i];
    bg.S = dz(bg.dpsi0);
    bg.dpsi0_interp = TorusInterp(bg.dpsi0, 5);
    return bg;
}

double Background::metric_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const cplx& a : A.v) m = std::min(m, a.real());
    return m;
}

// -------------------------------- DiscDomain --------------------------------

DiscDomain::DiscDomain(int nr, int na, const TorusGrid& tg) : mesh_(nr, na), tg_(tg) {}

std::vector<cplx> DiscDomain::coeffs_from_boundary(const std::vector<cplx>& bd) const {
    // boundary values of a holomorphic function carry only modes k >= 0
    const int na = mesh_.na();
    const std::size_t T = tg_.size();
    std::vector<cplx> coef((static_cast<std::size_t>(na) / 2 + 1) * T);
    std::vector<cplx> slice(static_cast<std::size_t>(na));
    for (std::size_t tb = 0; tb < T; ++tb) {
        for (int j = 0; j < na; ++j) slice[j] = bd[static_cast<std::size_t>(j) * T + tb];
        fft::fwd(slice);
        const double s = 1.0 / na;
        for (int k = 0; k <= na / 2; ++k) coef[static_cast<std::size_t>(k) * T + tb] = s * slice[k];
    }
    return coef;
}

LeafDomain::HoloPair DiscDomain::rh_solve(const std::vector<cplx>& bdata, const CTorus& A,
                                          const CTorus& S) const {
    const int na = mesh_.na(), nr = mesh_.nr();
    const std::size_t T = tg_.size();
    CBDisc b(na, tg_);
    b.v = bdata;
    RHFamily fam = rh_family_solve(b, A, S);

    HoloPair out;
    out.f_bd = fam.f_bd.v;
    out.h_bd = fam.h_bd.v;
    out.f_int.resize(mesh_.nodes() * T);
    out.h_int.resize(mesh_.nodes() * T);
    out.f_dtau_int.resize(mesh_.nodes() * T);

    // interior evaluation by per-ring scaled inverse FFTs
    parallel_for(T, [&](std::size_t tb) {
        const std::size_t nm = fam.nmodes();
        std::vector<cplx> ring(static_cast<std::size_t>(na));
        struct Job {
            const std::vector<cplx>* coef;
            std::vector<cplx>* dst;
            bool deriv;
        };
        const Job jobs[3] = {{&fam.fcoef, &out.f_int, false},
                             {&fam.hcoef, &out.h_int, false},
                             {&fam.fcoef, &out.f_dtau_int, true}};
        for (const Job& job : jobs) {
            for (int i = 0; i < nr; ++i) {
                const double r = mesh_.r_of(i);
                std::fill(ring.begin(), ring.end(), cplx(0.0));
                if (!job.deriv) {
                    double rk = 1.0;
                    for (std::size_t k = 0; k < nm && k < static_cast<std::size_t>(na); ++k) {
                        ring[k] = (*job.coef)[k * T + tb] * (rk * na);
                        rk *= r;
                    }
                } else {
                    // sum_k k c_k r^{k-1} e^{i(k-1)a}
                    double rk = 1.0;
                    for (std::size_t k = 1; k < nm && k - 1 < static_cast<std::size_t>(na); ++k) {
                        ring[k - 1] = (*job.coef)[k * T + tb] * (static_cast<double>(k) * rk * na);
                        rk *= r;
                    }
                }
                fft::inv(ring);
                for (int j = 0; j < na; ++j) (*job.dst)[mesh_.at(i, j) * T + tb] = ring[j];
            }
        }
    });
    return out;
}

std::vector<double> DiscDomain::harmonic_ext(const std::vector<double>& bdata) const {
    const int na = mesh_.na();
    const std::size_t T = tg_.size();
    std::vector<double> out(mesh_.nodes() * T);
    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> slice(static_cast<std::size_t>(na));
        for (int j = 0; j < na; ++j) slice[j] = bdata[static_cast<std::size_t>(j) * T + tb];
        std::vector<double> ext = harmonic_extension_disc(mesh_, slice);
        for (std::size_t k = 0; k < mesh_.nodes(); ++k) out[k * T + tb] = ext[k];
    });
    return out;
}

std::vector<double> DiscDomain::poisson_slice(const std::vector<double>& rhs,
                                              const std::vector<double>& g) const {
    return mesh_.solve(rhs, g);
}

std::vector<double> DiscDomain::laplace_tau(const std::vector<double>& u,
                                            const std::vector<double>& u_bd) const {
    const int nr = mesh_.nr(), na = mesh_.na();
    const double dr = mesh_.dr(), da = 2.0 * PI / na;
    const std::size_t T = u.size() / mesh_.nodes();
    std::vector<double> out(u.size());
    for (int i = 0; i < nr; ++i) {
        const double r = mesh_.r_of(i);
        const double rm = r - 0.5 * dr, rp = r + 0.5 * dr;
        for (int j = 0; j < na; ++j)
            for (std::size_t tb = 0; tb < T; ++tb) {
                const double uc = u[mesh_.at(i, j) * T + tb];
                double flux = 0.0;
                if (i < nr - 1) {
                    flux += rp * (u[mesh_.at(i + 1, j) * T + tb] - uc);
                } else {
                    const double g = u_bd[static_cast<std::size_t>(j) * T + tb];
                    const double ughost =
                        (8.0 / 3.0) * g - 2.0 * uc + u[mesh_.at(i - 1, j) * T + tb] / 3.0;
                    flux += rp * (ughost - uc);
                }
                if (i > 0) flux -= rm * (uc - u[mesh_.at(i - 1, j) * T + tb]);
                double acc = flux / (r * dr * dr);
                acc += (u[mesh_.at(i, (j + 1) % na) * T + tb] - 2.0 * uc +
                        u[mesh_.at(i, (j + na - 1) % na) * T + tb]) /
                       (r * r * da * da);
                out[mesh_.at(i, j) * T + tb] = acc;
            }
    }
    return out;
}

std::vector<cplx> DiscDomain::dtau(const std::vector<double>& u,
                                   const std::vector<double>& u_bd) const {
    // d/dtau = e^{-i a}(d/dr - (i/r) d/da)/2 on the polar mesh
    const int nr = mesh_.nr(), na = mesh_.na();
    const double dr = mesh_.dr(), da = 2.0 * PI / na;
    const std::size_t T = u.size() / mesh_.nodes();
    std::vector<cplx> out(u.size());
    for (int i = 0; i < nr; ++i) {
        const double r = mesh_.r_of(i);
        for (int j = 0; j < na; ++j) {
            const cplx phase = std::exp(-I * mesh_.alpha_of(j));
            for (std::size_t tb = 0; tb < T; ++tb) {
                double ur;
                if (i == 0) {
                    // across-pole neighbor: value at (r_0, a + pi)
                    const double uin = u[mesh_.at(0, (j + na / 2) % na) * T + tb];
                    ur = (u[mesh_.at(1, j) * T + tb] - uin) / (2.0 * dr);
                } else if (i == nr - 1) {
                    const double g = u_bd[static_cast<std::size_t>(j) * T + tb];
                    const double uc = u[mesh_.at(i, j) * T + tb];
                    const double ughost =
                        (8.0 / 3.0) * g - 2.0 * uc + u[mesh_.at(i - 1, j) * T + tb] / 3.0;
                    ur = (ughost - u[mesh_.at(i - 1, j) * T + tb]) / (2.0 * dr);
                } else {
                    ur = (u[mesh_.at(i + 1, j) * T + tb] - u[mesh_.at(i - 1, j) * T + tb]) /
                         (2.0 * dr);
                }
                const double ua = (u[mesh_.at(i, (j + 1) % na) * T + tb] -
                                   u[mesh_.at(i, (j + na - 1) % na) * T + tb]) /
                                  (2.0 * da);
                out[mesh_.at(i, j) * T + tb] = 0.5 * phase * (ur - I * ua / r);
            }
        }
    }
    return out;
}

void DiscDomain::eval_fh_at(const HoloPair& fh, cplx tau, std::vector<cplx>* f_out,
                            std::vector<cplx>* h_out) const {
    const std::size_t T = tg_.size();
    const std::size_t nm = static_cast<std::size_t>(mesh_.na()) / 2 + 1;
    std::vector<cplx> fc, hc;
    if (f_out) fc = coeffs_from_boundary(fh.f_bd);
    if (h_out) hc = coeffs_from_boundary(fh.h_bd);
    if (f_out) f_out->assign(T, 0.0);
    if (h_out) h_out->assign(T, 0.0);
    for (std::size_t tb = 0; tb < T; ++tb) {
        if (f_out) {
            cplx v = 0.0;
            for (std::size_t k = nm; k-- > 0;) v = v * tau + fc[k * T + tb];
            (*f_out)[tb] = v;
        }
        if (h_out) {
            cplx v = 0.0;
            for (std::size_t k = nm; k-- > 0;) v = v * tau + hc[k * T + tb];
            (*h_out)[tb] = v;
        }
    }
}

// -------------------------------- StripDomain -------------------------------

StripDomain::StripDomain(std::shared_ptr<const StripMesh> mesh, const TorusGrid& tg)
    : mesh_(std::move(mesh)), tg_(tg) {
    base_bp_ = static_cast<std::size_t>(mesh_->boundary_point_of_node(mesh_->col_of(0.0), 0));
}

LeafDomain::HoloPair StripDomain::rh_solve(const std::vector<cplx>& bdata, const CTorus& A,
                                           const CTorus& S) const {
    const StripMesh& m = *mesh_;
    const std::size_t T = tg_.size(), nb = m.boundary().size();
    for (const cplx& a : A.v) require(std::abs(a) > 1e-10, "A not invertible");
    HoloPair out;
    out.f_bd.resize(nb * T);
    out.h_bd.resize(nb * T);
    out.f_int.resize(nnodes() * T);
    out.h_int.resize(nnodes() * T);
    out.f_dtau_int.resize(nnodes() * T);
    const int base = static_cast<int>(base_bp_);

    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> u1(nb), u2(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            const cplx bb = bdata[b * T + tb];
            u1[b] = bb.real();
            u2[b] = bb.imag();
        }
        const cplx b0 = bdata[base_bp_ * T + tb];
        HoloStrip g1 = holo_complete_strip(m, u1, base, b0.imag());
        HoloStrip g2 = holo_complete_strip(m, u2, base, -b0.real());
        const cplx Av = A.v[tb], Sv = S.v[tb];
        const cplx iAc = 1.0 / (2.0 * std::conj(Av));
        for (std::size_t b = 0; b < nb; ++b) {
            const cplx G1(g1.u_b[b], g1.v_b[b]);
            const cplx G2(g2.u_b[b], g2.v_b[b]);
            const cplx f = (G1 - I * G2) * iAc;
            out.f_bd[b * T + tb] = f;
            out.h_bd[b * T + tb] = Sv * f - 0.5 * (G1 + I * G2);
        }
        out.f_bd[base_bp_ * T + tb] = 0.0;  // exact by the point condition
        for (std::size_t k = 0; k < nnodes(); ++k) {
            const cplx G1(g1.u_int[k], g1.v_int[k]);
            const cplx G2(g2.u_int[k], g2.v_int[k]);
            const cplx f = (G1 - I * G2) * iAc;
            out.f_int[k * T + tb] = f;
            out.h_int[k * T + tb] = Sv * f - 0.5 * (G1 + I * G2);
        }
    });

    // FD d/dtau of f on the lattice, slice by slice
    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> ure(nnodes()), uim(nnodes()), gre(nb), gim(nb);
        for (std::size_t k = 0; k < nnodes(); ++k) {
            ure[k] = out.f_int[k * T + tb].real();
            uim[k] = out.f_int[k * T + tb].imag();
        }
        for (std::size_t b = 0; b < nb; ++b) {
            gre[b] = out.f_bd[b * T + tb].real();
            gim[b] = out.f_bd[b * T + tb].imag();
        }
        for (std::size_t k = 0; k < nnodes(); ++k) {
            const int ik = static_cast<int>(k);
            const cplx dt(m.node_deriv(ik, 1, ure, gre), m.node_deriv(ik, 1, uim, gim));
            const cplx dth(m.node_deriv(ik, 0, ure, gre), m.node_deriv(ik, 0, uim, gim));
            out.f_dtau_int[k * T + tb] = 0.5 * (dt - I * dth);
        }
    });
    return out;
}

std::vector<double> StripDomain::harmonic_ext(const std::vector<double>& bdata) const {
    const StripMesh& m = *mesh_;
    const std::size_t T = tg_.size(), nb = m.boundary().size();
    std::vector<double> out(nnodes() * T);
    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> g(nb), zero(m.interior_count(), 0.0);
        for (std::size_t b = 0; b < nb; ++b) g[b] = bdata[b * T + tb];
        std::vector<double> u = m.solve(zero, g);
        for (std::size_t k = 0; k < nnodes(); ++k) out[k * T + tb] = u[k];
    });
    return out;
}

std::vector<double> StripDomain::poisson_slice(const std::vector<double>& rhs,
                                               const std::vector<double>& g) const {
    return mesh_->solve(rhs, g);
}

std::vector<double> StripDomain::laplace_tau(const std::vector<double>& u,
                                             const std::vector<double>& u_bd) const {
    const StripMesh& m = *mesh_;
    const std::size_t T = u.size() / nnodes();
    std::vector<double> out(u.size());
    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> us(nnodes()), gs(m.boundary().size());
        for (std::size_t k = 0; k < nnodes(); ++k) us[k] = u[k * T + tb];
        for (std::size_t b = 0; b < gs.size(); ++b) gs[b] = u_bd[b * T + tb];
        for (std::size_t k = 0; k < nnodes(); ++k)
            out[k * T + tb] = m.node_laplace(static_cast<int>(k), us, gs);
    });
    return out;
}

std::vector<cplx> StripDomain::dtau(const std::vector<double>& u,
                                    const std::vector<double>& u_bd) const {
    const StripMesh& m = *mesh_;
    const std::size_t T = u.size() / nnodes();
    std::vector<cplx> out(u.size());
    parallel_for(T, [&](std::size_t tb) {
        std::vector<double> us(nnodes()), gs(m.boundary().size());
        for (std::size_t k = 0; k < nnodes(); ++k) us[k] = u[k * T + tb];
        for (std::size_t b = 0; b < gs.size(); ++b) gs[b] = u_bd[b * T + tb];
        for (std::size_t k = 0; k < nnodes(); ++k) {
            const int ik = static_cast<int>(k);
            out[k * T + tb] =
                0.5 * cplx(m.node_deriv(ik, 1, us, gs), -m.node_deriv(ik, 0, us, gs));
        }
    });
    return out;
}

// ------------------------------ contraction ---------------------------------

std::vector<cplx> boundary_residual(const LeafDomain& dom, const Background& bg,
                                    const std::vector<double>& F_bd,
                                    const LeafDomain::HoloPair& fh) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size(), nb = dom.nbd();
    std::vector<cplx> b(nb * T);
    parallel_for(nb, [&](std::size_t bi) {
        RTorus Fs(tg);
        for (std::size_t tb = 0; tb < T; ++tb) Fs.v[tb] = F_bd[bi * T + tb];
        CTorus dF = dz(to_complex(Fs));
        TorusInterp dFi(dF, 5);
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const std::size_t tb = tg.at(ix, iy);
                const cplx f = fh.f_bd.empty() ? cplx(0.0) : fh.f_bd[bi * T + tb];
                const cplx h = fh.h_bd.empty() ? cplx(0.0) : fh.h_bd[bi * T + tb];
                const double zx = tg.x(ix) + f.real(), zy = tg.y(iy) + f.imag();
                cplx psi_term = 0.0;
                if (!bg.flat) psi_term = bg.dpsi0_interp(zx, zy) - bg.dpsi0.v[tb];
                b[bi * T + tb] = -0.5 * std::conj(f) - psi_term - dFi(zx, zy) + h;
            }
    });
    return b;
}

LeafDomain::HoloPair disc_iteration_step(const LeafDomain& dom, const Background& bg,
                                         const std::vector<double>& F_bd,
                                         const LeafDomain::HoloPair& fh) {
    std::vector<cplx> b = boundary_residual(dom, bg, F_bd, fh);
    return dom.rh_solve(b, bg.A, bg.S);
}

namespace {

void add_pair(LeafDomain::HoloPair& acc, const LeafDomain::HoloPair& d) {
    if (acc.f_bd.empty()) {
        acc = d;
        return;
    }
    for (std::size_t i = 0; i < acc.f_bd.size(); ++i) acc.f_bd[i] += d.f_bd[i];
    for (std::size_t i = 0; i < acc.h_bd.size(); ++i) acc.h_bd[i] += d.h_bd[i];
    for (std::size_t i = 0; i < acc.f_int.size(); ++i) acc.f_int[i] += d.f_int[i];
    for (std::size_t i = 0; i < acc.h_int.size(); ++i) acc.h_int[i] += d.h_int[i];
    for (std::size_t i = 0; i < acc.f_dtau_int.size(); ++i) acc.f_dtau_int[i] += d.f_dtau_int[i];
}

double pair_weighted_norm(const LeafDomain& dom, const LeafDomain::HoloPair& p,
                          const IterationConfig& cfg) {
    const auto* disc = dynamic_cast<const DiscDomain*>(&dom);
    if (!disc) return sup_norm(p.f_bd) + sup_norm(p.h_bd);
    CBDisc f(disc->mesh().na(), dom.torus()), h(disc->mesh().na(), dom.torus());
    f.v = p.f_bd;
    h.v = p.h_bd;
    const double lo = hnorm(f, cfg.gamma - 2.0) + hnorm(h, cfg.gamma - 2.0);
    const double hi = hnorm(f, 2.0 + cfg.X) + hnorm(h, 2.0 + cfg.X);
    return lo + cfg.A_weight * hi;
}

}  // namespace

DiscFamilyState solve_disc_family(const LeafDomain& dom, const Background& bg,
                                  const std::vector<double>& F_bd, const IterationConfig& cfg_in,
                                  const LeafDomain::HoloPair* init) {
    IterationConfig cfg = cfg_in;
    require(cfg.l < 0.25, "IterationConfig: l must be below 1/4");
    DiscFamilyState st;
    st.dom = &dom;
    st.bg = bg;
    st.F_bd = F_bd;
    st.cfg = cfg;
    if (init) st.fh = *init;

    const double scale = std::max(1.0, sup_norm(F_bd));
    int bad_streak = 0;
    double prev_w = -1.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        LeafDomain::HoloPair corr = disc_iteration_step(dom, bg, F_bd, st.fh);
        const double cs = std::max(sup_norm(corr.f_bd), sup_norm(corr.h_bd));
        st.correction_sup.push_back(cs);
        if (cfg.track_weighted) {
            const double w = pair_weighted_norm(dom, corr, cfg);
            st.weighted_norms.push_back(w);
            if (prev_w > 0.0 && w > 0.0) st.contraction_ratios.push_back(w / prev_w);
            prev_w = w;
        } else if (st.correction_sup.size() >= 2) {
            const double prev = st.correction_sup[st.correction_sup.size() - 2];
            if (prev > 0.0) st.contraction_ratios.push_back(cs / prev);
        }
        add_pair(st.fh, corr);
        st.iterations = it + 1;
        require(sup_norm(st.fh.f_bd) < PI / 2.0, "perturbation too large");
        if (cs < cfg.tol * scale) break;
        if (!st.contraction_ratios.empty() && st.contraction_ratios.back() >= 1.0) {
            if (++bad_streak >= 3) throw SolverError("outside contraction regime");
        } else {
            bad_streak = 0;
        }
    }
    st.final_residual = sup_norm(boundary_residual(dom, bg, F_bd, st.fh));
    return st;
}

// ------------------------------ foliation map -------------------------------

FoliationMap build_foliation_map(const LeafDomain& dom, const DiscFamilyState& state) {
    FoliationMap map;
    map.dom = &dom;
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    map.fwd_int = state.fh.f_int;
    map.fwd_bd = state.fh.f_bd;
    map.inv_int.resize(map.fwd_int.size());
    map.inv_bd.resize(map.fwd_bd.size());

    std::vector<double> jacmin(dom.nnodes() + dom.nbd(),
                               std::numeric_limits<double>::infinity());

    auto invert_slice = [&](const std::vector<cplx>& fsrc, std::vector<cplx>& dst,
                            std::size_t slice, std::size_t jslot) {
        CTorus fslice(tg);
        for (std::size_t tb = 0; tb < T; ++tb) fslice.v[tb] = fsrc[slice * T + tb];
        TorusInterp fi(fslice, map.interp_order);
        double jm = std::numeric_limits<double>::infinity();
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const double wx = tg.x(ix), wy = tg.y(iy);
                double zx = wx, zy = wy;
                bool ok = false;
                for (int n = 0; n < 50; ++n) {
                    const cplx fv = fi(zx, zy);
                    const double gx = zx + fv.real() - wx;
                    const double gy = zy + fv.imag() - wy;
                    if (std::abs(gx) + std::abs(gy) < 1e-13) {
                        ok = true;
                        break;
                    }
                    const cplx fx = fi.deriv(zx, zy, 1, 0);
                    const cplx fy = fi.deriv(zx, zy, 0, 1);
                    const double a11 = 1.0 + fx.real(), a12 = fy.real();
                    const double a21 = fx.imag(), a22 = 1.0 + fy.imag();
                    const double det = a11 * a22 - a12 * a21;
                    require(std::abs(det) > 1e-10, "foliation not invertible at resolution");
                    zx -= (a22 * gx - a12 * gy) / det;
                    zy -= (-a21 * gx + a11 * gy) / det;
                }
                require(ok, "foliation not invertible at resolution");
                dst[slice * T + tg.at(ix, iy)] = cplx(zx - wx, zy - wy);
                const cplx fx = fi.deriv(zx, zy, 1, 0);
                const cplx fy = fi.deriv(zx, zy, 0, 1);
                const cplx fz = 0.5 * (fx - I * fy);
                const cplx fzb = 0.5 * (fx + I * fy);
                jm = std::min(jm, std::norm(1.0 + fz) - std::norm(fzb));
            }
        jacmin[jslot] = jm;
    };

    parallel_for(dom.nnodes(),
                 [&](std::size_t k) { invert_slice(map.fwd_int, map.inv_int, k, k); });
    parallel_for(dom.nbd(), [&](std::size_t b) {
        invert_slice(map.fwd_bd, map.inv_bd, b, dom.nnodes() + b);
    });
    map.jacobian_min = *std::min_element(jacmin.begin(), jacmin.end());
    require(map.jacobian_min > 0.0, "foliation not invertible at resolution");
    return map;
}

double foliation_roundtrip_error(const FoliationMap& map) {
    const LeafDomain& dom = *map.dom;
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size();
    double worst = 0.0;
    const std::size_t step = std::max<std::size_t>(1, dom.nnodes() / 64);
    for (std::size_t k = 0; k < dom.nnodes(); k += step) {
        CTorus fslice(tg);
        for (std::size_t tb = 0; tb < T; ++tb) fslice.v[tb] = map.fwd_int[k * T + tb];
        TorusInterp fi(fslice, map.interp_order);
        for (std::size_t tb = 0; tb < T; ++tb) {
            const int ix = static_cast<int>(tb) % tg.nx, iy = static_cast<int>(tb) / tg.nx;
            const cplx zd = map.inv_int[k * T + tb];
            const double zx = tg.x(ix) + zd.real(), zy = tg.y(iy) + zd.imag();
            const cplx w = cplx(zx, zy) + fi(zx, zy);
            worst = std::max(worst, std::abs(w - cplx(tg.x(ix), tg.y(iy))));
        }
    }
    return worst;
}

double periodic_consistency(const LeafDomain& dom, const DiscFamilyState& state, double sx,
                            double sy) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size(), nb = dom.nbd();
    std::vector<double> Fsh(state.F_bd.size());
    for (std::size_t b = 0; b < nb; ++b) {
        RTorus slice(tg);
        for (std::size_t tb = 0; tb < T; ++tb) slice.v[tb] = state.F_bd[b * T + tb];
        RTorus sh = compose_shift(slice, sx, sy);
        for (std::size_t tb = 0; tb < T; ++tb) Fsh[b * T + tb] = sh.v[tb];
    }
    Background bg2 = state.bg;
    if (!bg2.flat) {
        CTorus d = compose_shift(bg2.dpsi0, sx, sy);
        bg2.dpsi0 = d;
        bg2.dpsi0_interp = TorusInterp(d, 5);
        bg2.A = compose_shift(bg2.A, sx, sy);
        bg2.S = compose_shift(bg2.S, sx, sy);
    }
    DiscFamilyState st2 = solve_disc_family(dom, bg2, Fsh, state.cfg);
    double worst = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        CTorus orig(tg), shifted(tg);
        for (std::size_t tb = 0; tb < T; ++tb) {
            orig.v[tb] = state.fh.f_bd[b * T + tb];
            shifted.v[tb] = st2.fh.f_bd[b * T + tb];
        }
        CTorus un = compose_shift(shifted, -sx, -sy);
        for (std::size_t tb = 0; tb < T; ++tb)
            worst = std::max(worst, std::abs(un.v[tb] - orig.v[tb]));
    }
    return worst;
}

double rh_response_constant(const LeafDomain& dom, const Background& bg, double q) {
    const TorusGrid& tg = dom.torus();
    const std::size_t T = tg.size(), nb = dom.nbd();
    const auto* disc = dynamic_cast<const DiscDomain*>(&dom);
    double worst = 0.0;
    for (int probe = 0; probe < 3; ++probe) {
        std::vector<cplx> b(nb * T);
        for (std::size_t bi = 0; bi < nb; ++bi) {
            const cplx tau = dom.bd_tau(bi);
            for (int iy = 0; iy < tg.ny; ++iy)
                for (int ix = 0; ix < tg.nx; ++ix) {
                    const double x = tg.x(ix), y = tg.y(iy);
                    const double base = (probe == 0)   ? std::cos(x)
                                        : (probe == 1) ? std::sin(x) * std::cos(y)
                                                       : std::cos(2 * x);
                    b[bi * T + tg.at(ix, iy)] =
                        base * cplx(tau.real(), 0.3 * tau.imag() * tau.real());
                }
        }
        LeafDomain::HoloPair sol = dom.rh_solve(b, bg.A, bg.S);
        double nb_norm, ns_norm;
        if (disc) {
            CBDisc bb(disc->mesh().na(), tg), ff(disc->mesh().na(), tg), hh(disc->mesh().na(), tg);
            bb.v = b;
            ff.v = sol.f_bd;
            hh.v = sol.h_bd;
            nb_norm = hnorm(bb, q);
            ns_norm = hnorm(ff, q) + hnorm(hh, q);
        } else {
            nb_norm = sup_norm(b);
            ns_norm = sup_norm(sol.f_bd) + sup_norm(sol.h_bd);
        }
        if (nb_norm > 0.0) worst = std::max(worst, ns_norm / nb_norm);
    }
    return 1.5 * worst;  // measured, inflated
}

}  // namespace hcma
