#include "hcma/elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace hcma {

// --------------------------- Poisson families -------------------------------

DiscProductField<double> poisson_family_solve(const DiscMesh& mesh,
                                              const DiscProductField<double>& f,
                                              const RBDisc& g, double* residual) {
    const TorusGrid tg = g.tg;
    require(f.tg == tg, "poisson_family_solve: grids differ");
    require(static_cast<int>(g.na) == mesh.na(), "poisson_family_solve: boundary count");
    for (double x : f.v) require(std::isfinite(x), "poisson_family_solve: rhs not finite");
    for (double x : g.v) require(std::isfinite(x), "poisson_family_solve: bc not finite");
    DiscProductField<double> out(mesh, tg);
    std::vector<double> res(tg.size(), 0.0);
    parallel_for(tg.size(), [&](std::size_t tb) {
        std::vector<double> rhs(mesh.nodes()), bc(mesh.na());
        for (std::size_t k = 0; k < mesh.nodes(); ++k) rhs[k] = f.v[k * tg.size() + tb];
        for (int j = 0; j < mesh.na(); ++j) bc[j] = g.v[static_cast<std::size_t>(j) * tg.size() + tb];
        std::vector<double> u = mesh.solve(rhs, bc);
        res[tb] = mesh.residual(u, rhs, bc);
        for (std::size_t k = 0; k < mesh.nodes(); ++k) out.v[k * tg.size() + tb] = u[k];
        for (int j = 0; j < mesh.na(); ++j) out.bring[static_cast<std::size_t>(j) * tg.size() + tb] = bc[j];
    });
    if (residual) *residual = sup_norm(res);
    return out;
}

StripField<double> poisson_family_solve(const std::shared_ptr<const StripMesh>& mesh,
                                        const StripField<double>& f,
                                        const std::vector<double>& g_bvals,
                                        const TorusGrid& tg, double* residual) {
    const StripMesh& m = *mesh;
    const std::size_t nb = m.boundary().size();
    require(g_bvals.size() == nb * tg.size(), "poisson_family_solve: boundary size");
    StripField<double> out(mesh, tg);
    std::vector<double> res(tg.size(), 0.0);
    parallel_for(tg.size(), [&](std::size_t tb) {
        std::vector<double> rhs(m.interior_count(), 0.0), bc(nb);
        const bool has_rhs = !f.lattice.empty();
        for (int k = 0; k < m.interior_count(); ++k) {
            const auto [j, i] = m.interior_node(k);
            rhs[k] = has_rhs ? f.lattice[m.lat(j, i) * tg.size() + tb] : 0.0;
        }
        for (std::size_t b = 0; b < nb; ++b) bc[b] = g_bvals[b * tg.size() + tb];
        std::vector<double> u = m.solve(rhs, bc);
        res[tb] = m.residual(u, rhs, bc);
        for (int k = 0; k < m.interior_count(); ++k) {
            const auto [j, i] = m.interior_node(k);
            out.lattice[m.lat(j, i) * tg.size() + tb] = u[k];
        }
        // boundary rows onto the lattice for direct restriction
        for (std::size_t b = 0; b < nb; ++b) out.bvals[b * tg.size() + tb] = bc[b];
        for (int i : {0, m.nt()})
            for (int j = 0; j < m.ncols(); ++j) {
                const int b = m.boundary_point_of_node(j, i);
                if (b >= 0) out.lattice[m.lat(j, i) * tg.size() + tb] = bc[b];
            }
    });
    if (residual) *residual = sup_norm(res);
    return out;
}

// ------------------------- circle Fourier machinery -------------------------

std::vector<cplx> holo_complete_circle(const std::vector<double>& u, int base_j,
                                       double im_target) {
    const int na = static_cast<int>(u.size());
    std::vector<cplx> a(u.begin(), u.end());
    fft::fwd(a);
    const double s = 1.0 / na;
    std::vector<cplx> coef(static_cast<std::size_t>(na) / 2 + 1, 0.0);
    coef[0] = a[0].real() * s;
    for (int k = 1; k < na / 2; ++k) coef[k] = 2.0 * s * a[k];
    coef[na / 2] = a[na / 2].real() * s;
    // pin the imaginary part at the base sample
    const cplx tau0 = std::exp(I * (2.0 * PI * base_j / na));
    cplx val = 0.0;
    for (int k = na / 2; k >= 0; --k) val = val * tau0 + coef[k];
    coef[0] += I * (im_target - val.imag());
    return coef;
}

std::vector<double> harmonic_conjugate_circle(const std::vector<double>& u) {
    const int na = static_cast<int>(u.size());
    std::vector<cplx> a(u.begin(), u.end());
    fft::fwd(a);
    for (int k = 0; k < na; ++k) {
        const int f = fft::freq(k, na);
        if (f > 0)
            a[k] *= cplx(0.0, -1.0);
        else if (f < 0)
            a[k] *= cplx(0.0, 1.0);
        else
            a[k] = 0.0;
        if (na % 2 == 0 && k == na / 2) a[k] = 0.0;
    }
    fft::inv(a);
    std::vector<double> v(na);
    for (int k = 0; k < na; ++k) v[k] = a[k].real();
    return v;
}

cplx eval_holo(const std::vector<cplx>& coef, cplx tau) {
    cplx val = 0.0;
    for (std::size_t k = coef.size(); k-- > 0;) val = val * tau + coef[k];
    return val;
}

cplx eval_holo_deriv(const std::vector<cplx>& coef, cplx tau) {
    cplx val = 0.0;
    for (std::size_t k = coef.size(); k-- > 1;) val = val * tau + static_cast<double>(k) * coef[k];
    return val;
}

std::vector<cplx> holo_boundary_values(const std::vector<cplx>& coef, int na) {
    std::vector<cplx> a(static_cast<std::size_t>(na), 0.0);
    for (std::size_t k = 0; k < coef.size() && k < a.size(); ++k) a[k] = coef[k] * static_cast<double>(na);
    fft::inv(a);
    return a;
}

std::vector<double> harmonic_extension_disc(const DiscMesh& mesh, const std::vector<double>& u) {
    const int na = mesh.na(), nr = mesh.nr();
    std::vector<cplx> a(u.begin(), u.end());
    fft::fwd(a);
    const double s = 1.0 / na;
    std::vector<double> out(mesh.nodes());
    std::vector<cplx> ring(static_cast<std::size_t>(na));
    for (int i = 0; i < nr; ++i) {
        const double r = mesh.r_of(i);
        for (int k = 0; k < na; ++k) {
            const int f = fft::freq(k, na);
            ring[k] = a[k] * s * std::pow(r, std::abs(f)) * static_cast<double>(na);
        }
        fft::inv(ring);
        for (int j = 0; j < na; ++j) out[mesh.at(i, j)] = ring[j].real();
    }
    return out;
}

// ------------------------------- RH families --------------------------------

cplx RHFamily::eval_f(cplx tau, int ix, int iy) const {
    const std::size_t tb = tg.at(ix, iy), T = tg.size();
    cplx val = 0.0;
    for (std::size_t k = nmodes(); k-- > 0;) val = val * tau + fcoef[k * T + tb];
    return val;
}
cplx RHFamily::eval_h(cplx tau, int ix, int iy) const {
    const std::size_t tb = tg.at(ix, iy), T = tg.size();
    cplx val = 0.0;
    for (std::size_t k = nmodes(); k-- > 0;) val = val * tau + hcoef[k * T + tb];
    return val;
}
cplx RHFamily::eval_f_dtau(cplx tau, int ix, int iy) const {
    const std::size_t tb = tg.at(ix, iy), T = tg.size();
    cplx val = 0.0;
    for (std::size_t k = nmodes(); k-- > 1;) val = val * tau + static_cast<double>(k) * fcoef[k * T + tb];
    return val;
}

RHFamily rh_family_solve(const CBDisc& b, const CTorus& A, const CTorus& S) {
    const TorusGrid tg = b.tg;
    require(A.grid == tg && S.grid == tg, "rh_family_solve: grids differ");
    const int na = b.na;
    require(na % 4 == 0, "rh_family_solve: na must be divisible by 4");
    const int base_j = 3 * na / 4;  // tau = -i
    for (const cplx& a : A.v)
        require(std::abs(a) > 1e-10, "A not invertible");

    RHFamily fam;
    fam.na = na;
    fam.tg = tg;
    fam.fcoef.assign(fam.nmodes() * tg.size(), 0.0);
    fam.hcoef.assign(fam.nmodes() * tg.size(), 0.0);
    fam.f_bd = CBDisc(na, tg);
    fam.h_bd = CBDisc(na, tg);

    parallel_for(tg.size(), [&](std::size_t tb) {
        std::vector<double> u1(na), u2(na);
        for (int j = 0; j < na; ++j) {
            const cplx bb = b.v[static_cast<std::size_t>(j) * tg.size() + tb];
            u1[j] = bb.real();
            u2[j] = bb.imag();
        }
        const cplx b0 = b.v[static_cast<std::size_t>(base_j) * tg.size() + tb];
        // g1(-i) = b(-i), g2(-i) = -i b(-i)
        std::vector<cplx> g1 = holo_complete_circle(u1, base_j, b0.imag());
        std::vector<cplx> g2 = holo_complete_circle(u2, base_j, -b0.real());
        const cplx Av = A.v[tb], Sv = S.v[tb];
        const std::size_t T = tg.size();
        for (std::size_t k = 0; k < fam.nmodes(); ++k) {
            const cplx fk = (g1[k] - I * g2[k]) / (2.0 * std::conj(Av));
            fam.fcoef[k * T + tb] = fk;
            fam.hcoef[k * T + tb] = Sv * fk - 0.5 * (g1[k] + I * g2[k]);
        }
    });

    // boundary values via inverse transforms, slice-parallel over torus nodes
    parallel_for(tg.size(), [&](std::size_t tb) {
        const std::size_t T = tg.size();
        std::vector<cplx> cf(fam.nmodes()), ch(fam.nmodes());
        for (std::size_t k = 0; k < fam.nmodes(); ++k) {
            cf[k] = fam.fcoef[k * T + tb];
            ch[k] = fam.hcoef[k * T + tb];
        }
        std::vector<cplx> fb = holo_boundary_values(cf, na);
        std::vector<cplx> hb = holo_boundary_values(ch, na);
        for (int j = 0; j < na; ++j) {
            fam.f_bd.v[static_cast<std::size_t>(j) * T + tb] = fb[j];
            fam.h_bd.v[static_cast<std::size_t>(j) * T + tb] = hb[j];
        }
    });
    // exact zero at the base point
    for (std::size_t tb = 0; tb < tg.size(); ++tb)
        fam.f_bd.v[static_cast<std::size_t>(base_j) * tg.size() + tb] = 0.0;
    return fam;
}

double rh_dbar_residual(const RHFamily& fam, int nsamples) {
    Rng rng(0xdbab5eedULL);
    double worst = 0.0;
    const double h = 1e-3;
    for (int s = 0; s < nsamples; ++s) {
        const double r = 0.1 + 0.8 * rng.next_unit();
        const double a = 2.0 * PI * rng.next_unit();
        const cplx tau = r * std::exp(I * a);
        const int ix = static_cast<int>(rng.next_u64() % fam.tg.nx);
        const int iy = static_cast<int>(rng.next_u64() % fam.tg.ny);
        auto dbar = [&](auto&& eval) {
            // 4th-order: d/dx and d/dy of eval at tau
            auto fx = [&](double d) { return eval(tau + cplx(d, 0.0)); };
            auto fy = [&](double d) { return eval(tau + cplx(0.0, d)); };
            const cplx ux = (-fx(2 * h) + 8.0 * fx(h) - 8.0 * fx(-h) + fx(-2 * h)) / (12.0 * h);
            const cplx uy = (-fy(2 * h) + 8.0 * fy(h) - 8.0 * fy(-h) + fy(-2 * h)) / (12.0 * h);
            return 0.5 * (ux + I * uy);
        };
        worst = std::max(worst, std::abs(dbar([&](cplx t) { return fam.eval_f(t, ix, iy); })));
        worst = std::max(worst, std::abs(dbar([&](cplx t) { return fam.eval_h(t, ix, iy); })));
    }
    return worst;
}

// ------------------------------ long strip ----------------------------------

double barrier_delta(double Theta) {
    require(Theta > 4.0, "barrier_delta: Theta must exceed 4");
    return 2.0 * std::cosh(PI) / std::cosh(PI * Theta / 2.0);
}

std::vector<double> s_extend_boundary_values(const RWindow& phi, const StripMesh& mesh) {
    const double Theta = mesh.curve().Theta;
    const TorusGrid& tg = phi.grid.tg;
    const auto& bpts = mesh.boundary();
    std::vector<double> out(bpts.size() * tg.size(), 0.0);
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double th = bpts[b].theta, t = bpts[b].t;
        if (std::abs(th) <= Theta) continue;  // zero on the straight part
        const double th_src = (th > 0) ? th - (Theta - 1.0) : th + (Theta - 1.0);
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix)
                out[b * tg.size() + tg.at(ix, iy)] =
                    window_planar_eval_node(phi, th_src, t, ix, iy);
    }
    return out;
}

RWindow strip_harmonic(const RWindow& F, const std::shared_ptr<const StripMesh>& mesh,
                       DecayCertificate* cert) {
    const StripMesh& m = *mesh;
    require(m.curve().Theta > 4.0, "strip_harmonic: Theta must exceed 4");
    require(window_boundary_sup(F) < 1e-9, "strip_harmonic: F must vanish on {t=0,1}");
    const TorusGrid& tg = F.grid.tg;
    std::vector<double> g = s_extend_boundary_values(F, m);
    StripField<double> zero_rhs;  // empty => zero
    StripField<double> H = poisson_family_solve(mesh, zero_rhs, g, tg);
    RWindow out = restrict_to_window(H, F.grid);
    if (cert) {
        cert->Theta = m.curve().Theta;
        cert->delta = barrier_delta(m.curve().Theta);
        const double f0 = sup_norm(F);
        cert->measured_ratio = (f0 > 0.0) ? sup_norm(out) / f0 : 0.0;
    }
    return out;
}

RWindow restrict_to_window(const StripField<double>& f, const WindowGrid& wg) {
    const StripMesh& m = *f.mesh;
    RWindow out(wg);
    require(wg.tg == f.tg, "restrict_to_window: torus grids differ");
    const double h = m.h();
    require(std::abs(wg.hth() - h) < 1e-12 && std::abs(wg.ht() - h) < 1e-12,
            "restrict_to_window: window must match the mesh lattice");
    for (int i = 0; i <= wg.nt; ++i) {
        for (int j = 0; j <= wg.nth; ++j) {
            const int mj = m.col_of(wg.theta(j));
            const int mi = static_cast<int>(std::lround(wg.t(i) / h));
            const std::size_t src = m.lat(mj, mi) * f.tg.size();
            const std::size_t dst = (static_cast<std::size_t>(i) * (wg.nth + 1) + j) * f.tg.size();
            std::copy(f.lattice.begin() + src, f.lattice.begin() + src + f.tg.size(),
                      out.v.begin() + dst);
        }
    }
    return out;
}

// -------------------- holomorphic completion on the strip -------------------

namespace {

struct LatticeView {
    const StripMesh& m;
    const std::vector<double>& u_int;
    const std::vector<double>& g;

    bool has(int j, int i) const {
        if (j < 0 || j >= m.ncols() || i < 0 || i > m.nt()) return false;
        return m.interior_index(j, i) >= 0 || m.boundary_point_of_node(j, i) >= 0;
    }
    double at(int j, int i) const {
        const int k = m.interior_index(j, i);
        if (k >= 0) return u_int[k];
        const int b = m.boundary_point_of_node(j, i);
        require(b >= 0, "LatticeView: node outside domain");
        return g[b];
    }
    // derivative along theta (axis=0) or t (axis=1) at an interior node,
    // cut-aware via the Shortley-Weller stencil arms.
    double deriv(int j, int i, int axis) const {
        const double h = m.h();
        const int k = m.interior_index(j, i);
        require(k >= 0, "LatticeView::deriv: not interior");
        const auto& st = m.stencil(k);
        const auto& L = st.arm[2 * axis];      // W or S
        const auto& R = st.arm[2 * axis + 1];  // E or N
        const double a = L.frac * h, bb = R.frac * h;
        const double uL = (L.interior >= 0) ? u_int[L.interior] : g[L.bp];
        const double uR = (R.interior >= 0) ? u_int[R.interior] : g[R.bp];
        const double u0 = u_int[k];
        return (-bb / (a * (a + bb))) * uL + ((bb - a) / (a * bb)) * u0 +
               (a / (bb * (a + bb))) * uR;
    }
    // one-sided t-derivative at a bottom/top row node from three rows
    double dt_row(int j, int i) const {
        const double h = m.h();
        if (i == 0)
            return (-3.0 * at(j, 0) + 4.0 * at(j, 1) - at(j, 2)) / (2.0 * h);
        return (3.0 * at(j, m.nt()) - 4.0 * at(j, m.nt() - 1) + at(j, m.nt() - 2)) / (2.0 * h);
    }
    // theta-derivative along a boundary row (from the data itself)
    double dth_row(int j, int i) const {
        const double h = m.h();
        if (has(j - 1, i) && has(j + 1, i)) return (at(j + 1, i) - at(j - 1, i)) / (2.0 * h);
        if (has(j + 1, i) && has(j + 2, i))
            return (-3.0 * at(j, i) + 4.0 * at(j + 1, i) - at(j + 2, i)) / (2.0 * h);
        return (3.0 * at(j, i) - 4.0 * at(j - 1, i) + at(j - 2, i)) / (2.0 * h);
    }
};

}  // namespace

HoloStrip holo_complete_strip(const StripMesh& m, const std::vector<double>& g, int base_bp,
                              double im_target) {
    require(g.size() == m.boundary().size(), "holo_complete_strip: boundary size");
    HoloStrip out;
    out.u_int = m.solve(std::vector<double>(m.interior_count(), 0.0), g);
    out.u_b = g;
    out.v_int.assign(m.interior_count(), std::numeric_limits<double>::quiet_NaN());
    out.v_b.assign(g.size(), std::numeric_limits<double>::quiet_NaN());

    LatticeView U{m, out.u_int, g};
    const double h = m.h();
    const int jc = m.col_of(0.0);
    const int nt = m.nt();

    // CR in tau = t + i theta:  v_t = -u_theta,  v_theta = u_t.
    std::vector<double> vlat(m.lattice_size(), std::numeric_limits<double>::quiet_NaN());
    auto vset = [&](int j, int i, double val) { vlat[m.lat(j, i)] = val; };
    auto vat = [&](int j, int i) { return vlat[m.lat(j, i)]; };

    // base point: bottom row, theta = 0
    require(m.boundary_point_of_node(jc, 0) == base_bp,
            "holo_complete_strip: base point must be (t=0, theta=0)");
    vset(jc, 0, im_target);

    // bottom row both ways: v_theta = u_t
    const int jW = m.col_of(-m.curve().Theta), jE = m.col_of(m.curve().Theta);
    for (int j = jc + 1; j <= jE; ++j)
        vset(j, 0, vat(j - 1, 0) + 0.5 * h * (U.dt_row(j - 1, 0) + U.dt_row(j, 0)));
    for (int j = jc - 1; j >= jW; --j)
        vset(j, 0, vat(j + 1, 0) - 0.5 * h * (U.dt_row(j + 1, 0) + U.dt_row(j, 0)));

    // center column upward: v_t = -u_theta
    for (int i = 1; i < nt; ++i) {
        const double dlo = (i == 1) ? U.dth_row(jc, 0) : U.deriv(jc, i - 1, 0);
        const double dhi = U.deriv(jc, i, 0);
        vset(jc, i, vat(jc, i - 1) - 0.5 * h * (dlo + dhi));
    }
    vset(jc, nt, vat(jc, nt - 1) - 0.5 * h * (U.deriv(jc, nt - 1, 0) + U.dth_row(jc, nt)));

    // top row both ways
    for (int j = jc + 1; j <= jE; ++j)
        vset(j, nt, vat(j - 1, nt) + 0.5 * h * (U.dt_row(j - 1, nt) + U.dt_row(j, nt)));
    for (int j = jc - 1; j >= jW; --j)
        vset(j, nt, vat(j + 1, nt) - 0.5 * h * (U.dt_row(j + 1, nt) + U.dt_row(j, nt)));

    // interior rows east/west of the center column
    for (int i = 1; i < nt; ++i) {
        for (int j = jc + 1; m.interior_index(j, i) >= 0; ++j)
            vset(j, i, vat(j - 1, i) + 0.5 * h * (U.deriv(j - 1, i, 1) + U.deriv(j, i, 1)));
        for (int j = jc - 1; m.interior_index(j, i) >= 0; --j)
            vset(j, i, vat(j + 1, i) - 0.5 * h * (U.deriv(j + 1, i, 1) + U.deriv(j, i, 1)));
    }

    for (int k = 0; k < m.interior_count(); ++k) {
        const auto [j, i] = m.interior_node(k);
        out.v_int[k] = vat(j, i);
    }

    // boundary values: rows directly, caps from the nearest interior node
    const auto& bpts = m.boundary();
    for (std::size_t b = 0; b < bpts.size(); ++b) {
        const double th = bpts[b].theta, t = bpts[b].t;
        if (t == 0.0 || t == 1.0) {
            out.v_b[b] = vat(m.col_of(th), t == 0.0 ? 0 : nt);
            continue;
        }
        const double ti_real = t / h;
        const bool horizontal = std::abs(ti_real - std::lround(ti_real)) < 1e-9;
        if (horizontal) {
            const int i = static_cast<int>(std::lround(ti_real));
            // march from the last interior node of row i on this side
            const int dir = (th > 0) ? 1 : -1;
            int j = m.col_of(dir * std::floor(std::abs(th) / h) * h);
            while (m.interior_index(j, i) < 0) j -= dir;
            const double d = std::abs(th - m.theta_of(j));
            const double ut0 = U.deriv(j, i, 1);
            const double ut1 = U.deriv(j - dir, i, 1);
            const double ut_cross = ut0 + (ut0 - ut1) * (d / h);  // linear extrapolation
            out.v_b[b] = vat(j, i) + dir * d * 0.5 * (ut0 + ut_cross);
        } else {
            const int j = m.col_of(th);
            // nearest interior node in the column
            const bool lower = (t < 0.5);
            int i = lower ? static_cast<int>(std::ceil(ti_real - 1e-12))
                          : static_cast<int>(std::floor(ti_real + 1e-12));
            int guard = 0;
            while (m.interior_index(j, i) < 0 && guard++ < nt) i += lower ? 1 : -1;
            require(m.interior_index(j, i) >= 0, "holo_complete_strip: cap column empty");
            const double d = t - m.t_of(i);
            const double uth0 = U.deriv(j, i, 0);
            out.v_b[b] = vat(j, i) - d * uth0;
        }
    }
    return out;
}

}  // namespace hcma
