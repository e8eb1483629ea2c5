#include "hcma/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace hcma {

double eta_cutoff(double t) {
    return smoothstep7((std::abs(t) - 1.0 / 6.0) * 6.0);
}

RTorus smooth(const RTorus& f, double Q) {
    require(Q >= 1.0, "smooth: Q must be >= 1");
    const TorusGrid& g = f.grid;
    std::vector<cplx> a(f.v.begin(), f.v.end());
    fft::fwd2(a, g.nx, g.ny);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double kx = fft::freq(ix, g.nx) * 2.0 * PI / g.period;
            const double ky = fft::freq(iy, g.ny) * 2.0 * PI / g.period;
            a[g.at(ix, iy)] *= lowpass_symbol(std::hypot(kx, ky) / Q);
        }
    fft::inv2(a, g.nx, g.ny);
    RTorus out(g);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = a[i].real();
    return out;
}

namespace {

// 4D box field: planar (i over Nt rows, j over Nth cols) x torus; periodic in
// all four axes. Transforms are done as nested 2D FFTs.
struct Box4 {
    int nth = 0, nt = 0;
    TorusGrid tg;
    double Lth = 0.0, Lt = 0.0;
    std::vector<cplx> v;
    std::size_t at(int j, int i, std::size_t tb) const {
        return (static_cast<std::size_t>(i) * nth + j) * tg.size() + tb;
    }
};

void box_fft(Box4& b, bool forward) {
    for (int i = 0; i < b.nt; ++i)
        for (int j = 0; j < b.nth; ++j) {
            std::vector<cplx> slice(b.tg.size());
            const std::size_t base = b.at(j, i, 0);
            std::copy(b.v.begin() + base, b.v.begin() + base + b.tg.size(), slice.begin());
            forward ? fft::fwd2(slice, b.tg.nx, b.tg.ny) : fft::inv2(slice, b.tg.nx, b.tg.ny);
            std::copy(slice.begin(), slice.end(), b.v.begin() + base);
        }
    std::vector<cplx> plane(static_cast<std::size_t>(b.nt) * b.nth);
    for (std::size_t tb = 0; tb < b.tg.size(); ++tb) {
        for (int i = 0; i < b.nt; ++i)
            for (int j = 0; j < b.nth; ++j)
                plane[static_cast<std::size_t>(i) * b.nth + j] = b.v[b.at(j, i, tb)];
        forward ? fft::fwd2(plane, b.nth, b.nt) : fft::inv2(plane, b.nth, b.nt);
        for (int i = 0; i < b.nt; ++i)
            for (int j = 0; j < b.nth; ++j)
                b.v[b.at(j, i, tb)] = plane[static_cast<std::size_t>(i) * b.nth + j];
    }
}

void box_lowpass(Box4& b, double Q) {
    box_fft(b, true);
    for (int i = 0; i < b.nt; ++i)
        for (int j = 0; j < b.nth; ++j) {
            const double kth = fft::freq(j, b.nth) * 2.0 * PI / b.Lth;
            const double kt = fft::freq(i, b.nt) * 2.0 * PI / b.Lt;
            for (int iy = 0; iy < b.tg.ny; ++iy)
                for (int ix = 0; ix < b.tg.nx; ++ix) {
                    const double kx = fft::freq(ix, b.tg.nx) * 2.0 * PI / b.tg.period;
                    const double ky = fft::freq(iy, b.tg.ny) * 2.0 * PI / b.tg.period;
                    const double kk = std::sqrt(kx * kx + ky * ky + kth * kth + kt * kt);
                    b.v[b.at(j, i, b.tg.at(ix, iy))] *= lowpass_symbol(kk / Q);
                }
        }
    box_fft(b, false);
}

}  // namespace

RWindow smooth(const RWindow& f, double Q) {
    require(Q >= 1.0, "smooth: Q must be >= 1");
    const WindowGrid& g = f.grid;
    Box4 b;
    b.nth = 2 * g.nth;
    b.nt = 2 * g.nt;
    b.tg = g.tg;
    b.Lth = 2.0 * (g.th1 - g.th0);
    b.Lt = 2.0 * (g.t1 - g.t0);
    b.v.assign(static_cast<std::size_t>(b.nth) * b.nt * g.tg.size(), 0.0);
    auto refl = [](int k, int n) { return (k <= n) ? k : 2 * n - k; };
    for (int i = 0; i < b.nt; ++i)
        for (int j = 0; j < b.nth; ++j)
            for (std::size_t tb = 0; tb < g.tg.size(); ++tb)
                b.v[b.at(j, i, tb)] =
                    f.v[(static_cast<std::size_t>(refl(i, g.nt)) * (g.nth + 1) + refl(j, g.nth)) *
                            g.tg.size() +
                        tb];
    box_lowpass(b, Q);
    RWindow out(g);
    for (int i = 0; i <= g.nt; ++i)
        for (int j = 0; j <= g.nth; ++j)
            for (std::size_t tb = 0; tb < g.tg.size(); ++tb)
                out.v[(static_cast<std::size_t>(i) * (g.nth + 1) + j) * g.tg.size() + tb] =
                    b.v[b.at(j % b.nth, i % b.nt, tb)].real();
    return out;
}

VanishingSmoothParts smooth_vanishing_parts(const RWindow& phi, double N, double tol) {
    require(N >= 1.0, "smooth_vanishing: N must be >= 1");
    const WindowGrid& g = phi.grid;
    require(window_boundary_sup(phi) <= tol,
            "smooth_vanishing: input does not vanish on {t=0,1}");

    const double h_th = g.hth(), h_t = g.ht();
    // margin box {-3<theta<3} x {-1<t<2}; window lattice extends exactly when
    // nth is even (so that 1.5*nth is integral).
    require(g.th0 == -2.0 && g.th1 == 2.0 && g.t0 == 0.0 && g.t1 == 1.0,
            "smooth_vanishing: expects the canonical window [-2,2]x[0,1]");
    require(g.nth % 4 == 0, "smooth_vanishing: nth must be divisible by 4");
    Box4 b;
    b.nth = g.nth + g.nth / 2;  // 6 / h_th
    b.nt = 3 * g.nt;            // 3 / h_t
    b.tg = g.tg;
    b.Lth = 6.0;
    b.Lt = 3.0;
    b.v.assign(static_cast<std::size_t>(b.nth) * b.nt * g.tg.size(), 0.0);

    auto reflect_theta = [&](double th) {
        if (th > 2.0) return 4.0 - th;
        if (th < -2.0) return -4.0 - th;
        return th;
    };
    auto reflect_t = [&](double t) {
        if (t < 0.0) return -t;
        if (t > 1.0) return 2.0 - t;
        return t;
    };
    auto chi_theta = [](double th) { return smoothstep7((std::abs(th) - 2.0) / 0.9); };
    auto chi_t = [](double t) {
        const double d = (t < 0.0) ? -t : (t > 1.0 ? t - 1.0 : 0.0);
        return smoothstep7(d / 0.9);
    };

    for (int i = 0; i < b.nt; ++i) {
        const double t = -1.0 + i * h_t;
        const double rt = reflect_t(t);
        const int ri = static_cast<int>(std::lround((rt - g.t0) / h_t));
        for (int j = 0; j < b.nth; ++j) {
            const double th = -3.0 + j * h_th;
            const double rth = reflect_theta(th);
            const int rj = static_cast<int>(std::lround((rth - g.th0) / h_th));
            const double w = chi_theta(th) * chi_t(t);
            if (w == 0.0) continue;
            const std::size_t src =
                (static_cast<std::size_t>(ri) * (g.nth + 1) + rj) * g.tg.size();
            for (std::size_t tb = 0; tb < g.tg.size(); ++tb)
                b.v[b.at(j, i, tb)] = w * phi.v[src + tb];
        }
    }

    box_lowpass(b, N);

    // traces at t=0 (box row i0) and t=1 (row i1)
    const int i0 = g.nt;      // t = -1 + nt*h = 0
    const int i1 = 2 * g.nt;  // t = 1
    VanishingSmoothParts parts;
    auto make_trace = [&](int irow) {
        Tensor tr;
        tr.ax = {{b.nth, h_th, false}, {g.tg.ny, g.tg.hy(), true}, {g.tg.nx, g.tg.hx(), true}};
        tr.re.resize(static_cast<std::size_t>(b.nth) * g.tg.size());
        for (int j = 0; j < b.nth; ++j)
            for (std::size_t tb = 0; tb < g.tg.size(); ++tb)
                tr.re[static_cast<std::size_t>(j) * g.tg.size() + tb] =
                    b.v[b.at(j, irow, tb)].real();
        return tr;
    };
    parts.trace0 = make_trace(i0);
    parts.trace1 = make_trace(i1);

    RWindow out(g);
    const int joff = g.nth / 4;  // box column of theta = -2 is (-2-(-3))/h_th = nth/4
    for (int i = 0; i <= g.nt; ++i) {
        const double t = g.t0 + i * h_t;
        const int bi = g.nt + i;  // box row of t
        const double e0 = eta_cutoff(t), e1 = eta_cutoff(1.0 - t);
        for (int j = 0; j <= g.nth; ++j) {
            const int bj = joff + j;
            for (std::size_t tb = 0; tb < g.tg.size(); ++tb) {
                const double val = b.v[b.at(bj % b.nth, bi % b.nt, tb)].real();
                const double tr0 = b.v[b.at(bj % b.nth, i0, tb)].real();
                const double tr1 = b.v[b.at(bj % b.nth, i1, tb)].real();
                out.v[(static_cast<std::size_t>(i) * (g.nth + 1) + j) * g.tg.size() + tb] =
                    val - e0 * tr0 - e1 * tr1;
            }
        }
    }
    parts.out = std::move(out);
    return parts;
}

RWindow smooth_vanishing(const RWindow& phi, double N, double tol) {
    return smooth_vanishing_parts(phi, N, tol).out;
}

}  // namespace hcma
