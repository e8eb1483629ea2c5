#include "hcma/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hcma {

// ------------------------------- adapters ----------------------------------

Tensor as_tensor(const RTorus& f) {
    Tensor t;
    t.ax = {{f.grid.ny, f.grid.hy(), true}, {f.grid.nx, f.grid.hx(), true}};
    t.re = f.v;
    return t;
}
Tensor as_tensor(const CTorus& f) {
    Tensor t;
    t.ax = {{f.grid.ny, f.grid.hy(), true}, {f.grid.nx, f.grid.hx(), true}};
    t.re.resize(f.v.size());
    t.im.resize(f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        t.re[i] = f.v[i].real();
        t.im[i] = f.v[i].imag();
    }
    return t;
}
Tensor as_tensor(const RWindow& f) {
    Tensor t;
    t.ax = {{f.grid.nt + 1, f.grid.ht(), false},
            {f.grid.nth + 1, f.grid.hth(), false},
            {f.grid.tg.ny, f.grid.tg.hy(), true},
            {f.grid.tg.nx, f.grid.tg.hx(), true}};
    t.re = f.v;
    // stored layout is (t, theta, y, x) already: v[( i*(nth+1)+j )*T + iy*nx+ix]
    return t;
}
Tensor as_tensor(const PathField& f) {
    Tensor t;
    t.ax = {{f.grid.nt + 1, f.grid.ht(), false},
            {f.grid.tg.ny, f.grid.tg.hy(), true},
            {f.grid.tg.nx, f.grid.tg.hx(), true}};
    t.re = f.v;
    return t;
}
Tensor as_tensor(const RBDisc& f) {
    Tensor t;
    t.ax = {{f.na, 2.0 * PI / f.na, true},
            {f.tg.ny, f.tg.hy(), true},
            {f.tg.nx, f.tg.hx(), true}};
    t.re = f.v;
    return t;
}
Tensor as_tensor(const CBDisc& f) {
    Tensor t;
    t.ax = {{f.na, 2.0 * PI / f.na, true},
            {f.tg.ny, f.tg.hy(), true},
            {f.tg.nx, f.tg.hx(), true}};
    t.re.resize(f.v.size());
    t.im.resize(f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        t.re[i] = f.v[i].real();
        t.im[i] = f.v[i].imag();
    }
    return t;
}

namespace {

std::vector<std::size_t> strides_of(const Tensor& t) {
    std::vector<std::size_t> s(t.ax.size());
    std::size_t acc = 1;
    for (int a = static_cast<int>(t.ax.size()) - 1; a >= 0; --a) {
        s[a] = acc;
        acc *= t.ax[a].n;
    }
    return s;
}

bool axis_invariant(const Tensor& t, int axis) {
    const auto strides = strides_of(t);
    const std::size_t stride = strides[axis];
    const int n = t.ax[axis].n;
    const std::size_t total = t.size();
    for (std::size_t i = 0; i < total; ++i) {
        // position along axis
        const std::size_t k = (i / stride) % n;
        if (k == 0) continue;
        const std::size_t base = i - k * stride;
        if (t.re[i] != t.re[base]) return false;
        if (!t.im.empty() && t.im[i] != t.im[base]) return false;
    }
    return true;
}

}  // namespace

Tensor collapse_invariant_axes(Tensor t) {
    for (int axis = static_cast<int>(t.ax.size()) - 1; axis >= 0; --axis) {
        if (t.ax[axis].n <= 1 || !axis_invariant(t, axis)) continue;
        const auto strides = strides_of(t);
        const std::size_t stride = strides[axis];
        const int n = t.ax[axis].n;
        Tensor out;
        out.ax = t.ax;
        out.ax.erase(out.ax.begin() + axis);
        const std::size_t outer = t.size() / (stride * n);
        out.re.reserve(t.size() / n);
        if (!t.im.empty()) out.im.reserve(t.size() / n);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t s = 0; s < stride; ++s) {
                out.re.push_back(t.re[o * stride * n + s]);
                if (!t.im.empty()) out.im.push_back(t.im[o * stride * n + s]);
            }
        t = std::move(out);
    }
    if (t.ax.empty()) t.ax = {{1, 1.0, false}};
    return t;
}

namespace {

// centered 2nd-order first derivative along one axis; one-sided at ends of
// non-periodic axes.
std::vector<double> d1_axis(const std::vector<double>& v, const std::vector<AxisDesc>& ax,
                            const std::vector<std::size_t>& strides, int axis) {
    std::vector<double> out(v.size());
    const int n = ax[axis].n;
    const double h = ax[axis].h;
    const std::size_t stride = strides[axis];
    const std::size_t total = v.size();
    if (n < 3) {  // too short; derivative treated as 0 (constant axes are collapsed earlier)
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t k = (i / stride) % n;
        const std::size_t base = i - k * stride;
        auto at = [&](long kk) -> double {
            if (ax[axis].periodic) kk = ((kk % n) + n) % n;
            return v[base + static_cast<std::size_t>(kk) * stride];
        };
        double d;
        if (!ax[axis].periodic && k == 0)
            d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        else if (!ax[axis].periodic && k == static_cast<std::size_t>(n - 1))
            d = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
        else
            d = (at(static_cast<long>(k) + 1) - at(static_cast<long>(k) - 1)) / (2.0 * h);
        out[i] = d;
    }
    return out;
}

struct CTensorView {
    std::vector<double> re, im;
    bool cplx;
    double abs_at(std::size_t i) const {
        return cplx ? std::hypot(re[i], im[i]) : std::abs(re[i]);
    }
    double diff_abs(std::size_t i, std::size_t j) const {
        return cplx ? std::hypot(re[i] - re[j], im[i] - im[j]) : std::abs(re[i] - re[j]);
    }
};

double view_sup(const CTensorView& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.re.size(); ++i) m = std::max(m, v.abs_at(i));
    return m;
}

// deterministic pair seminorm of one derivative array
double pair_seminorm(const CTensorView& v, const std::vector<AxisDesc>& ax,
                     const std::vector<std::size_t>& strides, double alpha, long& pairs) {
    double best = 0.0;
    const std::size_t total = v.re.size();
    Rng rng(0x5eedULL);

    // along-axis pairs
    for (std::size_t axis = 0; axis < ax.size(); ++axis) {
        const int n = ax[axis].n;
        if (n < 2) continue;
        const double h = ax[axis].h;
        const double L = n * h;
        const std::size_t stride = strides[axis];
        const std::size_t nlines = total / n;
        // visit at most 256 lines, deterministic stride
        const std::size_t step = std::max<std::size_t>(1, nlines / 256);
        for (std::size_t line = 0; line < nlines; line += step) {
            // base index of this line
            const std::size_t lo = line % stride;
            const std::size_t hi = line / stride;
            const std::size_t base = hi * stride * n + lo;
            auto idx = [&](int k) { return base + static_cast<std::size_t>(k) * stride; };
            auto dist = [&](int a, int b) {
                double d = std::abs(a - b) * h;
                if (ax[axis].periodic) d = std::min(d, L - d);
                return d;
            };
            if (n <= 64) {
                for (int a = 0; a < n; ++a)
                    for (int b = a + 1; b < n; ++b) {
                        const double d = dist(a, b);
                        if (d <= 0.0) continue;
                        best = std::max(best, v.diff_abs(idx(a), idx(b)) / std::pow(d, alpha));
                        ++pairs;
                    }
            } else {
                // dyadic scales plus half-octave refinements
                std::vector<int> seps;
                for (int sep = 1; sep < n; sep *= 2) {
                    seps.push_back(sep);
                    const int half = sep + sep / 2;
                    if (sep >= 2 && half < n) seps.push_back(half);
                }
                for (int sep : seps) {
                    for (int s = 0; s < 48; ++s) {
                        const int a = static_cast<int>(rng.next_u64() % n);
                        int b = a + sep;
                        if (ax[axis].periodic)
                            b %= n;
                        else if (b >= n)
                            b = a - sep;
                        if (b < 0 || b == a) continue;
                        const double d = dist(a, b);
                        best = std::max(best, v.diff_abs(idx(a), idx(b)) / std::pow(d, alpha));
                        ++pairs;
                    }
                }
            }
        }
    }

    // stratified cross-direction pairs
    const int cross = 2048;
    std::vector<int> coord(ax.size()), coord2(ax.size());
    for (int c = 0; c < cross; ++c) {
        std::size_t i1 = 0, i2 = 0;
        double d2 = 0.0;
        for (std::size_t a = 0; a < ax.size(); ++a) {
            coord[a] = static_cast<int>(rng.next_u64() % ax[a].n);
            int off = static_cast<int>(rng.next_u64() % 7) - 3;
            int k2 = coord[a] + off;
            if (ax[a].periodic)
                k2 = ((k2 % ax[a].n) + ax[a].n) % ax[a].n;
            else
                k2 = std::clamp(k2, 0, ax[a].n - 1);
            coord2[a] = k2;
            double dd = std::abs(coord[a] - k2) * ax[a].h;
            if (ax[a].periodic) dd = std::min(dd, ax[a].n * ax[a].h - dd);
            d2 += dd * dd;
            i1 += static_cast<std::size_t>(coord[a]) * strides[a];
            i2 += static_cast<std::size_t>(k2) * strides[a];
        }
        if (d2 <= 0.0) continue;
        best = std::max(best, v.diff_abs(i1, i2) / std::pow(std::sqrt(d2), alpha));
        ++pairs;
    }
    return best;
}

}  // namespace

int max_fd_order(const Tensor& t) {
    int m = 1 << 20;
    for (const auto& a : t.ax)
        if (a.n > 1) m = std::min(m, a.periodic ? a.n - 1 : a.n - 2);
    return m;
}

NormReport holder_norm(const Tensor& t, HolderIndex r) {
    require(r.m >= 0 && r.alpha >= 0.0 && r.alpha < 1.0, "holder_norm: bad index");
    require(r.m <= max_fd_order(t),
            "insufficient resolution: grid too coarse for derivative order " + std::to_string(r.m));
    const auto strides = strides_of(t);
    NormReport rep;
    rep.index = r;

    // level sets of mixed derivatives, built by repeated first differences
    std::vector<std::vector<int>> level_idx;       // multi-index per entry
    std::vector<CTensorView> level;                // derivative arrays
    level_idx.push_back(std::vector<int>(t.ax.size(), 0));
    level.push_back(CTensorView{t.re, t.im, t.complex_valued()});

    double supmax = view_sup(level[0]);
    double semi = 0.0;
    long pairs = 0;
    if (r.m == 0 && r.alpha > 0.0) semi = pair_seminorm(level[0], t.ax, strides, r.alpha, pairs);

    for (int lvl = 1; lvl <= r.m; ++lvl) {
        std::vector<std::vector<int>> nidx;
        std::vector<CTensorView> nlevel;
        for (std::size_t e = 0; e < level.size(); ++e) {
            for (std::size_t a = 0; a < t.ax.size(); ++a) {
                // canonical ordering: only increment axis >= highest active axis
                int last = -1;
                for (int b = static_cast<int>(t.ax.size()) - 1; b >= 0; --b)
                    if (level_idx[e][b] > 0) { last = b; break; }
                if (static_cast<int>(a) < last) continue;
                if (t.ax[a].n <= 2) continue;
                CTensorView d;
                d.cplx = level[e].cplx;
                d.re = d1_axis(level[e].re, t.ax, strides, static_cast<int>(a));
                if (d.cplx) d.im = d1_axis(level[e].im, t.ax, strides, static_cast<int>(a));
                auto mi = level_idx[e];
                mi[a] += 1;
                supmax = std::max(supmax, view_sup(d));
                if (lvl == r.m && r.alpha > 0.0)
                    semi = std::max(semi, pair_seminorm(d, t.ax, strides, r.alpha, pairs));
                nidx.push_back(std::move(mi));
                nlevel.push_back(std::move(d));
            }
        }
        level_idx = std::move(nidx);
        level = std::move(nlevel);
    }

    rep.value = supmax + semi;
    rep.seminorm_pairs_sampled = pairs;
    return rep;
}

double interpolation_check(const Tensor& t, HolderIndex kappa, HolderIndex nu, HolderIndex rho) {
    require(kappa.value() <= nu.value() && nu.value() <= rho.value(),
            "interpolation_check: indices must be ordered");
    const double nk = holder_norm(t, kappa).value;
    const double nn = holder_norm(t, nu).value;
    const double nr = holder_norm(t, rho).value;
    if (nk == 0.0 || nr == 0.0) return 1.0;  // zero field convention
    const double num = std::pow(nn, rho.value() - kappa.value());
    const double den =
        std::pow(nk, rho.value() - nu.value()) * std::pow(nr, nu.value() - kappa.value());
    if (den == 0.0) return 1.0;
    return num / den;
}

namespace {
double log_surrogate_from_coeffs(const std::vector<cplx>& a, const std::vector<double>& kmag,
                                 double r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double m = std::abs(a[i]);
        if (m <= 0.0) continue;
        best = std::max(best, std::log(m) + r * std::log1p(kmag[i]));
    }
    return best;
}
}  // namespace

double log_spectral_surrogate(const RTorus& f, double r) {
    const TorusGrid& g = f.grid;
    std::vector<cplx> a(f.v.begin(), f.v.end());
    fft::fwd2(a, g.nx, g.ny);
    const double s = 1.0 / static_cast<double>(a.size());
    std::vector<double> kmag(a.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            a[g.at(ix, iy)] *= s;
            const double kx = fft::freq(ix, g.nx) * 2.0 * PI / g.period;
            const double ky = fft::freq(iy, g.ny) * 2.0 * PI / g.period;
            kmag[g.at(ix, iy)] = std::hypot(kx, ky);
        }
    return log_surrogate_from_coeffs(a, kmag, r);
}

double log_spectral_surrogate(const RWindow& f, double r) {
    const WindowGrid& g = f.grid;
    // even reflection in t and theta, then 4D transform
    const int Nt = 2 * g.nt, Nth = 2 * g.nth;
    const TorusGrid& tg = g.tg;
    std::vector<cplx> a(static_cast<std::size_t>(Nt) * Nth * tg.size());
    auto refl = [](int k, int n) { return (k <= n) ? k : 2 * n - k; };
    for (int i = 0; i < Nt; ++i)
        for (int j = 0; j < Nth; ++j)
            for (int iy = 0; iy < tg.ny; ++iy)
                for (int ix = 0; ix < tg.nx; ++ix)
                    a[((static_cast<std::size_t>(i) * Nth + j) * tg.size()) + tg.at(ix, iy)] =
                        f.at(refl(j, g.nth), refl(i, g.nt), ix, iy);
    // transform axis by axis: treat as nested loops with 1D FFTs; easiest is
    // a sequence of reshaped 2D transforms. Do torus 2D first per (i,j):
    for (int i = 0; i < Nt; ++i)
        for (int j = 0; j < Nth; ++j) {
            std::vector<cplx> slice(tg.size());
            const std::size_t base = (static_cast<std::size_t>(i) * Nth + j) * tg.size();
            std::copy(a.begin() + base, a.begin() + base + tg.size(), slice.begin());
            fft::fwd2(slice, tg.nx, tg.ny);
            std::copy(slice.begin(), slice.end(), a.begin() + base);
        }
    // then the (i,j) axes per torus bin
    std::vector<cplx> plane(static_cast<std::size_t>(Nt) * Nth);
    std::vector<double> kmag(a.size());
    const double Lth = 2.0 * (g.th1 - g.th0), Lt = 2.0 * (g.t1 - g.t0);
    std::vector<cplx> out(a.size());
    for (std::size_t tb = 0; tb < tg.size(); ++tb) {
        for (int i = 0; i < Nt; ++i)
            for (int j = 0; j < Nth; ++j)
                plane[static_cast<std::size_t>(i) * Nth + j] =
                    a[(static_cast<std::size_t>(i) * Nth + j) * tg.size() + tb];
        fft::fwd2(plane, Nth, Nt);
        for (int i = 0; i < Nt; ++i)
            for (int j = 0; j < Nth; ++j)
                out[(static_cast<std::size_t>(i) * Nth + j) * tg.size() + tb] =
                    plane[static_cast<std::size_t>(i) * Nth + j];
    }
    const double s = 1.0 / (static_cast<double>(Nt) * Nth * tg.size());
    const int nx = tg.nx, ny = tg.ny;
    for (int i = 0; i < Nt; ++i)
        for (int j = 0; j < Nth; ++j)
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix) {
                    const std::size_t id =
                        (static_cast<std::size_t>(i) * Nth + j) * tg.size() + tg.at(ix, iy);
                    out[id] *= s;
                    const double kx = fft::freq(ix, nx) * 2.0 * PI / tg.period;
                    const double ky = fft::freq(iy, ny) * 2.0 * PI / tg.period;
                    const double kth = fft::freq(j, Nth) * 2.0 * PI / Lth;
                    const double kt = fft::freq(i, Nt) * 2.0 * PI / Lt;
                    kmag[id] = std::sqrt(kx * kx + ky * ky + kth * kth + kt * kt);
                }
    return log_surrogate_from_coeffs(out, kmag, r);
}

}  // namespace hcma
