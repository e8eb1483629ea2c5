#ifndef HCMA_FIELDS_HPP
#define HCMA_FIELDS_HPP

#include <array>
#include <cmath>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hcma/base.hpp"
#include "hcma/fft.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// Torus grid. One complex dimension, two real coordinates (x,y), both
// periodic with the same period. nx and ny may differ; ny can be kept small
// when the data is exactly y-invariant (the trigonometric representation is
// then exact at any ny).
// ---------------------------------------------------------------------------
struct TorusGrid {
    int nx = 0, ny = 0;
    double period = 2.0 * PI;

    TorusGrid() = default;
    explicit TorusGrid(int points_per_dim, double period_ = 2.0 * PI)
        : nx(points_per_dim), ny(points_per_dim), period(period_) {}
    TorusGrid(int nx_, int ny_, double period_) : nx(nx_), ny(ny_), period(period_) {}

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    double hx() const { return period / nx; }
    double hy() const { return period / ny; }
    double x(int ix) const { return ix * hx(); }
    double y(int iy) const { return iy * hy(); }
    std::size_t at(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * nx + ix;
    }
    bool operator==(const TorusGrid& o) const {
        return nx == o.nx && ny == o.ny && period == o.period;
    }
};

template <class T>
struct TorusField {
    TorusGrid grid;
    std::vector<T> v;

    TorusField() = default;
    explicit TorusField(const TorusGrid& g, T fill = T{}) : grid(g), v(g.size(), fill) {}

    T& at(int ix, int iy) { return v[grid.at(ix, iy)]; }
    const T& at(int ix, int iy) const { return v[grid.at(ix, iy)]; }

    template <class F>
    static TorusField sample(const TorusGrid& g, F&& f) {
        TorusField out(g);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix) out.at(ix, iy) = f(g.x(ix), g.y(iy));
        return out;
    }
};

using RTorus = TorusField<double>;
using CTorus = TorusField<cplx>;

// Basic arithmetic helpers used throughout the solvers.
template <class T>
TorusField<T> operator+(TorusField<T> a, const TorusField<T>& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    return a;
}
template <class T>
TorusField<T> operator-(TorusField<T> a, const TorusField<T>& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
    return a;
}
template <class T, class S>
TorusField<T> operator*(S s, TorusField<T> a) {
    for (auto& x : a.v) x = s * x;
    return a;
}

double sup_norm(const std::vector<double>& v);
double sup_norm(const std::vector<cplx>& v);
template <class T>
double sup_norm(const TorusField<T>& f) { return sup_norm(f.v); }

// Spectral derivative d^ax/dx^ax d^ay/dy^ay of a torus field.
CTorus spectral_derivative(const CTorus& f, int ax, int ay);
RTorus spectral_derivative(const RTorus& f, int ax, int ay);
CTorus to_complex(const RTorus& f);
RTorus real_part(const CTorus& f);

/** Wirtinger d/dz = (d/dx - i d/dy)/2 of a real or complex torus field. */
CTorus dz(const CTorus& f);
CTorus dzbar(const CTorus& f);

// ---------------------------------------------------------------------------
// Arbitrary-point evaluation of the trigonometric interpolant.
//
// Values come from a Taylor expansion around the nearest grid node with
// spectrally exact derivative tables, so grid-aligned evaluation reproduces
// node values bitwise and off-node error is O((h/2)^{order+1}).
// ---------------------------------------------------------------------------
class TorusInterp {
  public:
    TorusInterp() = default;
    explicit TorusInterp(const CTorus& f, int order = 5);
    explicit TorusInterp(const RTorus& f, int order = 5);

    cplx operator()(double x, double y) const;
    /** Evaluate the (ax,ay) derivative of the interpolant. */
    cplx deriv(double x, double y, int ax, int ay) const;

    const TorusGrid& grid() const { return grid_; }

  private:
    TorusGrid grid_;
    int order_ = 5;
    // tables_[ay*(order+1)+ax] = D_x^ax D_y^ay f / (ax! ay!)
    std::vector<CTorus> tables_;
    void build(const CTorus& f);
};

/** Discrete map (tau,z) -> (tau, z + f(tau,z)) restricted to one tau-slice. */
struct TorusShift {
    TorusInterp dx_re;  // not used; placeholder for clarity
};

/** compose(f, map): values of f at z + disp(z); disp given on the same grid.
 *  Grid-aligned displacements reduce to exact index rolls. */
template <class T>
TorusField<T> compose_displacement(const TorusField<T>& f, const CTorus& disp, int order = 5);

/** compose by constant shift; exact index roll when the shift is grid aligned. */
template <class T>
TorusField<T> compose_shift(const TorusField<T>& f, double sx, double sy, int order = 5);

// ---------------------------------------------------------------------------
// Rectangle window grid: (theta,t) in [th0,th1]x[t0,t1], uniform spacing h,
// times a torus. Carrier for the window fields phi in F^rho.
// ---------------------------------------------------------------------------
struct WindowGrid {
    double th0 = -2.0, th1 = 2.0, t0 = 0.0, t1 = 1.0;
    int nth = 0, nt = 0;  // cell counts; node counts are nth+1, nt+1
    TorusGrid tg;

    WindowGrid() = default;
    WindowGrid(double th0_, double th1_, double t0_, double t1_, int nth_, int nt_,
               const TorusGrid& tg_)
        : th0(th0_), th1(th1_), t0(t0_), t1(t1_), nth(nth_), nt(nt_), tg(tg_) {}

    double hth() const { return (th1 - th0) / nth; }
    double ht() const { return (t1 - t0) / nt; }
    double theta(int j) const { return th0 + j * hth(); }
    double t(int i) const { return t0 + i * ht(); }
    std::size_t nodes() const {
        return static_cast<std::size_t>(nth + 1) * (nt + 1);
    }
    std::size_t size() const { return nodes() * tg.size(); }
    std::size_t at(int j, int i, int ix, int iy) const {
        return (static_cast<std::size_t>(i) * (nth + 1) + j) * tg.size() + tg.at(ix, iy);
    }
    bool operator==(const WindowGrid& o) const {
        return th0 == o.th0 && th1 == o.th1 && t0 == o.t0 && t1 == o.t1 && nth == o.nth &&
               nt == o.nt && tg == o.tg;
    }
};

template <class T>
struct WindowField {
    WindowGrid grid;
    std::vector<T> v;

    WindowField() = default;
    explicit WindowField(const WindowGrid& g, T fill = T{}) : grid(g), v(g.size(), fill) {}
    T& at(int j, int i, int ix, int iy) { return v[grid.at(j, i, ix, iy)]; }
    const T& at(int j, int i, int ix, int iy) const { return v[grid.at(j, i, ix, iy)]; }

    template <class F>
    static WindowField sample(const WindowGrid& g, F&& f) {
        WindowField out(g);
        for (int i = 0; i <= g.nt; ++i)
            for (int j = 0; j <= g.nth; ++j)
                for (int iy = 0; iy < g.tg.ny; ++iy)
                    for (int ix = 0; ix < g.tg.nx; ++ix)
                        out.at(j, i, ix, iy) = f(g.theta(j), g.t(i), g.tg.x(ix), g.tg.y(iy));
        return out;
    }
    /** One torus slice at planar node (j,i). */
    TorusField<T> slice(int j, int i) const {
        TorusField<T> s(grid.tg);
        const std::size_t base = (static_cast<std::size_t>(i) * (grid.nth + 1) + j) * grid.tg.size();
        std::copy(v.begin() + base, v.begin() + base + grid.tg.size(), s.v.begin());
        return s;
    }
};

using RWindow = WindowField<double>;

template <class T>
WindowField<T> operator+(WindowField<T> a, const WindowField<T>& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    return a;
}
template <class T>
WindowField<T> operator-(WindowField<T> a, const WindowField<T>& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
    return a;
}
template <class T, class S>
WindowField<T> operator*(S s, WindowField<T> a) {
    for (auto& x : a.v) x = s * x;
    return a;
}
template <class T>
double sup_norm(const WindowField<T>& f) { return sup_norm(f.v); }

/** Bicubic (Keys) interpolation of a window field in the planar coordinates,
 *  per torus node. t-ghosts use odd reflection (fields vanish on t=0,1 when
 *  used on F-space data), theta-ghosts linear extrapolation. */
TorusField<double> window_planar_eval(const RWindow& f, double theta, double t);
double window_planar_eval_node(const RWindow& f, double theta, double t, int ix, int iy);

/** max over {t=0,1} rows. */
double window_boundary_sup(const RWindow& f);

// ---------------------------------------------------------------------------
// Path field: t in [0,1] (uniform, nt+1 slices) x torus. Carrier for geodesic
// paths Psi(t, z).
// ---------------------------------------------------------------------------
struct PathGrid {
    int nt = 0;
    TorusGrid tg;
    double ht() const { return 1.0 / nt; }
    std::size_t size() const { return static_cast<std::size_t>(nt + 1) * tg.size(); }
    std::size_t at(int i, int ix, int iy) const {
        return static_cast<std::size_t>(i) * tg.size() + tg.at(ix, iy);
    }
};

struct PathField {
    PathGrid grid;
    std::vector<double> v;
    PathField() = default;
    explicit PathField(const PathGrid& g) : grid(g), v(g.size(), 0.0) {}
    double& at(int i, int ix, int iy) { return v[grid.at(i, ix, iy)]; }
    const double& at(int i, int ix, int iy) const { return v[grid.at(i, ix, iy)]; }
    RTorus slice(int i) const {
        RTorus s(grid.tg);
        std::copy(v.begin() + grid.at(i, 0, 0), v.begin() + grid.at(i, 0, 0) + grid.tg.size(),
                  s.v.begin());
        return s;
    }
};

// ---------------------------------------------------------------------------
// Boundary field on the unit circle x torus: values at angles 2*pi*j/na.
// ---------------------------------------------------------------------------
template <class T>
struct BDiscField {
    int na = 0;
    TorusGrid tg;
    std::vector<T> v;

    BDiscField() = default;
    BDiscField(int na_, const TorusGrid& tg_) : na(na_), tg(tg_), v(static_cast<std::size_t>(na_) * tg_.size(), T{}) {}
    double angle(int j) const { return 2.0 * PI * j / na; }
    std::size_t at(int j, int ix, int iy) const {
        return static_cast<std::size_t>(j) * tg.size() + tg.at(ix, iy);
    }
    template <class F>
    static BDiscField sample(int na_, const TorusGrid& g, F&& f) {
        BDiscField out(na_, g);
        for (int j = 0; j < na_; ++j)
            for (int iy = 0; iy < g.ny; ++iy)
                for (int ix = 0; ix < g.nx; ++ix)
                    out.v[out.at(j, ix, iy)] = f(2.0 * PI * j / na_, g.x(ix), g.y(iy));
        return out;
    }
    TorusField<T> slice(int j) const {
        TorusField<T> s(tg);
        std::copy(v.begin() + at(j, 0, 0), v.begin() + at(j, 0, 0) + tg.size(), s.v.begin());
        return s;
    }
    void set_slice(int j, const TorusField<T>& s) {
        std::copy(s.v.begin(), s.v.end(), v.begin() + at(j, 0, 0));
    }
};

using RBDisc = BDiscField<double>;
using CBDisc = BDiscField<cplx>;

template <class T>
double sup_norm(const BDiscField<T>& f) { return sup_norm(f.v); }
template <class T>
BDiscField<T> operator-(BDiscField<T> a, const BDiscField<T>& b) {
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
    return a;
}

// ---------------------------------------------------------------------------
// Snapshot format: one ASCII header line
//   GFLD v1 <kind> <dims...> <components>\n
// followed by row-major little-endian float64. components is 1 for real
// fields, 2 for complex (re,im interleaved).
// ---------------------------------------------------------------------------
void save_field(const std::string& path, const RTorus& f);
void save_field(const std::string& path, const CTorus& f);
void save_field(const std::string& path, const RWindow& f);
void save_field(const std::string& path, const PathField& f);
RTorus load_torus(const std::string& path);
CTorus load_ctorus(const std::string& path);
RWindow load_window(const std::string& path);
PathField load_path(const std::string& path);

}  // namespace hcma

#endif
