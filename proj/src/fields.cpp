#include "hcma/fields.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hcma {

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}
double sup_norm(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const cplx& x : v) m = std::max(m, std::abs(x));
    return m;
}

CTorus to_complex(const RTorus& f) {
    CTorus g(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i) g.v[i] = f.v[i];
    return g;
}
RTorus real_part(const CTorus& f) {
    RTorus g(f.grid);
    for (std::size_t i = 0; i < f.v.size(); ++i) g.v[i] = f.v[i].real();
    return g;
}

CTorus spectral_derivative(const CTorus& f, int ax, int ay) {
    const TorusGrid& g = f.grid;
    std::vector<cplx> a = f.v;
    fft::fwd2(a, g.nx, g.ny);
    const double scale = 2.0 * PI / g.period;
    for (int iy = 0; iy < g.ny; ++iy) {
        const int ky = fft::freq(iy, g.ny);
        for (int ix = 0; ix < g.nx; ++ix) {
            const int kx = fft::freq(ix, g.nx);
            cplx m = 1.0;
            for (int k = 0; k < ax; ++k) m *= I * (kx * scale);
            for (int k = 0; k < ay; ++k) m *= I * (ky * scale);
            // Nyquist rows are not differentiable unambiguously; zero them for odd orders.
            if ((ax % 2 == 1 && g.nx % 2 == 0 && ix == g.nx / 2) ||
                (ay % 2 == 1 && g.ny % 2 == 0 && iy == g.ny / 2))
                m = 0.0;
            a[g.at(ix, iy)] *= m;
        }
    }
    fft::inv2(a, g.nx, g.ny);
    CTorus out(g);
    out.v = std::move(a);
    return out;
}

RTorus spectral_derivative(const RTorus& f, int ax, int ay) {
    return real_part(spectral_derivative(to_complex(f), ax, ay));
}

CTorus dz(const CTorus& f) {
    CTorus gx = spectral_derivative(f, 1, 0);
    CTorus gy = spectral_derivative(f, 0, 1);
    CTorus out(f.grid);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = 0.5 * (gx.v[i] - I * gy.v[i]);
    return out;
}
CTorus dzbar(const CTorus& f) {
    CTorus gx = spectral_derivative(f, 1, 0);
    CTorus gy = spectral_derivative(f, 0, 1);
    CTorus out(f.grid);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = 0.5 * (gx.v[i] + I * gy.v[i]);
    return out;
}

// ------------------------------- TorusInterp -------------------------------

TorusInterp::TorusInterp(const CTorus& f, int order) : grid_(f.grid), order_(order) { build(f); }
TorusInterp::TorusInterp(const RTorus& f, int order) : grid_(f.grid), order_(order) {
    build(to_complex(f));
}

void TorusInterp::build(const CTorus& f) {
    tables_.resize(static_cast<std::size_t>(order_ + 1) * (order_ + 1));
    std::vector<double> fact(order_ + 1, 1.0);
    for (int k = 1; k <= order_; ++k) fact[k] = fact[k - 1] * k;
    for (int ay = 0; ay <= order_; ++ay) {
        for (int ax = 0; ax <= order_; ++ax) {
            if (ax + ay > order_) continue;
            CTorus d = spectral_derivative(f, ax, ay);
            const double s = 1.0 / (fact[ax] * fact[ay]);
            if (ax + ay > 0)
                for (auto& x : d.v) x *= s;
            tables_[static_cast<std::size_t>(ay) * (order_ + 1) + ax] = std::move(d);
        }
    }
}

cplx TorusInterp::operator()(double x, double y) const { return deriv(x, y, 0, 0); }

cplx TorusInterp::deriv(double x, double y, int ax, int ay) const {
    const double hx = grid_.hx(), hy = grid_.hy();
    // nearest node, wrapped
    long jx = std::lround(x / hx);
    long jy = std::lround(y / hy);
    double ux = x - jx * hx;
    double uy = y - jy * hy;
    int ix = static_cast<int>(((jx % grid_.nx) + grid_.nx) % grid_.nx);
    int iy = static_cast<int>(((jy % grid_.ny) + grid_.ny) % grid_.ny);
    // Taylor sum; tables hold D^a f / a!.
    // derivative requested: sum_{b>=a} D^b f / b! * b!/(b-a)! u^(b-a) = build from shifted tables.
    cplx acc = 0.0;
    std::array<double, 16> powx{}, powy{};
    powx[0] = 1.0;
    powy[0] = 1.0;
    for (int k = 1; k <= order_; ++k) {
        powx[k] = powx[k - 1] * ux;
        powy[k] = powy[k - 1] * uy;
    }
    // tables_[b] = D^b f / b!; the a-derivative of sum_b tab_b u^b is
    // sum_{b>=a} tab_b * b!/(b-a)! * u^{b-a}.
    for (int by = ay; by <= order_; ++by) {
        for (int bx = ax; bx + by <= order_; ++bx) {
            const CTorus& tab = tables_[static_cast<std::size_t>(by) * (order_ + 1) + bx];
            if (tab.v.empty()) continue;
            double c = 1.0;
            for (int k = bx - ax + 1; k <= bx; ++k) c *= k;
            for (int k = by - ay + 1; k <= by; ++k) c *= k;
            acc += tab.v[grid_.at(ix, iy)] * (c * powx[bx - ax] * powy[by - ay]);
        }
    }
    return acc;
}

template <class T>
TorusField<T> compose_displacement(const TorusField<T>& f, const CTorus& disp, int order) {
    require(f.grid == disp.grid, "compose: displacement grid mismatch");
    TorusInterp interp(f, order);
    TorusField<T> out(f.grid);
    const TorusGrid& g = f.grid;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const cplx d = disp.at(ix, iy);
            cplx val = (d == cplx(0.0, 0.0))
                           ? cplx(f.at(ix, iy))
                           : interp(g.x(ix) + d.real(), g.y(iy) + d.imag());
            if constexpr (std::is_same_v<T, double>)
                out.at(ix, iy) = val.real();
            else
                out.at(ix, iy) = val;
        }
    return out;
}
template TorusField<double> compose_displacement(const TorusField<double>&, const CTorus&, int);
template TorusField<cplx> compose_displacement(const TorusField<cplx>&, const CTorus&, int);

template <class T>
TorusField<T> compose_shift(const TorusField<T>& f, double sx, double sy, int order) {
    const TorusGrid& g = f.grid;
    const double rx = sx / g.hx(), ry = sy / g.hy();
    const double ix_round = std::round(rx), iy_round = std::round(ry);
    if (std::abs(rx - ix_round) < 1e-13 && std::abs(ry - iy_round) < 1e-13) {
        // exact roll
        TorusField<T> out(g);
        const int ox = static_cast<int>((((long)ix_round % g.nx) + g.nx) % g.nx);
        const int oy = static_cast<int>((((long)iy_round % g.ny) + g.ny) % g.ny);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                out.at(ix, iy) = f.at((ix + ox) % g.nx, (iy + oy) % g.ny);
        return out;
    }
    TorusInterp interp(f, order);
    TorusField<T> out(g);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            cplx val = interp(g.x(ix) + sx, g.y(iy) + sy);
            if constexpr (std::is_same_v<T, double>)
                out.at(ix, iy) = val.real();
            else
                out.at(ix, iy) = val;
        }
    return out;
}
template TorusField<double> compose_shift(const TorusField<double>&, double, double, int);
template TorusField<cplx> compose_shift(const TorusField<cplx>&, double, double, int);

// ------------------------------ window interp ------------------------------

namespace {
// Keys cubic convolution kernel (a = -1/2), interpolatory at nodes.
inline double keys(double s) {
    s = std::abs(s);
    if (s < 1.0) return 1.0 + s * s * (1.5 * s - 2.5);
    if (s < 2.0) return 2.0 - s * (4.0 - s * (2.5 - 0.5 * s));
    return 0.0;
}
}  // namespace

double window_planar_eval_node(const RWindow& f, double theta, double t, int ix, int iy) {
    const WindowGrid& g = f.grid;
    const double sx = (theta - g.th0) / g.hth();
    const double sy = (t - g.t0) / g.ht();
    const int j0 = static_cast<int>(std::floor(sx));
    const int i0 = static_cast<int>(std::floor(sy));
    const double fx = sx - j0, fy = sy - i0;
    auto sample = [&](int j, int i) -> double {
        double sgn = 1.0;
        // odd reflection in t (F-space fields vanish at t rows)
        if (i < 0) { i = -i; sgn = -sgn; }
        if (i > g.nt) { i = 2 * g.nt - i; sgn = -sgn; }
        // clamp/linear-extrapolate in theta
        if (j < 0) {
            const double v0 = sgn * f.at(0, i, ix, iy), v1 = sgn * f.at(1, i, ix, iy);
            return v0 + j * (v1 - v0);
        }
        if (j > g.nth) {
            const double v0 = sgn * f.at(g.nth, i, ix, iy), v1 = sgn * f.at(g.nth - 1, i, ix, iy);
            return v0 + (j - g.nth) * (v0 - v1);
        }
        return sgn * f.at(j, i, ix, iy);
    };
    double acc = 0.0;
    for (int dj = -1; dj <= 2; ++dj) {
        const double wx = keys(fx - dj);
        if (wx == 0.0) continue;
        for (int di = -1; di <= 2; ++di) {
            const double wy = keys(fy - di);
            if (wy == 0.0) continue;
            acc += wx * wy * sample(j0 + dj, i0 + di);
        }
    }
    return acc;
}

RTorus window_planar_eval(const RWindow& f, double theta, double t) {
    RTorus out(f.grid.tg);
    for (int iy = 0; iy < f.grid.tg.ny; ++iy)
        for (int ix = 0; ix < f.grid.tg.nx; ++ix)
            out.at(ix, iy) = window_planar_eval_node(f, theta, t, ix, iy);
    return out;
}

double window_boundary_sup(const RWindow& f) {
    const WindowGrid& g = f.grid;
    double m = 0.0;
    for (int j = 0; j <= g.nth; ++j)
        for (int iy = 0; iy < g.tg.ny; ++iy)
            for (int ix = 0; ix < g.tg.nx; ++ix) {
                m = std::max(m, std::abs(f.at(j, 0, ix, iy)));
                m = std::max(m, std::abs(f.at(j, g.nt, ix, iy)));
            }
    return m;
}

// -------------------------------- snapshots --------------------------------

namespace {

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
    // assume little-endian host (x86/arm64); format is defined little-endian
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void write_header(std::ostream& os, const std::string& kind, const std::vector<long>& dims,
                  int components) {
    os << "GFLD v1 " << kind;
    for (long d : dims) os << ' ' << d;
    os << ' ' << components << '\n';
}

struct Header {
    std::string kind;
    std::vector<long> dims;
    int components = 1;
};

Header read_header(std::istream& is, const std::string& path) {
    std::string line;
    if (!std::getline(is, line)) throw SolverError("snapshot: cannot read header in " + path);
    std::istringstream ss(line);
    std::string magic, ver;
    Header h;
    ss >> magic >> ver >> h.kind;
    if (magic != "GFLD" || ver != "v1") throw SolverError("snapshot: bad magic in " + path);
    std::vector<long> nums;
    long x;
    while (ss >> x) nums.push_back(x);
    if (nums.size() < 2) throw SolverError("snapshot: truncated header in " + path);
    h.components = static_cast<int>(nums.back());
    nums.pop_back();
    h.dims = nums;
    return h;
}

std::vector<double> read_payload(std::istream& is, std::size_t n, const std::string& path) {
    std::vector<double> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != n * sizeof(double))
        throw SolverError("snapshot: payload size mismatch in " + path);
    char probe;
    if (is.read(&probe, 1)) throw SolverError("snapshot: trailing bytes in " + path);
    return buf;
}

}  // namespace

void save_field(const std::string& path, const RTorus& f) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "snapshot: cannot open " + path);
    write_header(os, "torus", {f.grid.nx, f.grid.ny}, 1);
    write_doubles(os, f.v.data(), f.v.size());
}

void save_field(const std::string& path, const CTorus& f) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "snapshot: cannot open " + path);
    write_header(os, "torus", {f.grid.nx, f.grid.ny}, 2);
    std::vector<double> buf(2 * f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        buf[2 * i] = f.v[i].real();
        buf[2 * i + 1] = f.v[i].imag();
    }
    write_doubles(os, buf.data(), buf.size());
}

void save_field(const std::string& path, const RWindow& f) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "snapshot: cannot open " + path);
    write_header(os, "window", {f.grid.nth, f.grid.nt, f.grid.tg.nx, f.grid.tg.ny}, 1);
    os << f.grid.th0 << ' ' << f.grid.th1 << ' ' << f.grid.t0 << ' ' << f.grid.t1 << ' '
       << f.grid.tg.period << '\n';
    write_doubles(os, f.v.data(), f.v.size());
}

void save_field(const std::string& path, const PathField& f) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "snapshot: cannot open " + path);
    write_header(os, "path", {f.grid.nt, f.grid.tg.nx, f.grid.tg.ny}, 1);
    write_doubles(os, f.v.data(), f.v.size());
}

RTorus load_torus(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "snapshot: cannot open " + path);
    Header h = read_header(is, path);
    require(h.kind == "torus" && h.dims.size() == 2 && h.components == 1,
            "snapshot: not a real torus field: " + path);
    TorusGrid g(static_cast<int>(h.dims[0]), static_cast<int>(h.dims[1]), 2.0 * PI);
    RTorus f(g);
    f.v = read_payload(is, g.size(), path);
    return f;
}

CTorus load_ctorus(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "snapshot: cannot open " + path);
    Header h = read_header(is, path);
    require(h.kind == "torus" && h.dims.size() == 2 && h.components == 2,
            "snapshot: not a complex torus field: " + path);
    TorusGrid g(static_cast<int>(h.dims[0]), static_cast<int>(h.dims[1]), 2.0 * PI);
    std::vector<double> buf = read_payload(is, 2 * g.size(), path);
    CTorus f(g);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = cplx(buf[2 * i], buf[2 * i + 1]);
    return f;
}

RWindow load_window(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "snapshot: cannot open " + path);
    Header h = read_header(is, path);
    require(h.kind == "window" && h.dims.size() == 4 && h.components == 1,
            "snapshot: not a window field: " + path);
    double th0, th1, t0, t1, period;
    is >> th0 >> th1 >> t0 >> t1 >> period;
    is.get();  // newline
    WindowGrid g(th0, th1, t0, t1, static_cast<int>(h.dims[0]), static_cast<int>(h.dims[1]),
                 TorusGrid(static_cast<int>(h.dims[2]), static_cast<int>(h.dims[3]), period));
    RWindow f(g);
    f.v = read_payload(is, g.size(), path);
    return f;
}

PathField load_path(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "snapshot: cannot open " + path);
    Header h = read_header(is, path);
    require(h.kind == "path" && h.dims.size() == 3 && h.components == 1,
            "snapshot: not a path field: " + path);
    PathGrid g{static_cast<int>(h.dims[0]),
               TorusGrid(static_cast<int>(h.dims[1]), static_cast<int>(h.dims[2]), 2.0 * PI)};
    PathField f(g);
    f.v = read_payload(is, g.size(), path);
    return f;
}

}  // namespace hcma
