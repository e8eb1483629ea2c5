#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hcma/elliptic.hpp"
#include "hcma/norms.hpp"

using namespace hcma;

namespace {

// manufactured solution on tau = (planar), z = (torus):
//   h*(tau, x) = (Re tau^3 + |tau|^4) cos x,  Laplace_tau h* = 16 |tau|^2 cos x
double hstar(cplx tau, double x) {
    const double r2 = std::norm(tau);
    return (std::pow(tau, 3).real() + r2 * r2) * std::cos(x);
}
double hstar_rhs(cplx tau, double x) { return 16.0 * std::norm(tau) * std::cos(x); }

double disc_manufactured_error(int nr) {
    const int na = 4 * nr;
    DiscMesh mesh(nr, na);
    TorusGrid tg(8, 4, 2.0 * PI);
    DiscProductField<double> f(mesh, tg);
    RBDisc g(na, tg);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j)
            for (int iy = 0; iy < tg.ny; ++iy)
                for (int ix = 0; ix < tg.nx; ++ix)
                    f.v[f.at(i, j, tg.at(ix, iy))] =
                        hstar_rhs(mesh.r_of(i) * std::exp(I * mesh.alpha_of(j)), tg.x(ix));
    for (int j = 0; j < na; ++j) {
        const cplx tau = std::exp(I * mesh.alpha_of(j));
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix)
                g.v[g.at(j, ix, iy)] = hstar(tau, tg.x(ix));
    }
    double res = 0.0;
    DiscProductField<double> u = poisson_family_solve(mesh, f, g, &res);
    CHECK(res < 1e-8);
    double err = 0.0;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) {
            const cplx tau = mesh.r_of(i) * std::exp(I * mesh.alpha_of(j));
            for (int ix = 0; ix < tg.nx; ++ix)
                err = std::max(err,
                               std::abs(u.v[u.at(i, j, tg.at(ix, 0))] - hstar(tau, tg.x(ix))));
        }
    return err;
}

std::shared_ptr<StripMesh> make_strip(double Theta, int nt) {
    StadiumCurve c;
    c.Theta = Theta;
    return std::make_shared<StripMesh>(c, nt);
}

double stadium_manufactured_error(int nt) {
    auto mesh = make_strip(1.0, nt);
    TorusGrid tg(8, 4, 2.0 * PI);
    StripField<double> f(mesh, tg);
    const auto& m = *mesh;
    for (int k = 0; k < m.interior_count(); ++k) {
        const auto [j, i] = m.interior_node(k);
        for (int ix = 0; ix < tg.nx; ++ix)
            for (int iy = 0; iy < tg.ny; ++iy)
                f.lattice[f.lat(j, i, tg.at(ix, iy))] =
                    hstar_rhs(cplx(m.t_of(i), m.theta_of(j)), tg.x(ix));
    }
    std::vector<double> g(m.boundary().size() * tg.size());
    for (std::size_t b = 0; b < m.boundary().size(); ++b) {
        const cplx tau(m.boundary()[b].t, m.boundary()[b].theta);
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix)
                g[b * tg.size() + tg.at(ix, iy)] = hstar(tau, tg.x(ix));
    }
    double res = 0.0;
    StripField<double> u = poisson_family_solve(mesh, f, g, tg, &res);
    CHECK(res < 1e-7);
    double err = 0.0;
    for (int k = 0; k < m.interior_count(); ++k) {
        const auto [j, i] = m.interior_node(k);
        const cplx tau(m.t_of(i), m.theta_of(j));
        for (int ix = 0; ix < tg.nx; ++ix)
            err = std::max(err,
                           std::abs(u.lattice[u.lat(j, i, tg.at(ix, 0))] - hstar(tau, tg.x(ix))));
    }
    return err;
}

}  // namespace

TEST_CASE("disc Poisson: zero data gives zero") {
    DiscMesh mesh(8, 32);
    TorusGrid tg(4, 4, 2.0 * PI);
    DiscProductField<double> f(mesh, tg);
    RBDisc g(32, tg);
    DiscProductField<double> u = poisson_family_solve(mesh, f, g);
    CHECK(sup_norm(u.v) == 0.0);
}

TEST_CASE("disc Poisson manufactured convergence order 2") {
    const double e1 = disc_manufactured_error(8);
    const double e2 = disc_manufactured_error(16);
    const double e3 = disc_manufactured_error(32);
    const double p12 = std::log2(e1 / e2);
    const double p23 = std::log2(e2 / e3);
    CHECK(p12 == doctest::Approx(2.0).epsilon(0.075));
    CHECK(p23 == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("stadium Poisson manufactured convergence order 2") {
    const double e1 = stadium_manufactured_error(8);
    const double e2 = stadium_manufactured_error(16);
    const double e3 = stadium_manufactured_error(32);
    const double p12 = std::log2(e1 / e2);
    const double p23 = std::log2(e2 / e3);
    CHECK(p12 == doctest::Approx(2.0).epsilon(0.075));
    CHECK(p23 == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("discrete maximum principle and two-solver agreement") {
    auto mesh = make_strip(1.0, 12);
    const auto& m = *mesh;
    Rng rng(5);
    std::vector<double> g(m.boundary().size());
    for (auto& x : g) x = rng.next_sym();
    const double gmax = sup_norm(g);
    std::vector<double> zero(m.interior_count(), 0.0);
    std::vector<double> u = m.solve(zero, g);
    CHECK(sup_norm(u) <= gmax + 1e-13);

    std::vector<double> u2 = m.solve_iterative(zero, g);
    double diff = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) diff = std::max(diff, std::abs(u[k] - u2[k]));
    CHECK(diff < 1e-9);
}

TEST_CASE("harmonic conjugate on the circle") {
    const int na = 128;
    std::vector<double> u(na), want(na);
    for (int j = 0; j < na; ++j) u[j] = std::cos(2.0 * PI * j / na);
    auto v = harmonic_conjugate_circle(u);
    double err = 0.0;
    for (int j = 0; j < na; ++j) err = std::max(err, std::abs(v[j] - std::sin(2.0 * PI * j / na)));
    CHECK(err < 1e-12);

    std::fill(u.begin(), u.end(), 2.0);
    v = harmonic_conjugate_circle(u);
    CHECK(sup_norm(v) < 1e-13);

    for (int j = 0; j < na; ++j) {
        const double a = 2.0 * PI * j / na;
        u[j] = std::cos(3.0 * a);     // Re tau^3 on the boundary
        want[j] = std::sin(3.0 * a);  // Im tau^3
    }
    v = harmonic_conjugate_circle(u);
    err = 0.0;
    for (int j = 0; j < na; ++j) err = std::max(err, std::abs(v[j] - want[j]));
    CHECK(err < 1e-10);
}

TEST_CASE("RH family: zero data, constructed solution, flat coefficients") {
    const int na = 128;
    TorusGrid tg(8, 4, 2.0 * PI);
    CTorus A =
        CTorus::sample(tg, [](double x, double) { return cplx(0.5 + 0.1 * std::cos(x), 0.02); });
    CTorus S = CTorus::sample(
        tg, [](double x, double y) { return cplx(0.05 * std::sin(x), 0.03 * std::cos(y)); });

    CBDisc zero(na, tg);
    RHFamily f0 = rh_family_solve(zero, A, S);
    CHECK(sup_norm(f0.f_bd.v) < 1e-14);
    CHECK(sup_norm(f0.h_bd.v) < 1e-14);

    auto cfun = [](double x, double y) { return cplx(0.3 * std::cos(x), 0.1 * std::sin(y)); };
    auto dfun = [](double x, double y) { return cplx(0.2 * std::sin(x + y), -0.15); };
    CBDisc b(na, tg);
    for (int j = 0; j < na; ++j) {
        const cplx tau = std::exp(I * (2.0 * PI * j / na));
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const cplx fs = (tau + I) * cfun(tg.x(ix), tg.y(iy));
                const cplx hs = tau * tau * dfun(tg.x(ix), tg.y(iy));
                const std::size_t tb = tg.at(ix, iy);
                b.v[b.at(j, ix, iy)] = A.v[tb] * std::conj(fs) + S.v[tb] * fs - hs;
            }
    }
    RHFamily fam = rh_family_solve(b, A, S);
    double err = 0.0;
    for (int j = 0; j < na; ++j) {
        const cplx tau = std::exp(I * (2.0 * PI * j / na));
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix) {
                const cplx fs = (tau + I) * cfun(tg.x(ix), tg.y(iy));
                const cplx hs = tau * tau * dfun(tg.x(ix), tg.y(iy));
                err = std::max(err, std::abs(fam.f_bd.v[fam.f_bd.at(j, ix, iy)] - fs));
                err = std::max(err, std::abs(fam.h_bd.v[fam.h_bd.at(j, ix, iy)] - hs));
            }
    }
    CHECK(err < 1e-7);
    CHECK(rh_dbar_residual(fam) < 1e-10);

    CTorus Af = CTorus::sample(tg, [](double, double) { return cplx(0.5, 0.0); });
    CTorus Sf(tg);
    RHFamily flat = rh_family_solve(b, Af, Sf);
    CHECK(sup_norm(flat.f_bd.v) > 0.0);

    const int base_j = 3 * na / 4;
    for (int iy = 0; iy < tg.ny; ++iy)
        for (int ix = 0; ix < tg.nx; ++ix)
            CHECK(std::abs(fam.f_bd.v[fam.f_bd.at(base_j, ix, iy)]) == 0.0);

    CTorus Abad =
        CTorus::sample(tg, [](double x, double) { return cplx(0.5 * std::sin(x), 0.0); });
    CHECK_THROWS_AS(rh_family_solve(b, Abad, S), SolverError);
}

TEST_CASE("strip harmonic decay obeys the barrier") {
    CHECK(barrier_delta(6.0) ==
          doctest::Approx(2.0 * std::cosh(PI) / std::cosh(3.0 * PI)).epsilon(1e-14));
    CHECK(barrier_delta(6.0) == doctest::Approx(3.742e-3).epsilon(2e-4));
    CHECK_THROWS_AS(barrier_delta(4.0), SolverError);

    TorusGrid tg(8, 4, 2.0 * PI);
    const int nt = 8;
    WindowGrid wg(-2.0, 2.0, 0.0, 1.0, 4 * nt, nt, tg);
    RWindow F = RWindow::sample(wg, [](double th, double t, double x, double) {
        return std::sin(PI * t) * std::exp(-th * th) * (1.0 + 0.3 * std::cos(x));
    });

    DecayCertificate cert{};
    RWindow z(wg);
    RWindow hz = strip_harmonic(z, make_strip(6.0, nt), &cert);
    CHECK(sup_norm(hz) == 0.0);
    CHECK(cert.measured_ratio == 0.0);

    double prev = 1.0;
    for (double Theta : {5.0, 6.0, 8.0}) {
        DecayCertificate c{};
        RWindow H = strip_harmonic(F, make_strip(Theta, nt), &c);
        CHECK(c.measured_ratio <= 1.25 * c.delta);
        CHECK(c.measured_ratio < prev);
        prev = c.measured_ratio;
        if (Theta == 6.0) CHECK(c.delta == doctest::Approx(3.7419e-3).epsilon(1e-3));
    }
}

TEST_CASE("holomorphic completion on the strip mesh") {
    auto run = [&](int nt) {
        auto mesh = make_strip(1.0, nt);
        const auto& m = *mesh;
        auto W = [](cplx tau) { return std::exp(0.6 * tau); };
        std::vector<double> g(m.boundary().size());
        for (std::size_t b = 0; b < g.size(); ++b)
            g[b] = W(cplx(m.boundary()[b].t, m.boundary()[b].theta)).real();
        const int base = m.boundary_point_of_node(m.col_of(0.0), 0);
        const double im0 = W(cplx(0.0, 0.0)).imag();
        HoloStrip hs = holo_complete_strip(m, g, base, im0);
        double err = 0.0;
        for (int k = 0; k < m.interior_count(); ++k) {
            const auto [j, i] = m.interior_node(k);
            const cplx exact = W(cplx(m.t_of(i), m.theta_of(j)));
            err = std::max(err, std::abs(cplx(hs.u_int[k], hs.v_int[k]) - exact));
        }
        for (std::size_t b = 0; b < g.size(); ++b) {
            const cplx exact = W(cplx(m.boundary()[b].t, m.boundary()[b].theta));
            err = std::max(err, std::abs(cplx(hs.u_b[b], hs.v_b[b]) - exact));
        }
        return err;
    };
    const double e16 = run(16);
    const double e32 = run(32);
    CHECK(e16 < 5e-3);
    CHECK(e32 < e16 / 2.5);
}
