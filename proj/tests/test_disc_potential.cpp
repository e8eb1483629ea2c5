#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hcma/potential.hpp"

using namespace hcma;

namespace {

struct Lab {
    TorusGrid tg{16, 8, 2.0 * PI};
    DiscDomain dom{24, 96, tg};
    Background bg = Background::flat_torus(tg);

    std::vector<double> profile_F(double eps) const {
        std::vector<double> F(dom.nbd() * tg.size());
        for (std::size_t b = 0; b < dom.nbd(); ++b) {
            const double a = std::arg(dom.bd_tau(b));
            for (int iy = 0; iy < tg.ny; ++iy)
                for (int ix = 0; ix < tg.nx; ++ix)
                    F[b * tg.size() + tg.at(ix, iy)] = eps * std::cos(a) * std::cos(tg.x(ix));
        }
        return F;
    }
    IterationConfig cfg() const {
        IterationConfig c;
        c.tol = 1e-12;
        return c;
    }
};

double pair_sup(const LeafDomain::HoloPair& a, const LeafDomain::HoloPair& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.f_bd.size(); ++i)
        worst = std::max(worst, std::abs(a.f_bd[i] - b.f_bd[i]));
    for (std::size_t i = 0; i < a.h_bd.size(); ++i)
        worst = std::max(worst, std::abs(a.h_bd[i] - b.h_bd[i]));
    return worst;
}

}  // namespace

TEST_CASE("zero data fixes the trivial state in one step") {
    Lab L;
    std::vector<double> F(L.dom.nbd() * L.tg.size(), 0.0);
    DiscFamilyState st = solve_disc_family(L.dom, L.bg, F, L.cfg());
    CHECK(st.iterations == 1);
    CHECK(sup_norm(st.fh.f_bd) < 1e-14);
    CHECK(st.final_residual < 1e-14);

    FoliationMap map = build_foliation_map(L.dom, st);
    CHECK(sup_norm(map.fwd_int) < 1e-13);
    CHECK(sup_norm(map.inv_int) < 1e-12);
    CHECK(map.jacobian_min == doctest::Approx(1.0).epsilon(1e-10));

    PotentialBundle pb = assemble_potential(L.dom, L.bg, st, map);
    CHECK(sup_norm(pb.P_int) < 1e-12);
    CHECK(sup_norm(pb.Q_int) < 1e-12);
    CHECK(pb.boundary_residual < 1e-12);
    CHECK(pb.q_consistency < 1e-10);
    CHECK(pb.hcma_residual < 1e-10);
}

TEST_CASE("single step linear response is O(eps)") {
    Lab L;
    const double eps = 0.01;
    std::vector<double> F = L.profile_F(eps);
    LeafDomain::HoloPair corr = disc_iteration_step(L.dom, L.bg, F, LeafDomain::HoloPair{});
    const double c = sup_norm(corr.f_bd) / eps;
    CHECK(c > 0.0);
    CHECK(c < 10.0);  // measured response constant
}

TEST_CASE("weighted-norm contraction factor stays below the 2/3 + slack bound") {
    Lab L;
    IterationConfig cfg = L.cfg();
    cfg.track_weighted = true;
    std::vector<double> F = L.profile_F(0.02);

    RBDisc Fb(L.dom.mesh().na(), L.tg);
    Fb.v = F;
    const double C4 = rh_response_constant(L.dom, L.bg, cfg.gamma - 2.0);
    cfg.H = 16.0 * C4 * (hnorm(Fb, cfg.gamma - 1.0) + 1.0);
    cfg.A_weight = 6.0 * C4 * (cfg.H + hnorm(Fb, cfg.gamma));

    DiscFamilyState st = solve_disc_family(L.dom, L.bg, F, cfg);
    REQUIRE(st.contraction_ratios.size() >= 3);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < st.contraction_ratios.size() && st.weighted_norms[i + 1] > 1e-12;
         ++i)
        worst = std::max(worst, st.contraction_ratios[i]);
    CHECK(worst <= 2.0 / 3.0 + 0.05);
    CHECK(st.final_residual < 1e-10);
}

TEST_CASE("fixed point is independent of the admissible initialization") {
    Lab L;
    std::vector<double> F = L.profile_F(0.02);
    DiscFamilyState base = solve_disc_family(L.dom, L.bg, F, L.cfg());

    std::vector<cplx> b(L.dom.nbd() * L.tg.size());
    for (std::size_t bi = 0; bi < L.dom.nbd(); ++bi)
        for (std::size_t tb = 0; tb < L.tg.size(); ++tb)
            b[bi * L.tg.size() + tb] = 0.005 * std::cos(std::arg(L.dom.bd_tau(bi)));
    LeafDomain::HoloPair init = L.dom.rh_solve(b, L.bg.A, L.bg.S);
    DiscFamilyState other = solve_disc_family(L.dom, L.bg, F, L.cfg(), &init);
    CHECK(pair_sup(base.fh, other.fh) < 10.0 * 1e-11);
}

TEST_CASE("foliation map bounds and roundtrip") {
    Lab L;
    std::vector<double> F = L.profile_F(0.02);
    DiscFamilyState st = solve_disc_family(L.dom, L.bg, F, L.cfg());

    const std::size_t base = L.dom.base_bd();
    for (std::size_t tb = 0; tb < L.tg.size(); ++tb)
        CHECK(std::abs(st.fh.f_bd[base * L.tg.size() + tb]) == 0.0);

    FoliationMap map = build_foliation_map(L.dom, st);
    CHECK(map.jacobian_min > 0.5);
    CHECK(foliation_roundtrip_error(map) < 1e-8);
    CHECK(sup_norm(map.fwd_int) < 5.0 * 0.02);  // |A_F - Id| <= C |F|
}

TEST_CASE("periodic chart consistency") {
    Lab L;
    std::vector<double> F = L.profile_F(0.02);
    DiscFamilyState st = solve_disc_family(L.dom, L.bg, F, L.cfg());
    CHECK(periodic_consistency(L.dom, st, 2.0 * PI, 0.0) < 1e-12);
    CHECK(periodic_consistency(L.dom, st, PI, 0.0) < 1e-9);
}

TEST_CASE("potential assembly diagnostics at small data") {
    Lab L;
    std::vector<double> F = L.profile_F(0.02);
    SolveResult s = solve_hcma(L.dom, L.bg, F, L.cfg());
    CHECK(s.bundle.exactness_defect < 1e-7);
    CHECK(s.bundle.boundary_residual < 1e-7);
    CHECK(s.bundle.q_consistency < 1e-5);
    CHECK(s.bundle.hcma_residual < 1e-4);
    CHECK(s.bundle.positivity_min > 0.4);
    CHECK(kernel_identity_residual(L.dom, L.bg, s.state, s.map, s.bundle) < 5e-3);
}

TEST_CASE("max principle comparison across data pairs") {
    Lab L;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> F1 = L.profile_F(0.015 + 0.005 * trial);
        std::vector<double> F2 = F1;
        for (std::size_t b = 0; b < L.dom.nbd(); ++b) {
            const double a = std::arg(L.dom.bd_tau(b));
            for (int iy = 0; iy < L.tg.ny; ++iy)
                for (int ix = 0; ix < L.tg.nx; ++ix)
                    F2[b * L.tg.size() + L.tg.at(ix, iy)] +=
                        0.004 * std::sin(a) * std::cos(L.tg.x(ix) + L.tg.y(iy));
        }
        SolveResult s1 = solve_hcma(L.dom, L.bg, F1, L.cfg());
        SolveResult s2 = solve_hcma(L.dom, L.bg, F2, L.cfg());
        double dphi = 0.0, df = 0.0;
        for (std::size_t i = 0; i < s1.bundle.Phi_int.size(); ++i)
            dphi = std::max(dphi, std::abs(s1.bundle.Phi_int[i] - s2.bundle.Phi_int[i]));
        for (std::size_t i = 0; i < F1.size(); ++i) df = std::max(df, std::abs(F1[i] - F2[i]));
        CHECK(dphi <= df + 1e-6);
    }
}

TEST_CASE("leafwise harmonic operator basics") {
    Lab L;
    std::vector<double> F0(L.dom.nbd() * L.tg.size(), 0.0);
    DiscFamilyState st0 = solve_disc_family(L.dom, L.bg, F0, L.cfg());
    FoliationMap id_map = build_foliation_map(L.dom, st0);

    std::vector<double> g(L.dom.nbd() * L.tg.size());
    for (std::size_t b = 0; b < L.dom.nbd(); ++b) {
        const double a = std::arg(L.dom.bd_tau(b));
        for (int iy = 0; iy < L.tg.ny; ++iy)
            for (int ix = 0; ix < L.tg.nx; ++ix)
                g[b * L.tg.size() + L.tg.at(ix, iy)] = std::cos(a) * std::cos(L.tg.x(ix));
    }
    TangentField H = leafwise_harmonic(L.dom, id_map, g);
    std::vector<double> ext = L.dom.harmonic_ext(g);
    double diff = 0.0;
    for (std::size_t i = 0; i < ext.size(); ++i)
        diff = std::max(diff, std::abs(H.int_[i] - ext[i]));
    CHECK(diff < 1e-10);  // A = Id case

    std::vector<double> zero(g.size(), 0.0);
    TangentField Hz = leafwise_harmonic(L.dom, id_map, zero);
    CHECK(sup_norm(Hz.int_) == 0.0);

    std::vector<double> F = L.profile_F(0.02);
    DiscFamilyState st = solve_disc_family(L.dom, L.bg, F, L.cfg());
    FoliationMap map = build_foliation_map(L.dom, st);
    TangentField Hf = leafwise_harmonic(L.dom, map, g);
    CHECK(sup_norm(Hf.int_) <= sup_norm(g) * (1.0 + 1e-8) + 1e-10);
}

TEST_CASE("Lipschitz dependence on the boundary data") {
    Lab L;
    std::vector<double> Fa = L.profile_F(0.02);
    std::vector<double> Fb = L.profile_F(0.023);
    DiscFamilyState sa = solve_disc_family(L.dom, L.bg, Fa, L.cfg());
    DiscFamilyState sb = solve_disc_family(L.dom, L.bg, Fb, L.cfg());
    CBDisc fa(L.dom.mesh().na(), L.tg), fb(L.dom.mesh().na(), L.tg);
    fa.v = sa.fh.f_bd;
    fb.v = sb.fh.f_bd;
    CBDisc fd = fa - fb;
    RBDisc Fd(L.dom.mesh().na(), L.tg);
    for (std::size_t i = 0; i < Fd.v.size(); ++i) Fd.v[i] = Fa[i] - Fb[i];
    const double lhs = hnorm(fd, 2.0 + 1.0 / 3.0);
    const double rhs = hnorm(Fd, 3.0 + 1.0 / 3.0);
    CHECK(lhs <= 5.0 * rhs);  // measured Lipschitz constant
}

TEST_CASE("linearized comparison: trivial segment and quadratic remainder") {
    TorusGrid tg(12, 4, 2.0 * PI);
    DiscDomain dom(16, 64, tg);
    Background bg = Background::flat_torus(tg);
    IterationConfig cfg;
    cfg.tol = 1e-12;

    std::vector<double> F0(dom.nbd() * tg.size(), 0.0);
    std::vector<double> F1 = F0;
    for (std::size_t b = 0; b < dom.nbd(); ++b) {
        const double a = std::arg(dom.bd_tau(b));
        for (int iy = 0; iy < tg.ny; ++iy)
            for (int ix = 0; ix < tg.nx; ++ix)
                F1[b * tg.size() + tg.at(ix, iy)] = 0.03 * std::cos(a) * std::cos(tg.x(ix));
    }
    ComparisonReport same = linearized_comparison(dom, bg, F1, F1, 2, cfg);
    CHECK(same.diff_sup < 1e-11);
    CHECK(same.integral_gap < 1e-11);

    ComparisonReport rep = linearized_comparison(dom, bg, F0, F1, 4, cfg);
    CHECK(rep.integral_gap < 0.1 * rep.diff_sup + 1e-8);
    CHECK(rep.remainder_ratio == doctest::Approx(4.0).epsilon(0.30));
}
