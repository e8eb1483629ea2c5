#ifndef HCMA_STRIP_HPP
#define HCMA_STRIP_HPP

#include "hcma/potential.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// Strip geometry: the curve, its mesh, the window, and the leaf domain.
// ---------------------------------------------------------------------------
struct StripGeometry {
    StadiumCurve curve;
    std::shared_ptr<const StripMesh> mesh;
    std::shared_ptr<StripDomain> dom;
    WindowGrid window;
    TorusGrid tg;
    int nt = 0;
};

StripGeometry build_strip(double Theta, int nt, const TorusGrid& tg);

// ---------------------------------------------------------------------------
// Points and tangents of the iteration space G = C(V)^2 x F.
// ---------------------------------------------------------------------------
struct GTriple {
    RTorus u0, u1;
    RWindow v;

    static GTriple zero(const StripGeometry& g);
};

GTriple operator+(GTriple a, const GTriple& b);
GTriple operator-(GTriple a, const GTriple& b);
GTriple operator*(double s, GTriple a);
double triple_sup(const GTriple& a);
/** |u0|_q + |u1|_q + |v|_q (Holder norms). */
double triple_norm(const GTriple& a, double q);

/** Boundary values of the s-extension at the mesh boundary points. */
std::vector<double> s_extend(const RWindow& phi, const StripGeometry& geom);

/** Boundary data M = phi_t + s(phi) at the mesh boundary points. */
std::vector<double> strip_boundary_data(const StripGeometry& geom, const GTriple& f);

// ---------------------------------------------------------------------------
// Riemann map of the strip (and of disc-shaped harness regions), computed by
// the Green's-function / harmonic-conjugate route and pinned so that
// T(0) = -i and T(pole) = 0 exactly.
// ---------------------------------------------------------------------------
struct RiemannMap {
    cplx pole{0.5, 0.0};
    cplx rot{1.0, 0.0};
    double cr_residual = 0.0;
    // strip representation: G = u + i v on the mesh
    std::shared_ptr<const StripMesh> mesh;
    std::vector<double> G_re_int, G_im_int, G_re_bd, G_im_bd;
    // harness representation: power series of G in w = (tau - c)/R
    bool harness = false;
    cplx center{0.0, 0.0};
    double radius = 1.0;
    std::vector<cplx> G_coef;

    cplx eval(cplx tau) const;          // T(tau)
    cplx eval_deriv(cplx tau) const;    // T'(tau) (harness only)
    cplx inverse(cplx w) const;         // Newton; harness only
    cplx boundary_value(std::size_t b) const;
};

RiemannMap riemann_map(const StripGeometry& geom, double tol);
RiemannMap riemann_map_disc_harness(cplx center, double radius, cplx pole, int na);

// ---------------------------------------------------------------------------
// The strip Dirichlet solve and the iteration maps.
// ---------------------------------------------------------------------------
struct StripSolveResult {
    DiscFamilyState state;
    FoliationMap map;
    PotentialBundle bundle;
    RWindow Phi_window;
    double boundary_match = 0.0;   // sup |Phi - M| on the boundary samples
    double positivity_min = 0.0;
    double cap_harmonic_measure = 0.0;  // conformal crowding diagnostic
};

/** Solve the HCMA Dirichlet problem on R x V with data phi_t + s(phi). The
 *  construction runs natively on the strip mesh; `map`, when given, is used
 *  only to report the conformal crowding of the caps. */
StripSolveResult solve_strip(const StripGeometry& geom, const Background& bg, const GTriple& f,
                             const IterationConfig& cfg, const RiemannMap* map = nullptr);

/** P(f) = (u0, u1, B(v) - v). Artifacts of the inner solve are returned for
 *  reuse by the tangent maps. */
GTriple iter_P(const StripGeometry& geom, const Background& bg, const GTriple& f,
               const IterationConfig& cfg, StripSolveResult* artifacts = nullptr);

/** Tangential map at a base point (artifacts of its solve). */
GTriple dP_apply(const StripGeometry& geom, const StripSolveResult& base, const GTriple& tangent);

struct DPInverseStats {
    double c0_factor = 0.0;  // measured sup-norm contraction of D2B
    int terms = 0;
    double final_increment = 0.0;
};

GTriple dP_inverse(const StripGeometry& geom, const StripSolveResult& base, const GTriple& rhs,
                   DPInverseStats* stats = nullptr, double series_tol = 1e-10,
                   int max_terms = 200);

/** sup over the window x torus of |d Phi / d theta|, via the spectral
 *  derivative over one translation period of the extended solution. */
double theta_independence(const StripGeometry& geom, const StripSolveResult& sol);

/** Fixed-point certificate: sup |Phi|_C - (s(Phi|_D - phi_t) + phi_t)|. */
double periodicity_certificate(const StripGeometry& geom, const GTriple& f,
                               const StripSolveResult& sol);

/** Path Psi(t, z) = Phi(t, theta=0, z). */
PathField extract_path(const StripGeometry& geom, const StripSolveResult& sol);

}  // namespace hcma

#endif
