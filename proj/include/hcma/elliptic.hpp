#ifndef HCMA_ELLIPTIC_HPP
#define HCMA_ELLIPTIC_HPP

#include "hcma/mesh.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// Family Poisson solvers: one planar factorization, one solve per torus node.
// ---------------------------------------------------------------------------

/** Laplace_tau h = f on the disc with h = g on r=1, slice by slice.
 *  Returns the interior product field; *residual reports the worst discrete
 *  operator residual over all slices. */
DiscProductField<double> poisson_family_solve(const DiscMesh& mesh,
                                              const DiscProductField<double>& f,
                                              const RBDisc& g, double* residual = nullptr);

StripField<double> poisson_family_solve(const std::shared_ptr<const StripMesh>& mesh,
                                        const StripField<double>& f,
                                        const std::vector<double>& g_bvals,
                                        const TorusGrid& tg, double* residual = nullptr);

// ---------------------------------------------------------------------------
// Boundary Fourier machinery on the unit circle.
// ---------------------------------------------------------------------------

/** Coefficients c_0..c_{na/2} of the holomorphic function with Re g = u on the
 *  boundary samples and Im g(sample base_j) = im_target. */
std::vector<cplx> holo_complete_circle(const std::vector<double>& u, int base_j,
                                       double im_target);

/** Harmonic conjugate on the circle: Fourier multiplier -i sgn(k), zero mean. */
std::vector<double> harmonic_conjugate_circle(const std::vector<double>& u);

/** Horner evaluation of a power series at tau (|tau| <= 1). */
cplx eval_holo(const std::vector<cplx>& coef, cplx tau);
cplx eval_holo_deriv(const std::vector<cplx>& coef, cplx tau);

/** Boundary samples of a coefficient vector (inverse transform). */
std::vector<cplx> holo_boundary_values(const std::vector<cplx>& coef, int na);

/** Harmonic extension of real boundary data to the polar mesh (spectral). */
std::vector<double> harmonic_extension_disc(const DiscMesh& mesh, const std::vector<double>& u);

// ---------------------------------------------------------------------------
// Constant-coefficient Riemann-Hilbert families on the disc:
//   dbar f = dbar h = 0,   A conj(f) + S f - h = b on the boundary,
//   f(-i, .) = 0.
// A and S are torus fields (constant along each leaf).
// ---------------------------------------------------------------------------
struct RHFamily {
    int na = 0;
    TorusGrid tg;
    // coefficient tables: mode k = 0..na/2, layout [k * T + tb]
    std::vector<cplx> fcoef, hcoef;
    CBDisc f_bd, h_bd;

    cplx eval_f(cplx tau, int ix, int iy) const;
    cplx eval_h(cplx tau, int ix, int iy) const;
    cplx eval_f_dtau(cplx tau, int ix, int iy) const;
    std::size_t nmodes() const { return static_cast<std::size_t>(na) / 2 + 1; }
};

RHFamily rh_family_solve(const CBDisc& b, const CTorus& A, const CTorus& S);

/** Max |dbar f| + |dbar h| on a sample of interior points, via 4th-order
 *  Wirtinger differencing of the evaluated series. */
double rh_dbar_residual(const RHFamily& fam, int nsamples = 64);

// ---------------------------------------------------------------------------
// Lemma-A.3 machinery: harmonic functions on the long strip with the barrier
// certificate  w = 2 sin(pi/4 + pi t/2) cosh(pi theta / 2) / cosh(pi Theta / 2).
// ---------------------------------------------------------------------------
struct DecayCertificate {
    double Theta = 0.0;
    double delta = 0.0;          // barrier value on the window
    double measured_ratio = 0.0; // sup_window |H| / |F|_0
};

double barrier_delta(double Theta);

/** Boundary values of the s-extension of a window field phi at the mesh
 *  boundary points (zero on |theta| <= Theta, shifted copies on the caps),
 *  flattened [bp * T + tb]. */
std::vector<double> s_extend_boundary_values(const RWindow& phi, const StripMesh& mesh);

/** Solve Laplace H = 0 on R x V with boundary s(F); return H restricted to the
 *  window plus the decay certificate. F must vanish on {t=0,1}. */
RWindow strip_harmonic(const RWindow& F, const std::shared_ptr<const StripMesh>& mesh,
                       DecayCertificate* cert = nullptr);

// ---------------------------------------------------------------------------
// Holomorphic completion on the meshed strip: given real boundary data,
// u = harmonic extension (Shortley-Weller) and v = conjugate, recovered by
// integrating the rotated gradient over lattice lines; v is pinned at a
// boundary point. Values live on interior nodes and boundary points.
// ---------------------------------------------------------------------------
struct HoloStrip {
    std::vector<double> u_int, v_int;  // interior compact index
    std::vector<double> u_b, v_b;      // boundary points
};

HoloStrip holo_complete_strip(const StripMesh& mesh, const std::vector<double>& g, int base_bp,
                              double im_target);

/** Window restriction of a (complex) strip lattice field; window nodes must be
 *  lattice nodes. */
RWindow restrict_to_window(const StripField<double>& f, const WindowGrid& wg);

}  // namespace hcma

#endif
