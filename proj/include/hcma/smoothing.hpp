#ifndef HCMA_SMOOTHING_HPP
#define HCMA_SMOOTHING_HPP

#include "hcma/norms.hpp"

namespace hcma {

// Nash-type smoothing operators S_Q: frequency cutoff with a radial C^3
// polynomial symbol (1 on [0,Q/2], 0 beyond Q). Bounded directions are
// reflected evenly onto a periodic box before the cutoff.

RTorus smooth(const RTorus& f, double Q);
RWindow smooth(const RWindow& f, double Q);

/** Boundary-vanishing smoother on F-space window fields (the tilde variant):
 *  reflection extension onto the margin box {-3<theta<3}x{-1<t<2} with a
 *  compact cutoff, mollification at scale N, then subtraction of
 *  eta(t)*trace(t=0) and eta(1-t)*trace(t=1). Output vanishes identically on
 *  the t=0 and t=1 rows. Input must vanish there up to `tol`. */
RWindow smooth_vanishing(const RWindow& phi, double N, double tol = 1e-9);

struct VanishingSmoothParts {
    RWindow out;
    Tensor trace0, trace1;  // mollified-extension traces on the theta-box x torus
};
VanishingSmoothParts smooth_vanishing_parts(const RWindow& phi, double N, double tol = 1e-9);

/** eta cutoff of the construction: 1 for |t|<=1/6, 0 for |t|>=1/3. */
double eta_cutoff(double t);

}  // namespace hcma

#endif
