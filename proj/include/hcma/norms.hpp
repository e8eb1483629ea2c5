#ifndef HCMA_NORMS_HPP
#define HCMA_NORMS_HPP

#include <optional>

#include "hcma/fields.hpp"

namespace hcma {

/** Holder index r = m + alpha. Integer r means plain C^m (no seminorm). */
struct HolderIndex {
    int m = 0;
    double alpha = 0.0;

    static HolderIndex of(double r) {
        HolderIndex h;
        h.m = static_cast<int>(std::floor(r + 1e-12));
        h.alpha = r - h.m;
        if (h.alpha < 1e-12) h.alpha = 0.0;
        return h;
    }
    double value() const { return m + alpha; }
};

struct NormReport {
    HolderIndex index;
    double value = 0.0;
    long seminorm_pairs_sampled = 0;
    bool surrogate = false;  // true when the spectral proxy was used
};

// A dense tensor over labelled axes; the common carrier the norm code works
// on. Axis 0 is slowest. Complex data is carried as (re,im) pairs.
struct AxisDesc {
    int n = 1;
    double h = 1.0;
    bool periodic = false;
};

struct Tensor {
    std::vector<AxisDesc> ax;
    std::vector<double> re;
    std::vector<double> im;  // empty for real tensors
    bool complex_valued() const { return !im.empty(); }
    std::size_t size() const { return re.size(); }
};

Tensor as_tensor(const RTorus& f);
Tensor as_tensor(const CTorus& f);
Tensor as_tensor(const RWindow& f);
Tensor as_tensor(const PathField& f);
Tensor as_tensor(const RBDisc& f);
Tensor as_tensor(const CBDisc& f);

/** Drop axes along which the field is exactly constant (their derivatives
 *  vanish identically and pairs along them contribute nothing). */
Tensor collapse_invariant_axes(Tensor t);

/** Discrete Holder norm: max sup-norm of all (mixed) finite-difference
 *  derivatives of order <= m, plus the alpha seminorm of the m-th derivatives
 *  over the deterministic pair sample (full along-axis enumeration for axes
 *  of <= 64 points, seeded stratified dyadic sampling above). */
NormReport holder_norm(const Tensor& t, HolderIndex r);

template <class Field>
NormReport holder_norm(const Field& f, HolderIndex r) {
    return holder_norm(collapse_invariant_axes(as_tensor(f)), r);
}
template <class Field>
double hnorm(const Field& f, double r) {
    return holder_norm(f, HolderIndex::of(r)).value;
}

/** |u|_nu^(rho-kappa) / (|u|_kappa^(rho-nu) |u|_rho^(nu-kappa)); 1 for the zero field. */
double interpolation_check(const Tensor& t, HolderIndex kappa, HolderIndex nu, HolderIndex rho);
template <class Field>
double interpolation_check(const Field& f, double kappa, double nu, double rho) {
    return interpolation_check(collapse_invariant_axes(as_tensor(f)), HolderIndex::of(kappa),
                               HolderIndex::of(nu), HolderIndex::of(rho));
}

/** log of the band-weighted coefficient proxy max_k |u_k| (1+|k|)^r, usable at
 *  indices far beyond what grid differencing supports. Bounded axes are
 *  reflected evenly before the transform. Returns -inf for the zero field. */
double log_spectral_surrogate(const RTorus& f, double r);
double log_spectral_surrogate(const RWindow& f, double r);

/** Max grid resolution order supported by the tensor (smallest axis budget). */
int max_fd_order(const Tensor& t);

}  // namespace hcma

#endif
