#ifndef HCMA_POTENTIAL_HPP
#define HCMA_POTENTIAL_HPP

#include "hcma/disc_family.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// The assembled HCMA potential Phi = P + Q and its diagnostics. P lives on
// the domain nodes x torus, Q depends on tau only.
// ---------------------------------------------------------------------------
struct PotentialBundle {
    const LeafDomain* dom = nullptr;
    std::vector<double> P_int, P_bd;    // [node*T+tb], [b*T+tb]
    std::vector<double> Q_int, Q_bd;    // [node], [b]
    std::vector<double> Phi_int, Phi_bd;

    double exactness_defect = 0.0;   // mean of the pulled-back 1-form
    double q_consistency = 0.0;      // z-variation of the Q-equation source
    double hcma_residual = 0.0;      // scaled determinant residual
    double boundary_residual = 0.0;  // sup |Phi - F| on the boundary
    double positivity_min = 0.0;     // min slice metric coefficient
    double q_solve_residual = 0.0;
};

/** Pull (d rho0 + h) back by the inverse foliation map, subtract d rho0, and
 *  antidifferentiate per tau-slice; normalized so p^tau vanishes at the torus
 *  origin. Fills P_int/P_bd of the bundle and the exactness defect. */
void recover_P(const LeafDomain& dom, const Background& bg, const DiscFamilyState& state,
               const FoliationMap& map, PotentialBundle& out, double exactness_tol = 1e-3);

/** Solve the Q equation from the P Hessian blocks; fills Q, q_consistency and
 *  the positivity diagnostics. */
void compute_Q(const LeafDomain& dom, const Background& bg, const DiscFamilyState& state,
               PotentialBundle& out);

/** Phi = P + Q plus the determinant/boundary checks. */
void assemble_and_check(const LeafDomain& dom, const Background& bg,
                        const DiscFamilyState& state, PotentialBundle& out);

/** Full pipeline: disc family must already be converged. */
PotentialBundle assemble_potential(const LeafDomain& dom, const Background& bg,
                                   const DiscFamilyState& state, const FoliationMap& map);

// ---------------------------------------------------------------------------
// Leafwise harmonic extension through a foliation.
// ---------------------------------------------------------------------------
struct TangentField {
    std::vector<double> int_, bd_;
    double leaf_residual = 0.0;
};

TangentField leafwise_harmonic(const LeafDomain& dom, const FoliationMap& map,
                               const std::vector<double>& g_bd);

/** Kernel-direction identity: sup |df/dtau + (P_{tau zbar} g^{zbar z}) o A|. */
double kernel_identity_residual(const LeafDomain& dom, const Background& bg,
                                const DiscFamilyState& state, const FoliationMap& map,
                                const PotentialBundle& bundle);

// ---------------------------------------------------------------------------
// Linearization / integration comparison along a segment of boundary data.
// ---------------------------------------------------------------------------
struct ComparisonReport {
    double diff_sup = 0.0;          // |Phi1 - Phi0|_0
    double integral_gap = 0.0;      // |Phi1 - Phi0 - trapz(H_lambda)|_0
    double remainder_full = 0.0;    // |Z| at the full step
    double remainder_half = 0.0;    // |Z| at half the step
    double remainder_ratio = 0.0;   // expected ~ 4
    int n_lambda = 0;
};

ComparisonReport linearized_comparison(const LeafDomain& dom, const Background& bg,
                                       const std::vector<double>& F0_bd,
                                       const std::vector<double>& F1_bd, int n_lambda,
                                       const IterationConfig& cfg);

/** Solve + assemble for one boundary datum (shared by the comparison sweep
 *  and the drivers). */
struct SolveResult {
    DiscFamilyState state;
    FoliationMap map;
    PotentialBundle bundle;
};
SolveResult solve_hcma(const LeafDomain& dom, const Background& bg,
                       const std::vector<double>& F_bd, const IterationConfig& cfg);

}  // namespace hcma

#endif
