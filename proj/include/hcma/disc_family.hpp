#ifndef HCMA_DISC_FAMILY_HPP
#define HCMA_DISC_FAMILY_HPP

#include <functional>

#include "hcma/elliptic.hpp"
#include "hcma/norms.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// Background Kahler data on the torus chart: rho0 = |z|^2/2 + psi0 with
// d dbar psi0 small. A = rho0_{z zbar}, S = rho0_{zz}; the |z|^2/2 part only
// ever enters through differences, which are periodic.
// ---------------------------------------------------------------------------
struct Background {
    TorusGrid tg;
    bool flat = true;
    CTorus A;   // 1/2 + psi0_{z zbar}
    CTorus S;   // psi0_{zz}
    CTorus dpsi0;
    TorusInterp dpsi0_interp;

    static Background flat_torus(const TorusGrid& g);
    static Background shifted(const RTorus& psi0);
    /** min over nodes of the background metric coefficient Re A. */
    double metric_min() const;
};

// ---------------------------------------------------------------------------
// A leaf domain is a planar parameter domain (unit disc or stadium strip)
// crossed with the torus; it supplies the elliptic primitives the
// Donaldson-Semmes construction needs. Interior "nodes" are the planar
// evaluation points the potential is assembled on.
// ---------------------------------------------------------------------------
class LeafDomain {
  public:
    struct HoloPair {
        // leafwise-holomorphic pair (f,h); layout [sample * T + tb]
        std::vector<cplx> f_bd, h_bd;
        std::vector<cplx> f_int, h_int;
        std::vector<cplx> f_dtau_int;
    };

    virtual ~LeafDomain() = default;
    virtual const TorusGrid& torus() const = 0;

    virtual std::size_t nbd() const = 0;
    virtual cplx bd_tau(std::size_t b) const = 0;
    virtual std::size_t base_bd() const = 0;

    virtual std::size_t nnodes() const = 0;
    virtual cplx node_tau(std::size_t k) const = 0;

    /** Solve dbar f = dbar h = 0, A conj(f) + S f - h = b on the boundary,
     *  f(base) = 0. */
    virtual HoloPair rh_solve(const std::vector<cplx>& bdata, const CTorus& A,
                              const CTorus& S) const = 0;

    /** Leafwise harmonic extension of real boundary data [b*T+tb]. */
    virtual std::vector<double> harmonic_ext(const std::vector<double>& bdata) const = 0;

    /** One-slice Poisson solve Laplace_tau u = rhs, u = g on the boundary. */
    virtual std::vector<double> poisson_slice(const std::vector<double>& rhs,
                                              const std::vector<double>& g) const = 0;

    /** Planar FD Laplace_tau of a real node field (boundary values supplied). */
    virtual std::vector<double> laplace_tau(const std::vector<double>& u,
                                            const std::vector<double>& u_bd) const = 0;
    /** Planar FD d/dtau of a real node field. */
    virtual std::vector<cplx> dtau(const std::vector<double>& u,
                                   const std::vector<double>& u_bd) const = 0;

    /** Off-node evaluation support (spectral disc only). */
    virtual bool supports_offnode() const { return false; }
    virtual void eval_fh_at(const HoloPair&, cplx, std::vector<cplx>*, std::vector<cplx>*) const {
        throw SolverError("off-node evaluation not supported on this domain");
    }
};

/** Unit disc with spectral boundary machinery; nodes are the polar mesh. */
class DiscDomain : public LeafDomain {
  public:
    DiscDomain(int nr, int na, const TorusGrid& tg);
    const DiscMesh& mesh() const { return mesh_; }

    const TorusGrid& torus() const override { return tg_; }
    std::size_t nbd() const override { return static_cast<std::size_t>(mesh_.na()); }
    cplx bd_tau(std::size_t b) const override { return std::exp(I * mesh_.alpha_of(static_cast<int>(b))); }
    std::size_t base_bd() const override { return static_cast<std::size_t>(3 * mesh_.na() / 4); }
    std::size_t nnodes() const override { return mesh_.nodes(); }
    cplx node_tau(std::size_t k) const override {
        const int i = static_cast<int>(k) / mesh_.na(), j = static_cast<int>(k) % mesh_.na();
        return mesh_.r_of(i) * std::exp(I * mesh_.alpha_of(j));
    }
    HoloPair rh_solve(const std::vector<cplx>& bdata, const CTorus& A,
                      const CTorus& S) const override;
    std::vector<double> harmonic_ext(const std::vector<double>& bdata) const override;
    std::vector<double> poisson_slice(const std::vector<double>& rhs,
                                      const std::vector<double>& g) const override;
    std::vector<double> laplace_tau(const std::vector<double>& u,
                                    const std::vector<double>& u_bd) const override;
    std::vector<cplx> dtau(const std::vector<double>& u,
                           const std::vector<double>& u_bd) const override;
    bool supports_offnode() const override { return true; }
    void eval_fh_at(const HoloPair& fh, cplx tau, std::vector<cplx>* f_out,
                    std::vector<cplx>* h_out) const override;

  private:
    DiscMesh mesh_;
    TorusGrid tg_;
    // coefficient tables of the latest rh_solve are kept inside HoloPair via
    // the boundary values; interior tables are reconstructed with ring FFTs.
    std::vector<cplx> coeffs_from_boundary(const std::vector<cplx>& bd) const;
};

/** Stadium strip with mesh FD machinery; nodes are the interior lattice. */
class StripDomain : public LeafDomain {
  public:
    StripDomain(std::shared_ptr<const StripMesh> mesh, const TorusGrid& tg);
    const StripMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const StripMesh> mesh_ptr() const { return mesh_; }

    const TorusGrid& torus() const override { return tg_; }
    std::size_t nbd() const override { return mesh_->boundary().size(); }
    cplx bd_tau(std::size_t b) const override {
        return cplx(mesh_->boundary()[b].t, mesh_->boundary()[b].theta);
    }
    std::size_t base_bd() const override { return base_bp_; }
    std::size_t nnodes() const override { return static_cast<std::size_t>(mesh_->interior_count()); }
    cplx node_tau(std::size_t k) const override {
        const auto [j, i] = mesh_->interior_node(static_cast<int>(k));
        return cplx(mesh_->t_of(i), mesh_->theta_of(j));
    }
    HoloPair rh_solve(const std::vector<cplx>& bdata, const CTorus& A,
                      const CTorus& S) const override;
    std::vector<double> harmonic_ext(const std::vector<double>& bdata) const override;
    std::vector<double> poisson_slice(const std::vector<double>& rhs,
                                      const std::vector<double>& g) const override;
    std::vector<double> laplace_tau(const std::vector<double>& u,
                                    const std::vector<double>& u_bd) const override;
    std::vector<cplx> dtau(const std::vector<double>& u,
                           const std::vector<double>& u_bd) const override;

  private:
    std::shared_ptr<const StripMesh> mesh_;
    TorusGrid tg_;
    std::size_t base_bp_ = 0;
};

// ---------------------------------------------------------------------------
// Contraction iteration for the holomorphic disc family.
// ---------------------------------------------------------------------------
struct IterationConfig {
    double gamma = 14.0 / 3.0;
    double X = 1.0 / 3.0;
    double l = 0.2;       // low-norm radius of the iteration set
    double H = 0.0;       // high-norm radius; 0 = derive from response constant
    double A_weight = 0.0;  // weighted-norm weight; 0 = derive
    double tol = 1e-11;
    int max_iter = 80;
    bool track_weighted = false;  // record weighted-norm contraction ratios
};

struct DiscFamilyState {
    const LeafDomain* dom = nullptr;
    Background bg;
    std::vector<double> F_bd;  // boundary data [b*T+tb]
    LeafDomain::HoloPair fh;
    IterationConfig cfg;

    int iterations = 0;
    double final_residual = 0.0;          // sup |b| at the fixed point
    std::vector<double> correction_sup;   // per step
    std::vector<double> weighted_norms;   // per step, when tracked
    std::vector<double> contraction_ratios;
};

/** Boundary residual b of the attachment condition for the current (f,h). */
std::vector<cplx> boundary_residual(const LeafDomain& dom, const Background& bg,
                                    const std::vector<double>& F_bd,
                                    const LeafDomain::HoloPair& fh);

/** One contraction step: returns the RH correction (ff, hh). */
LeafDomain::HoloPair disc_iteration_step(const LeafDomain& dom, const Background& bg,
                                         const std::vector<double>& F_bd,
                                         const LeafDomain::HoloPair& fh);

DiscFamilyState solve_disc_family(const LeafDomain& dom, const Background& bg,
                                  const std::vector<double>& F_bd, const IterationConfig& cfg,
                                  const LeafDomain::HoloPair* init = nullptr);

// ---------------------------------------------------------------------------
// Foliation map A_F and its inverse.
// ---------------------------------------------------------------------------
struct FoliationMap {
    const LeafDomain* dom = nullptr;
    std::vector<cplx> fwd_int;  // displacement f at [node*T+tb]
    std::vector<cplx> fwd_bd;   // at boundary samples
    std::vector<cplx> inv_int;  // inverse displacement: z(w) - w at [node*T+tb]
    std::vector<cplx> inv_bd;
    double jacobian_min = 0.0;
    int interp_order = 5;
};

FoliationMap build_foliation_map(const LeafDomain& dom, const DiscFamilyState& state);

/** Sup over nodes of |forward(inverse(w)) - w|. */
double foliation_roundtrip_error(const FoliationMap& map);

/** Solve the family on a torus-shifted copy of the chart and return the sup
 *  difference of f after unshifting; the discrete stand-in for multi-chart
 *  gluing consistency. */
double periodic_consistency(const LeafDomain& dom, const DiscFamilyState& state, double sx,
                            double sy);

/** Measured response constant of the RH solver at index q (probe-based). */
double rh_response_constant(const LeafDomain& dom, const Background& bg, double q);

}  // namespace hcma

#endif
