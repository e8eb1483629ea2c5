#ifndef HCMA_MESH_HPP
#define HCMA_MESH_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hcma/fields.hpp"

namespace hcma {

// ---------------------------------------------------------------------------
// Stadium curve: straight lines {t=0,1} for |theta| <= Theta, closed by two
// cap arcs. Each cap is a pair of half-superellipse arcs
//   theta = +-(Theta + w (1 - |1-2t|^q)^(1/q)),
// giving C^(q-1) contact with the straight parts. The master curve (Theta=1)
// satisfies {0<t<1,|th|<1} subset R~ subset {0<t<1,|th|<7/4} for w <= 3/4.
// ---------------------------------------------------------------------------
struct StadiumCurve {
    double Theta = 6.0;
    double w = 0.5;
    int q = 4;

    double bulge(double t) const {  // in [0,1]
        const double u = std::abs(1.0 - 2.0 * t);
        const double uq = std::pow(u, q);
        return std::pow(std::max(0.0, 1.0 - uq), 1.0 / q);
    }
    double halfwidth(double t) const { return Theta + w * bulge(t); }
    double theta_max() const { return Theta + w; }
    /** For |th| in (Theta, Theta+w]: the t-interval (t_lo, t_hi) where the
     *  vertical line meets the cap interior. */
    void cap_t_range(double absth, double& t_lo, double& t_hi) const {
        const double sigma = std::clamp((absth - Theta) / w, 0.0, 1.0);
        const double u = std::pow(std::max(0.0, 1.0 - std::pow(sigma, q)), 1.0 / q);
        t_lo = 0.5 * (1.0 - u);
        t_hi = 0.5 * (1.0 + u);
    }
    bool inside(double theta, double t) const {
        return t > 0.0 && t < 1.0 && std::abs(theta) < halfwidth(t);
    }
};

// ---------------------------------------------------------------------------
// Boundary samples of the stadium, ordered along the closed curve:
// bottom row west->east, east cap by increasing t, top row east->west,
// west cap by decreasing t. Both lattice boundary nodes and cap crossing
// points appear here; Shortley-Weller stencils reference them by index.
// ---------------------------------------------------------------------------
struct BoundaryPoint {
    double theta = 0.0, t = 0.0;
    double arclen = 0.0;  // position along the loop
};

class StripMesh {
  public:
    StripMesh() = default;
    /** h must divide Theta, Theta+w, 1 and the window half-width exactly. */
    StripMesh(const StadiumCurve& curve, int nt);

    const StadiumCurve& curve() const { return curve_; }
    int nt() const { return nt_; }
    double h() const { return h_; }
    int ncols() const { return ncols_; }
    double theta0() const { return theta0_; }
    double theta_of(int j) const { return theta0_ + j * h_; }
    double t_of(int i) const { return i * h_; }
    int col_of(double theta) const { return static_cast<int>(std::lround((theta - theta0_) / h_)); }

    std::size_t lattice_size() const { return static_cast<std::size_t>(ncols_) * (nt_ + 1); }
    std::size_t lat(int j, int i) const { return static_cast<std::size_t>(i) * ncols_ + j; }

    int interior_count() const { return static_cast<int>(interior_.size()); }
    int interior_index(int j, int i) const { return idx_[lat(j, i)]; }
    std::pair<int, int> interior_node(int k) const { return interior_[k]; }
    bool is_boundary_node(int j, int i) const { return bnode_[lat(j, i)] >= 0; }
    int boundary_point_of_node(int j, int i) const { return bnode_[lat(j, i)]; }

    const std::vector<BoundaryPoint>& boundary() const { return bpts_; }
    double loop_length() const { return loop_length_; }

    /** Solve the 5-point Dirichlet problem: Laplace u = rhs with u = g on the
     *  boundary samples. rhs indexed by interior node, g by boundary point. */
    std::vector<double> solve(const std::vector<double>& rhs,
                              const std::vector<double>& g) const;
    /** Iterative fallback solver (BiCGSTAB), used for the two-solver
     *  agreement check. */
    std::vector<double> solve_iterative(const std::vector<double>& rhs,
                                        const std::vector<double>& g) const;

    /** Residual of the discrete operator on given interior values. */
    double residual(const std::vector<double>& u, const std::vector<double>& rhs,
                    const std::vector<double>& g) const;

    struct Stencil {
        // neighbor contribution: either interior (idx>=0) or boundary (bp>=0)
        struct Arm {
            int interior = -1;
            int bp = -1;
            double coeff = 0.0;
            double frac = 1.0;  // arm length in units of h
        };
        Arm arm[4];  // W,E,S,N
        double diag = 0.0;
    };
    const Stencil& stencil(int k) const { return stencils_[k]; }

    /** Cut-aware first derivative of an interior-node field along axis 0
     *  (theta) or 1 (t) at interior node k; boundary values supplied. */
    double node_deriv(int k, int axis, const std::vector<double>& u,
                      const std::vector<double>& g) const;
    /** Discrete Laplacian at interior node k. */
    double node_laplace(int k, const std::vector<double>& u, const std::vector<double>& g) const;

  private:
    StadiumCurve curve_;
    int nt_ = 0, ncols_ = 0;
    double h_ = 0.0, theta0_ = 0.0, loop_length_ = 0.0;
    std::vector<int> idx_;                  // lattice -> interior index or -1
    std::vector<int> bnode_;                // lattice -> boundary point index or -1
    std::vector<std::pair<int, int>> interior_;
    std::vector<BoundaryPoint> bpts_;
    std::vector<Stencil> stencils_;
    Eigen::SparseMatrix<double> L_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;

    int add_bpoint(double theta, double t);
    void build();
};

// ---------------------------------------------------------------------------
// Polar disc mesh, radii staggered away from the origin: r_i = (i+1/2)/nr,
// angles alpha_j = 2 pi j / na. The flux coefficient at the inner face of the
// first ring vanishes, so no pole condition is needed. Dirichlet data lives
// on the r=1 ring at the same angles.
// ---------------------------------------------------------------------------
class DiscMesh {
  public:
    DiscMesh() = default;
    DiscMesh(int nr, int na);

    int nr() const { return nr_; }
    int na() const { return na_; }
    double dr() const { return 1.0 / nr_; }
    double r_of(int i) const { return (i + 0.5) * dr(); }
    double alpha_of(int j) const { return 2.0 * PI * j / na_; }
    std::size_t nodes() const { return static_cast<std::size_t>(nr_) * na_; }
    std::size_t at(int i, int j) const { return static_cast<std::size_t>(i) * na_ + j; }

    std::vector<double> solve(const std::vector<double>& rhs,
                              const std::vector<double>& g) const;
    std::vector<double> solve_iterative(const std::vector<double>& rhs,
                                        const std::vector<double>& g) const;
    double residual(const std::vector<double>& u, const std::vector<double>& rhs,
                    const std::vector<double>& g) const;

  private:
    int nr_ = 0, na_ = 0;
    Eigen::SparseMatrix<double> L_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
    void build();
};

// Product fields over the meshes.
template <class T>
struct StripField {
    std::shared_ptr<const StripMesh> mesh;
    TorusGrid tg;
    std::vector<T> lattice;  // lattice node x torus; outside nodes zero
    std::vector<T> bvals;    // boundary point x torus

    StripField() = default;
    StripField(std::shared_ptr<const StripMesh> m, const TorusGrid& g)
        : mesh(std::move(m)),
          tg(g),
          lattice(mesh->lattice_size() * g.size(), T{}),
          bvals(mesh->boundary().size() * g.size(), T{}) {}
    std::size_t lat(int j, int i, std::size_t tb) const {
        return mesh->lat(j, i) * tg.size() + tb;
    }
    std::size_t bp(int b, std::size_t tb) const {
        return static_cast<std::size_t>(b) * tg.size() + tb;
    }
    TorusField<T> slice(int j, int i) const {
        TorusField<T> s(tg);
        const std::size_t base = mesh->lat(j, i) * tg.size();
        std::copy(lattice.begin() + base, lattice.begin() + base + tg.size(), s.v.begin());
        return s;
    }
};

template <class T>
struct DiscProductField {
    DiscMesh const* mesh = nullptr;
    TorusGrid tg;
    std::vector<T> v;      // interior node x torus
    std::vector<T> bring;  // boundary ring (na) x torus

    DiscProductField() = default;
    DiscProductField(const DiscMesh& m, const TorusGrid& g)
        : mesh(&m), tg(g), v(m.nodes() * g.size(), T{}),
          bring(static_cast<std::size_t>(m.na()) * g.size(), T{}) {}
    std::size_t at(int i, int j, std::size_t tb) const {
        return mesh->at(i, j) * tg.size() + tb;
    }
};

}  // namespace hcma

#endif
