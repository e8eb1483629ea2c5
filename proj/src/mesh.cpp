#include "hcma/mesh.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <map>

namespace hcma {

// ------------------------------- StripMesh ---------------------------------

StripMesh::StripMesh(const StadiumCurve& curve, int nt) : curve_(curve), nt_(nt) {
    require(nt >= 4, "StripMesh: nt too small");
    h_ = 1.0 / nt;
    const double tmax = curve_.theta_max();
    const double cols = tmax / h_;
    require(std::abs(cols - std::lround(cols)) < 1e-9,
            "StripMesh: Theta + w must be an integer multiple of h");
    const double straight = curve_.Theta / h_;
    require(std::abs(straight - std::lround(straight)) < 1e-9,
            "StripMesh: Theta must be an integer multiple of h");
    ncols_ = 2 * static_cast<int>(std::lround(cols)) + 1;
    theta0_ = -tmax;
    build();
}

int StripMesh::add_bpoint(double theta, double t) {
    bpts_.push_back(BoundaryPoint{theta, t, 0.0});
    return static_cast<int>(bpts_.size()) - 1;
}

void StripMesh::build() {
    idx_.assign(lattice_size(), -1);
    bnode_.assign(lattice_size(), -1);

    // classify nodes
    for (int i = 0; i <= nt_; ++i) {
        const double t = t_of(i);
        for (int j = 0; j < ncols_; ++j) {
            const double th = theta_of(j);
            if (curve_.inside(th, t)) {
                idx_[lat(j, i)] = static_cast<int>(interior_.size());
                interior_.emplace_back(j, i);
            }
        }
    }

    // boundary points: ordered loop. Track lattice boundary nodes so values
    // can be shared between the loop and the lattice rows.
    std::map<std::pair<int, int>, int> lattice_bp;
    const int jW = col_of(-curve_.Theta), jE = col_of(curve_.Theta);
    // bottom row west->east
    for (int j = jW; j <= jE; ++j) {
        const int b = add_bpoint(theta_of(j), 0.0);
        lattice_bp[{j, 0}] = b;
        bnode_[lat(j, 0)] = b;
    }
    // east cap, increasing t: horizontal crossings (c(t_i), t_i) and vertical
    // crossings (theta_j, t_cross), merged by t.
    struct CapPt { double t, theta; };
    auto build_cap = [&](int sgn) {
        std::vector<CapPt> pts;
        for (int i = 1; i < nt_; ++i)
            pts.push_back({t_of(i), sgn * curve_.halfwidth(t_of(i))});
        for (int j = 0; j < ncols_; ++j) {
            const double th = theta_of(j);
            if (sgn * th <= curve_.Theta || std::abs(th) > curve_.theta_max()) continue;
            double t_lo, t_hi;
            curve_.cap_t_range(std::abs(th), t_lo, t_hi);
            if (t_lo < t_hi) {
                pts.push_back({t_lo, th});
                pts.push_back({t_hi, th});
            }
        }
        std::sort(pts.begin(), pts.end(),
                  [](const CapPt& a, const CapPt& b) { return a.t < b.t; });
        return pts;
    };
    for (const CapPt& p : build_cap(+1)) add_bpoint(p.theta, p.t);
    // top row east->west
    for (int j = jE; j >= jW; --j) {
        const int b = add_bpoint(theta_of(j), 1.0);
        lattice_bp[{j, nt_}] = b;
        bnode_[lat(j, nt_)] = b;
    }
    {
        auto west = build_cap(-1);
        for (auto it = west.rbegin(); it != west.rend(); ++it) add_bpoint(it->theta, it->t);
    }
    // arclength along the loop
    double s = 0.0;
    for (std::size_t k = 0; k < bpts_.size(); ++k) {
        if (k > 0)
            s += std::hypot(bpts_[k].theta - bpts_[k - 1].theta, bpts_[k].t - bpts_[k - 1].t);
        bpts_[k].arclen = s;
    }
    loop_length_ = s + std::hypot(bpts_.back().theta - bpts_.front().theta,
                                  bpts_.back().t - bpts_.front().t);

    // lookup of cap points by coordinates (exact construction match)
    std::map<std::pair<long, long>, int> bp_lookup;
    auto key_of = [&](double th, double t) {
        return std::make_pair(static_cast<long>(std::llround(th * 1e9)),
                              static_cast<long>(std::llround(t * 1e9)));
    };
    for (std::size_t k = 0; k < bpts_.size(); ++k) {
        auto key = key_of(bpts_[k].theta, bpts_[k].t);
        if (!bp_lookup.count(key)) bp_lookup[key] = static_cast<int>(k);
    }
    auto find_bp = [&](double th, double t) {
        auto it = bp_lookup.find(key_of(th, t));
        require(it != bp_lookup.end(), "StripMesh: missing boundary point");
        return it->second;
    };

    // Shortley-Weller stencils
    stencils_.resize(interior_.size());
    std::vector<Eigen::Triplet<double>> trips;
    const double h2 = h_ * h_;
    for (int k = 0; k < static_cast<int>(interior_.size()); ++k) {
        const auto [j, i] = interior_[k];
        const double th = theta_of(j), t = t_of(i);
        double frac[4] = {1.0, 1.0, 1.0, 1.0};  // W,E,S,N arm lengths in units of h
        Stencil st;
        const int dj[4] = {-1, 1, 0, 0};
        const int di[4] = {0, 0, -1, 1};
        for (int a = 0; a < 4; ++a) {
            const int jj = j + dj[a], ii = i + di[a];
            if (idx_[lat(jj, ii)] >= 0) {
                st.arm[a].interior = idx_[lat(jj, ii)];
                continue;
            }
            if ((ii == 0 || ii == nt_) && bnode_[lat(jj, ii)] >= 0) {
                st.arm[a].bp = bnode_[lat(jj, ii)];
                continue;
            }
            // neighbor outside: crossing point
            if (a <= 1) {  // horizontal crossing at +-c(t)
                const double cx = (a == 1 ? 1.0 : -1.0) * curve_.halfwidth(t);
                frac[a] = std::abs(cx - th) / h_;
                st.arm[a].bp = find_bp(cx, t);
            } else {  // vertical crossing with the cap
                double t_lo, t_hi;
                curve_.cap_t_range(std::abs(th), t_lo, t_hi);
                const double tc = (a == 2) ? t_lo : t_hi;
                frac[a] = std::abs(tc - t) / h_;
                st.arm[a].bp = find_bp(th, tc);
            }
            frac[a] = std::clamp(frac[a], 1e-6, 1.0);
        }
        double diag = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
            const double a = frac[2 * axis], b = frac[2 * axis + 1];
            st.arm[2 * axis].coeff = 2.0 / (a * (a + b)) / h2;
            st.arm[2 * axis + 1].coeff = 2.0 / (b * (a + b)) / h2;
            diag -= 2.0 / (a * b) / h2;
        }
        for (int a = 0; a < 4; ++a) st.arm[a].frac = frac[a];
        st.diag = diag;
        for (int a = 0; a < 4; ++a)
            if (st.arm[a].interior >= 0)
                trips.emplace_back(k, st.arm[a].interior, st.arm[a].coeff);
        trips.emplace_back(k, k, st.diag);
        stencils_[k] = st;
    }

    L_.resize(static_cast<int>(interior_.size()), static_cast<int>(interior_.size()));
    L_.setFromTriplets(trips.begin(), trips.end());
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(L_);
    require(lu_->info() == Eigen::Success, "StripMesh: factorization failed");
}

namespace {
Eigen::VectorXd sw_rhs(const std::vector<StripMesh::Stencil>& stencils,
                       const std::vector<double>& rhs, const std::vector<double>& g) {
    Eigen::VectorXd b(static_cast<long>(rhs.size()));
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        double acc = rhs[k];
        for (int a = 0; a < 4; ++a) {
            const auto& arm = stencils[k].arm[a];
            if (arm.bp >= 0) acc -= arm.coeff * g[arm.bp];
        }
        b[static_cast<long>(k)] = acc;
    }
    return b;
}
}  // namespace

std::vector<double> StripMesh::solve(const std::vector<double>& rhs,
                                     const std::vector<double>& g) const {
    require(rhs.size() == interior_.size() && g.size() == bpts_.size(),
            "StripMesh::solve: size mismatch");
    Eigen::VectorXd b = sw_rhs(stencils_, rhs, g);
    Eigen::VectorXd x = lu_->solve(b);
    require(lu_->info() == Eigen::Success, "StripMesh: singular discrete system");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> StripMesh::solve_iterative(const std::vector<double>& rhs,
                                               const std::vector<double>& g) const {
    Eigen::VectorXd b = sw_rhs(stencils_, rhs, g);
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-13);
    it.setMaxIterations(20000);
    it.compute(L_);
    Eigen::VectorXd x = it.solve(b);
    require(it.info() == Eigen::Success, "StripMesh: iterative solve failed");
    return std::vector<double>(x.data(), x.data() + x.size());
}

double StripMesh::node_deriv(int k, int axis, const std::vector<double>& u,
                             const std::vector<double>& g) const {
    const auto& st = stencils_[k];
    const auto& L = st.arm[2 * axis];
    const auto& R = st.arm[2 * axis + 1];
    const double a = L.frac * h_, b = R.frac * h_;
    const double uL = (L.interior >= 0) ? u[L.interior] : g[L.bp];
    const double uR = (R.interior >= 0) ? u[R.interior] : g[R.bp];
    const double u0 = u[k];
    return (-b / (a * (a + b))) * uL + ((b - a) / (a * b)) * u0 + (a / (b * (a + b))) * uR;
}

double StripMesh::node_laplace(int k, const std::vector<double>& u,
                               const std::vector<double>& g) const {
    const auto& st = stencils_[k];
    double acc = st.diag * u[k];
    for (int a = 0; a < 4; ++a) {
        const auto& arm = st.arm[a];
        if (arm.interior >= 0) acc += arm.coeff * u[arm.interior];
        if (arm.bp >= 0) acc += arm.coeff * g[arm.bp];
    }
    return acc;
}

double StripMesh::residual(const std::vector<double>& u, const std::vector<double>& rhs,
                           const std::vector<double>& g) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        double acc = stencils_[k].diag * u[k] - rhs[k];
        for (int a = 0; a < 4; ++a) {
            const auto& arm = stencils_[k].arm[a];
            if (arm.interior >= 0) acc += arm.coeff * u[arm.interior];
            if (arm.bp >= 0) acc += arm.coeff * g[arm.bp];
        }
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

// -------------------------------- DiscMesh ---------------------------------

DiscMesh::DiscMesh(int nr, int na) : nr_(nr), na_(na) {
    require(nr >= 3 && na >= 8 && na % 4 == 0, "DiscMesh: bad dimensions");
    build();
}

void DiscMesh::build() {
    const double dr_ = dr();
    const double da = 2.0 * PI / na_;
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < nr_; ++i) {
        const double r = r_of(i);
        const double rm = r - 0.5 * dr_, rp = r + 0.5 * dr_;
        for (int j = 0; j < na_; ++j) {
            const int k = static_cast<int>(at(i, j));
            double diag = 0.0;
            if (i > 0) {
                trips.emplace_back(k, static_cast<int>(at(i - 1, j)), rm / (r * dr_ * dr_));
                diag -= rm / (r * dr_ * dr_);
            }
            // i == 0: the inner face sits at r = 0 with zero flux coefficient
            if (i < nr_ - 1) {
                trips.emplace_back(k, static_cast<int>(at(i + 1, j)), rp / (r * dr_ * dr_));
                diag -= rp / (r * dr_ * dr_);
            } else {
                // Dirichlet ghost at r = 1 from the quadratic through the
                // boundary value and the last two rings:
                //   u_ghost = 8g/3 - 2u_i + u_{i-1}/3
                diag -= 3.0 * rp / (r * dr_ * dr_);
                trips.emplace_back(k, static_cast<int>(at(i - 1, j)),
                                   rp / (3.0 * r * dr_ * dr_));
            }
            const double ca = 1.0 / (r * r * da * da);
            trips.emplace_back(k, static_cast<int>(at(i, (j + 1) % na_)), ca);
            trips.emplace_back(k, static_cast<int>(at(i, (j + na_ - 1) % na_)), ca);
            diag -= 2.0 * ca;
            trips.emplace_back(k, k, diag);
        }
    }
    L_.resize(static_cast<int>(nodes()), static_cast<int>(nodes()));
    L_.setFromTriplets(trips.begin(), trips.end());
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(L_);
    require(lu_->info() == Eigen::Success, "DiscMesh: factorization failed");
}

namespace {
Eigen::VectorXd disc_rhs(int nr, int na, double dr, const std::vector<double>& rhs,
                         const std::vector<double>& g) {
    Eigen::VectorXd b(static_cast<long>(rhs.size()));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * na + j;
            double acc = rhs[k];
            if (i == nr - 1) {
                const double r = (i + 0.5) * dr, rp = r + 0.5 * dr;
                acc -= (8.0 / 3.0) * rp / (r * dr * dr) * g[j];
            }
            b[static_cast<long>(k)] = acc;
        }
    return b;
}
}  // namespace

std::vector<double> DiscMesh::solve(const std::vector<double>& rhs,
                                    const std::vector<double>& g) const {
    require(rhs.size() == nodes() && g.size() == static_cast<std::size_t>(na_),
            "DiscMesh::solve: size mismatch");
    Eigen::VectorXd b = disc_rhs(nr_, na_, dr(), rhs, g);
    Eigen::VectorXd x = lu_->solve(b);
    require(lu_->info() == Eigen::Success, "DiscMesh: singular discrete system");
    return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<double> DiscMesh::solve_iterative(const std::vector<double>& rhs,
                                              const std::vector<double>& g) const {
    Eigen::VectorXd b = disc_rhs(nr_, na_, dr(), rhs, g);
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-13);
    it.setMaxIterations(20000);
    it.compute(L_);
    Eigen::VectorXd x = it.solve(b);
    require(it.info() == Eigen::Success, "DiscMesh: iterative solve failed");
    return std::vector<double>(x.data(), x.data() + x.size());
}

double DiscMesh::residual(const std::vector<double>& u, const std::vector<double>& rhs,
                          const std::vector<double>& g) const {
    const double dr_ = dr();
    const double da = 2.0 * PI / na_;
    double worst = 0.0;
    for (int i = 0; i < nr_; ++i) {
        const double r = r_of(i);
        const double rm = r - 0.5 * dr_, rp = r + 0.5 * dr_;
        for (int j = 0; j < na_; ++j) {
            double acc = -rhs[at(i, j)];
            double diag = 0.0;
            if (i > 0) {
                acc += rm / (r * dr_ * dr_) * u[at(i - 1, j)];
                diag -= rm / (r * dr_ * dr_);
            }
            if (i < nr_ - 1) {
                acc += rp / (r * dr_ * dr_) * u[at(i + 1, j)];
                diag -= rp / (r * dr_ * dr_);
            } else {
                acc += rp / (r * dr_ * dr_) *
                       ((8.0 / 3.0) * g[j] - 3.0 * u[at(i, j)] + u[at(i - 1, j)] / 3.0);
            }
            const double ca = 1.0 / (r * r * da * da);
            acc += ca * (u[at(i, (j + 1) % na_)] + u[at(i, (j + na_ - 1) % na_)]);
            diag -= 2.0 * ca;
            acc += diag * u[at(i, j)];
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

}  // namespace hcma
