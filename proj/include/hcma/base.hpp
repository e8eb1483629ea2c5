#ifndef HCMA_BASE_HPP
#define HCMA_BASE_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hcma {

using cplx = std::complex<double>;
inline constexpr double PI = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

/** Runtime failure of a solver precondition or invariant. */
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw SolverError(msg);
}

/** Global worker count for slice-parallel loops (reductions stay serial). */
int worker_count();
void set_worker_count(int n);

/** Deterministic static partition of [0,n) over the worker pool.
 *  Every slice writes to its own output; results do not depend on thread count. */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/** splitmix64; used instead of std::uniform_* so corpora are identical across platforms. */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double next_sym() { return 2.0 * next_unit() - 1.0; }

  private:
    std::uint64_t state_;
};

/** C^3 polynomial step of degree 7: 1 on (-inf,0], 0 on [1,inf). */
inline double smoothstep7(double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    const double x4 = x * x * x * x;
    return 1.0 - x4 * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

/** Low-pass symbol: 1 on [0,1/2], 0 on [1,inf), smoothstep7 in between. */
inline double lowpass_symbol(double s) {
    return smoothstep7(2.0 * s - 1.0);
}

}  // namespace hcma

#endif
