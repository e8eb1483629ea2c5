#include "hcma/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace hcma {

namespace {
int g_workers = static_cast<int>(std::thread::hardware_concurrency());
}

int worker_count() { return g_workers > 0 ? g_workers : 1; }
void set_worker_count(int n) { g_workers = n > 0 ? n : 1; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int nw = worker_count();
    if (nw <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(nw, n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::exception_ptr err;
    std::mutex err_mtx;
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nthreads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mtx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace hcma

namespace hcma::fft {

namespace {

std::mutex g_plan_mtx;

struct PlanKey {
    int nx, ny, sign;
    bool operator<(const PlanKey& o) const {
        if (nx != o.nx) return nx < o.nx;
        if (ny != o.ny) return ny < o.ny;
        return sign < o.sign;
    }
};

// In-place plans with FFTW_ESTIMATE do not touch the buffer during planning,
// and fftw_execute_dft on a fresh buffer is thread safe.
fftw_plan get_plan(int nx, int ny, int sign) {
    static std::map<PlanKey, fftw_plan> cache;
    std::lock_guard<std::mutex> lk(g_plan_mtx);
    const PlanKey key{nx, ny, sign};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cplx> tmp(static_cast<std::size_t>(nx) * (ny > 0 ? ny : 1));
    auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
    fftw_plan plan = (ny <= 0) ? fftw_plan_dft_1d(nx, p, p, sign, FFTW_ESTIMATE)
                               : fftw_plan_dft_2d(ny, nx, p, p, sign, FFTW_ESTIMATE);
    cache.emplace(key, plan);
    return plan;
}

void run(std::vector<cplx>& a, int nx, int ny, int sign) {
    fftw_plan plan = get_plan(nx, ny, sign);
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_execute_dft(plan, p, p);
    if (sign == FFTW_BACKWARD) {
        const double s = 1.0 / static_cast<double>(a.size());
        for (auto& v : a) v *= s;
    }
}

}  // namespace

void fwd(std::vector<cplx>& a) { run(a, static_cast<int>(a.size()), 0, FFTW_FORWARD); }
void inv(std::vector<cplx>& a) { run(a, static_cast<int>(a.size()), 0, FFTW_BACKWARD); }
void fwd2(std::vector<cplx>& a, int nx, int ny) { run(a, nx, ny, FFTW_FORWARD); }
void inv2(std::vector<cplx>& a, int nx, int ny) { run(a, nx, ny, FFTW_BACKWARD); }

}  // namespace hcma::fft
