#ifndef HCMA_FFT_HPP
#define HCMA_FFT_HPP

#include <vector>

#include "hcma/base.hpp"

namespace hcma::fft {

// Thin FFTW wrapper. Plan creation is serialized behind a mutex; execution on
// caller-owned buffers is thread safe. All transforms are unnormalized
// forward, normalized inverse (1/N).

void fwd(std::vector<cplx>& a);
void inv(std::vector<cplx>& a);

// 2D, row-major a[iy*nx+ix].
void fwd2(std::vector<cplx>& a, int nx, int ny);
void inv2(std::vector<cplx>& a, int nx, int ny);

/** Signed integer frequency of bin k in an n-point transform. */
inline int freq(int k, int n) { return (k <= n / 2) ? k : k - n; }

}  // namespace hcma::fft

#endif
