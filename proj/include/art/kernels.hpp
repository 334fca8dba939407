#pragma once

#include <cstddef>

namespace art::kernels {

// Dense kernels behind the autodiff ops. Each has a serial reference
// implementation and an OpenMP dispatch that splits work across rows (or
// columns) once the problem is large enough. Per-element summation order is
// identical in both paths, so results are bit-exact regardless of thread
// count.

// Work threshold (multiply-adds) below which the dispatch stays serial.
long long parallel_threshold();
void set_parallel_threshold(long long ops);

// y = W x, W row-major (rows x cols)
void matvec_serial(const double* w, const double* x, double* y, int rows, int cols);
void matvec(const double* w, const double* x, double* y, int rows, int cols);

// gx += W^T gy
void matvec_grad_x_serial(const double* w, const double* gy, double* gx, int rows, int cols);
void matvec_grad_x(const double* w, const double* gy, double* gx, int rows, int cols);

// gW += gy x^T
void matvec_grad_w_serial(const double* gy, const double* x, double* gw, int rows, int cols);
void matvec_grad_w(const double* gy, const double* x, double* gw, int rows, int cols);

// out[i] += a[i] * b[i]
void mul_accum(const double* a, const double* b, double* out, std::size_t n);

}  // namespace art::kernels
