#include "art/kernels.hpp"

#include <atomic>

namespace art::kernels {

namespace {
std::atomic<long long> g_threshold{1 << 16};
}

long long parallel_threshold() { return g_threshold.load(std::memory_order_relaxed); }

void set_parallel_threshold(long long ops) { g_threshold.store(ops, std::memory_order_relaxed); }

void matvec_serial(const double* w, const double* x, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* wrow = w + static_cast<std::size_t>(i) * cols;
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) acc += wrow[j] * x[j];
        y[i] = acc;
    }
}

void matvec(const double* w, const double* x, double* y, int rows, int cols) {
    const long long work = static_cast<long long>(rows) * cols;
    if (work < parallel_threshold()) {
        matvec_serial(w, x, y, rows, cols);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        const double* wrow = w + static_cast<std::size_t>(i) * cols;
        double acc = 0.0;
        for (int j = 0; j < cols; ++j) acc += wrow[j] * x[j];
        y[i] = acc;
    }
}

void matvec_grad_x_serial(const double* w, const double* gy, double* gx, int rows, int cols) {
    for (int j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < rows; ++i) acc += w[static_cast<std::size_t>(i) * cols + j] * gy[i];
        gx[j] += acc;
    }
}

void matvec_grad_x(const double* w, const double* gy, double* gx, int rows, int cols) {
    const long long work = static_cast<long long>(rows) * cols;
    if (work < parallel_threshold()) {
        matvec_grad_x_serial(w, gy, gx, rows, cols);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (int i = 0; i < rows; ++i) acc += w[static_cast<std::size_t>(i) * cols + j] * gy[i];
        gx[j] += acc;
    }
}

void matvec_grad_w_serial(const double* gy, const double* x, double* gw, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double* gwrow = gw + static_cast<std::size_t>(i) * cols;
        const double gyi = gy[i];
        for (int j = 0; j < cols; ++j) gwrow[j] += gyi * x[j];
    }
}

void matvec_grad_w(const double* gy, const double* x, double* gw, int rows, int cols) {
    const long long work = static_cast<long long>(rows) * cols;
    if (work < parallel_threshold()) {
        matvec_grad_w_serial(gy, x, gw, rows, cols);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        double* gwrow = gw + static_cast<std::size_t>(i) * cols;
        const double gyi = gy[i];
        for (int j = 0; j < cols; ++j) gwrow[j] += gyi * x[j];
    }
}

void mul_accum(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

}  // namespace art::kernels
