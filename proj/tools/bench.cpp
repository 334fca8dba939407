// Benchmark comparing the serial reference kernels and batch evaluator
// against their OpenMP counterparts.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "art/kernels.hpp"
#include "art/train.hpp"

using namespace art;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_seconds();
        fn();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

void bench_matvec(int rows, int cols, int iters) {
    Rng rng(42);
    std::vector<double> w(static_cast<std::size_t>(rows) * cols), x(static_cast<std::size_t>(cols)),
        y(static_cast<std::size_t>(rows));
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : x) v = rng.uniform(-1, 1);

    const double serial = time_best_of(3, [&] {
        for (int i = 0; i < iters; ++i)
            kernels::matvec_serial(w.data(), x.data(), y.data(), rows, cols);
    });
    const long long saved = kernels::parallel_threshold();
    kernels::set_parallel_threshold(1);  // force the parallel path
    const double parallel = time_best_of(3, [&] {
        for (int i = 0; i < iters; ++i) kernels::matvec(w.data(), x.data(), y.data(), rows, cols);
    });
    kernels::set_parallel_threshold(saved);

    std::printf("matvec %5dx%-5d  serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", rows, cols,
                1e3 * serial, 1e3 * parallel, serial / parallel);
}

void bench_batch_gradients() {
    SyntheticTaskSpec spec;
    SyntheticData data = generate_synthetic_transfer(spec, 64, 8, 8);

    TrainingConfig cfg;
    cfg.task = Task::classification;
    cfg.mode = TransferMode::full_art;
    cfg.hidden = 24;
    cfg.word_dim = 24;
    cfg.dropout = 0.0;
    cfg.seed = 7;

    Corpora corpora;
    corpora.source_train = data.source;
    corpora.target_train = data.target_train;
    auto model = build_model(cfg, corpora);
    Corpus corpus = data.source;
    numericalize(corpus, model->words(), cfg.lowercase_tokens());

    std::vector<int> batch;
    for (int i = 0; i < 32; ++i) batch.push_back(i);

    const double serial = time_best_of(3, [&] {
        model->store.zero_grads();
        batch_gradients_serial(*model, corpus, batch, false, 1);
    });
    const double parallel = time_best_of(3, [&] {
        model->store.zero_grads();
        batch_gradients_parallel(*model, corpus, batch, false, 1);
    });
    std::printf("batch gradients (32 sentences, d=24, full transfer)\n");
    std::printf("   serial %8.3f ms   omp %8.3f ms   speedup %.2fx\n", 1e3 * serial,
                1e3 * parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both paths run serially\n");
#endif
    bench_matvec(256, 256, 2000);
    bench_matvec(1200, 400, 500);
    bench_matvec(4096, 1024, 50);
    bench_batch_gradients();
    return 0;
}
