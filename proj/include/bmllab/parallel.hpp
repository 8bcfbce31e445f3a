#pragma once

#include <cstddef>

namespace bmllab {

/// Kernels take an execution policy so the serial path stays available as a
/// reference for tests and benchmarks.
enum class Exec { parallel, serial };

/// Worker cap: BMLLAB_THREADS when set, otherwise the OpenMP default.
int worker_count();
void set_worker_count(int n);

/// Runs body(i) for i in [0, n). Iterations must write disjoint outputs.
template <class Body>
void parallel_for(std::size_t n, Exec exec, Body&& body) {
    const auto count = static_cast<long long>(n);
    if (exec == Exec::serial || n < 2) {
        for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
        return;
    }
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_count())
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

/// Compensated running sum; adding in a fixed order keeps results reproducible.
class KahanSum {
public:
    void add(double x) {
        const double t = s_ + x;
        c_ += (s_ >= x || s_ <= -x) ? (s_ - t) + x : (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace bmllab
