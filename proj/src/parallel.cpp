#include "bmllab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bmllab {

namespace {
std::atomic<int> g_override{0};

int default_workers() {
    int n = 1;
#ifdef _OPENMP
    n = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("BMLLAB_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0 && cap < n) n = cap;
            if (cap > 0 && n < 1) n = 1;
        } catch (...) {
        }
    }
    return n < 1 ? 1 : n;
}
}  // namespace

int worker_count() {
    const int o = g_override.load();
    if (o > 0) return o;
    static const int cached = default_workers();
    return cached;
}

void set_worker_count(int n) { g_override.store(n > 0 ? n : 0); }

}  // namespace bmllab
