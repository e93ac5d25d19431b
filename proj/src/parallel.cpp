#include "pilab/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <exception>

namespace pilab::par {

namespace {
std::atomic<bool> g_enabled{true};
std::atomic<int> g_max_threads{0};
}  // namespace

void set_enabled(bool on) { g_enabled.store(on); }
bool enabled() { return g_enabled.load(); }

void set_max_threads(int n) { g_max_threads.store(n); }
int max_threads() {
    int n = g_max_threads.load();
    return n > 0 ? n : omp_get_max_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (!enabled() || n < 2 || omp_in_parallel()) {
        serial_for(n, body);
        return;
    }
    const int nt = max_threads();
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

void serial_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace pilab::par
