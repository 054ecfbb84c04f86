#pragma once
// Index-parallel loops capped by ENGINE_THREADS. Callers write results by index, so output order
// never depends on scheduling.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cfm {

inline int engine_threads() {
    if (const char* e = std::getenv("ENGINE_THREADS")) {
        int n = std::atoi(e);
        if (n >= 1) return n;
    }
    unsigned h = std::thread::hardware_concurrency();
    return h ? int(h) : 1;
}

template <class F>
void parallel_for(size_t n, F&& f) {
    int nt = std::min<int>(engine_threads(), int(n));
    if (nt <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            try {
                for (size_t i; (i = next++) < n;) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace cfm
