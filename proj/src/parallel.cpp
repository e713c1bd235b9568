#include "branchlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace branchlab {
namespace {
std::atomic<int> g_default_threads{0};
}

unsigned resolve_threads(int requested) {
    if (requested > 0) return static_cast<unsigned>(requested);
    if (const int d = g_default_threads.load(); d > 0) return static_cast<unsigned>(d);
    if (const char* env = std::getenv("BRANCHLAB_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { g_default_threads.store(threads); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace branchlab
