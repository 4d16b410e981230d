#include "fpt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fpt {

std::size_t worker_count() {
    if (const char* env = std::getenv("FPT_THREADS")) {
        std::size_t n = 0;
        const auto res = std::from_chars(env, env + std::strlen(env), n);
        if (res.ec == std::errc() && n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, std::size_t workers) {
    if (n == 0) return;
    workers = std::max<std::size_t>(1, std::min(workers, n));

    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex error_mutex;
    auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (i < first_index) {
                first_index = i;
                first_error = std::current_exception();
            }
        }
    };

    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 16));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t begin = next.fetch_add(chunk);
                    if (begin >= n) return;
                    const std::size_t end = std::min(n, begin + chunk);
                    for (std::size_t i = begin; i < end; ++i) run(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (const double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace fpt
