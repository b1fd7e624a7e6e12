#include "randcheck/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace randcheck {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    std::exception_ptr first_error;
    std::size_t first_error_index = n;
    std::mutex error_mutex;

    auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (i < first_error_index) {
                first_error_index = i;
                first_error = std::current_exception();
            }
        }
    };

    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, n); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) run(i);
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace randcheck
