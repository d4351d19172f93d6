#include "nclab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

namespace nclab {

namespace {

bool deterministic_env() {
    const char* v = std::getenv("NCLAB_DETERMINISTIC");
    return v != nullptr && std::string_view(v) == "1";
}

std::atomic<int>& configured_threads() {
    static std::atomic<int> value{0};
    return value;
}

}  // namespace

int default_threads() {
    if (deterministic_env()) return 1;
    const int configured = configured_threads().load();
    if (configured > 0) return configured;
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { configured_threads().store(std::max(0, threads)); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
    if (threads <= 0) threads = default_threads();
    if (deterministic_env()) threads = 1;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace nclab
