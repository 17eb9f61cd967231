#include "backbone/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace backbone {

unsigned default_threads()
{
    if (const char* env = std::getenv("BACKBONE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return unsigned(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& body)
{
    threads = unsigned(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(count, 1)));
    if (threads == 1) {
        for (std::uint64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (std::uint64_t i; !stop && (i = next++) < count;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace backbone
