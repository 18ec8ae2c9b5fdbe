#include "softbokeh/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace softbokeh {

namespace {

std::atomic<unsigned> g_thread_count{0};

unsigned default_thread_count() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void set_thread_count(unsigned count) { g_thread_count.store(count); }

unsigned thread_count() {
    const unsigned n = g_thread_count.load();
    return n == 0 ? default_thread_count() : n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end) threads.emplace_back(run, begin, end);
    }
    run(0, std::min(n, chunk));
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace softbokeh
