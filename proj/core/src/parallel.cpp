#include "corrlda/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace corrlda {

std::size_t worker_count(std::size_t jobs) {
    if (jobs <= 1) return jobs == 0 ? 1 : 1;
    std::size_t requested = 0;
    if (const char* env = std::getenv("CORRLDA_THREADS")) {
        try {
            const long parsed = std::stol(env);
            if (parsed > 0) requested = static_cast<std::size_t>(parsed);
        } catch (const std::exception&) {
            // unparsable value falls back to auto
        }
    }
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        requested = hw == 0 ? 1 : hw;
    }
    return std::min(requested, jobs);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = worker_count(n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(begin + chunk, n);
        if (begin >= end) break;
        threads.emplace_back([&fn, &errors, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

} // namespace corrlda
