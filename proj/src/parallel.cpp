#include "kalinv/parallel.hpp"

#include "kalinv/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace kalinv {

unsigned max_threads() {
    if (const char* env = std::getenv("KALINV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    std::vector<std::exception_ptr> errors(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), n));

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<Vector> evaluate_all(const ForwardMap& forward, std::span<const Vector> inputs) {
    std::vector<Vector> out(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) {
        Vector g = forward(inputs[i]);
        if (!g.allFinite()) throw ForwardModelFailure(i, "forward map returned non-finite values");
        out[i] = std::move(g);
    });
    return out;
}

}  // namespace kalinv
