#pragma once

#include "kalinv/problem.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kalinv {

/// Worker cap for intra-step forward evaluations: KALINV_THREADS when set to a
/// positive integer, otherwise the hardware concurrency.
unsigned max_threads();

/// Runs body(i) for i in [0, n) on up to max_threads() workers. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// workers have joined, so failures are reported deterministically.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Evaluates the forward map at every input, results in input order. Non-finite
/// outputs raise ForwardModelFailure naming the offending index.
std::vector<Vector> evaluate_all(const ForwardMap& forward, std::span<const Vector> inputs);

}  // namespace kalinv
