#pragma once

#include <string>

#include "stragglar/even_generator.hpp"
#include "stragglar/schedule.hpp"

namespace stragglar {

// True when generate_schedule(algo, n) can produce a schedule.
bool is_supported(Algorithm algo, int n);
// Human-readable description of the sizes an algorithm accepts.
std::string supported_sizes(Algorithm algo);

// Dispatches to the matching generator. StragglAR uses the closed-form
// generator for powers of two and the matching-based one, with `policy`, for
// other even n.
// The straggler is always rank n-1. Throws UnsupportedSizeError or
// InvalidSizeError.
Schedule generate_schedule(Algorithm algo, int n, EvenPolicy policy = EvenPolicy::Default);

}  // namespace stragglar
