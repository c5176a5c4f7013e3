#pragma once

#include <cstdint>

#include "mrs/rng.hpp"

namespace mrs {

// Exact Poisson(rate) draw. Sequential-search inversion below rate 10,
// Hormann's transformed rejection (PTRS) above. rate == 0 yields 0;
// negative or non-finite rates throw InvalidArgument.
std::int64_t poisson_variate(double rate, Rng& rng);

} // namespace mrs
