#include "invgap/rng.hpp"

#include <cmath>

namespace invgap {

double CounterRng::next_gaussian() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace invgap
