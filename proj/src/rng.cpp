#include "mzsim/rng.hpp"

#include <cmath>

namespace mzsim {

double RandomStream::exponential(double rate) { return -std::log(uniform_open01()) / rate; }

}  // namespace mzsim
