#include "sceig/sampling.hpp"

namespace sceig {

double BoxSampler::unit() {
  // 53 high bits -> [0,1) with uniform spacing 2^-53.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<double> BoxSampler::point(std::size_t dim) {
  std::vector<double> y(dim);
  for (auto& v : y) v = symmetric();
  return y;
}

}  // namespace sceig
