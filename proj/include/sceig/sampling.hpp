#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sceig {

/// Seeded uniform sampler on the box [-1,1]^d.
///
/// The mapping from the 64-bit engine output to doubles is fixed here rather
/// than delegated to std::uniform_real_distribution, whose algorithm differs
/// between standard libraries; identical seeds give identical samples
/// everywhere.
class BoxSampler {
 public:
  explicit BoxSampler(std::uint64_t seed) : engine_(seed) {}

  double unit();  // [0,1)
  double symmetric() { return 2.0 * unit() - 1.0; }
  std::vector<double> point(std::size_t dim);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sceig
