#include <chrono>
#include <cstdio>

#include "cascadelab/cascade.hpp"

int main(int argc, char** argv) {
  using namespace cascadelab;
  const int n = argc > 1 ? std::atoi(argv[1]) : 20;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 20;
  CascadeSpec spec;
  spec.level_n = n;
  spec.seed = 1;
  const auto t0 = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    spec.replica = static_cast<std::uint32_t>(r);
    acc += normalized_statistic(LeafEnsemble(spec), 1.0);
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("n=%d reps=%d: %.3f s, %.3f ns/leaf, mean %.4f\n", n, reps, s,
              1e9 * s / (reps * static_cast<double>(1ull << n)), acc / reps);
}
