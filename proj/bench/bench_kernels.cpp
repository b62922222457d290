#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "polymerlab/overlap.hpp"
#include "polymerlab/partition.hpp"
#include "polymerlab/reference.hpp"

using namespace polymerlab;

namespace {

double seconds(const std::function<double()>& f, double& sink) {
  const auto t0 = std::chrono::steady_clock::now();
  sink += f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  double sink = 0.0;
  const int max_threads = omp_get_max_threads();
  std::printf("%-28s %6s %12s %12s %12s\n", "kernel", "n", "serial_ref", "grid_1thr", "grid_maxthr");
  for (int n : {12, 20, 28}) {
    const Site x0{0, 0, 0};
    const EnvironmentField field(DisorderSpec::gaussian(0.0, 1.0, 0.3), 7, Box::centered(x0, n + 1), n);
    const double ref = seconds([&] { return reference::total(reference::forward_partition(field, x0, n)); }, sink);
    omp_set_num_threads(1);
    const double one = seconds([&] { return forward_partition(field, x0, n).total(); }, sink);
    omp_set_num_threads(max_threads);
    const double all = seconds([&] { return forward_partition(field, x0, n).total(); }, sink);
    std::printf("%-28s %6d %12.4f %12.4f %12.4f\n", "forward_partition", n, ref, one, all);
  }
  for (int n : {20, 40}) {
    const double ref = seconds([&] { return reference::pair_expectation(3, n, 0.04); }, sink);
    omp_set_num_threads(1);
    const double one = seconds([&] { return pair_expectation(3, n, 0.04); }, sink);
    omp_set_num_threads(max_threads);
    const double all = seconds([&] { return pair_expectation(3, n, 0.04); }, sink);
    std::printf("%-28s %6d %12.4f %12.4f %12.4f\n", "pair_expectation", n, ref, one, all);
  }
  {
    const auto spec = DisorderSpec::gaussian(0.0, 1.0, 0.3);
    omp_set_num_threads(1);
    const double one = seconds([&] { return second_moment_identity_check(spec, 3, 6, 2000, 1).mc_mean; }, sink);
    omp_set_num_threads(max_threads);
    const double all = seconds([&] { return second_moment_identity_check(spec, 3, 6, 2000, 1).mc_mean; }, sink);
    std::printf("%-28s %6d %12s %12.4f %12.4f\n", "moment_check_2000_seeds", 6, "-", one, all);
  }
  std::printf("threads available: %d (checksum %.6g)\n", max_threads, sink);
}
