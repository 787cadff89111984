// Timing comparison of the row-parallel reduction kernels against the plain
// serial reference loops, on a desk-scale skyrmion evaluation.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "skylab/energy.hpp"
#include "skylab/grid.hpp"
#include "skylab/maps.hpp"
#include "skylab/reduce.hpp"

using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(F&& f, int reps) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 1025;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  const auto map = skylab::skyrmion(1.0);
  const skylab::SphereField field = skylab::sample(*map, skylab::make_grid(40.0, n));
  const double mnodes = 1e-6 * n * n;

  volatile double sink = 0.0;
  const double t_kernel = time_ms(
      [&] { sink = skylab::evaluate(field, 1.0).E_r; }, reps);
  const double t_ref = time_ms(
      [&] {
        sink = skylab::reference::dirichlet(field) + skylab::reference::helicity_ibp(field) +
               skylab::reference::potential(field) + skylab::reference::degree_raw(field);
      },
      reps);

  std::printf("grid %d x %d, %d threads\n", n, n, skylab::reduction_threads());
  std::printf("  parallel evaluate : %8.2f ms  (%6.1f Mnode/s, 10 functionals)\n", t_kernel,
              mnodes / (t_kernel * 1e-3));
  std::printf("  serial reference  : %8.2f ms  (%6.1f Mnode/s, 4 functionals)\n", t_ref,
              mnodes / (t_ref * 1e-3));
  (void)sink;
  return 0;
}
