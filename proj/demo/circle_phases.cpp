// Circle tau scan: prints the scan CSV, then the support-size jumps next to the
// couplings tau_m where the chain length changes.
//
//   demo_circle_phases [tau_min tau_max step m]

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "cvp/exact.hpp"
#include "cvp/scan.hpp"

int main(int argc, char** argv) {
  using namespace cvp;
  const double lo = argc > 1 ? std::atof(argv[1]) : 1.0;
  const double hi = argc > 2 ? std::atof(argv[2]) : 2.2;
  const double step = argc > 3 ? std::atof(argv[3]) : 0.02;
  const std::size_t m = argc > 4 ? std::strtoul(argv[4], nullptr, 10) : 10;

  AnnealSchedule sched;
  const auto rows = tau_scan(Circle(1.0), linear_grid(lo, hi, step), m, sched);
  write_scan_csv(std::cout, rows);

  std::printf("\nsupport jumps:");
  for (double j : support_jumps(rows)) std::printf(" %.3f", j);
  std::printf("\n");
  for (int k = 4; k <= 8; ++k) std::printf("tau_%d = %.4f\n", k, circle_tau_m(k));
  std::printf("chain theorem applies above tau_d = %.4f\n", circle_tau_d());
}
