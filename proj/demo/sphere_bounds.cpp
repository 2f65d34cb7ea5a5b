// Lower and upper bounds for the minimal action on the sphere over a range of
// couplings, as a whitespace-separated table.

#include <cstdio>
#include <string>

#include "cvp/anneal.hpp"
#include "cvp/bounds.hpp"

int main() {
  using namespace cvp;
  const std::string dir = std::string(CVP_DATA_DIR) + "/packings/";
  const std::vector<NamedPacking> packings{{"tetrahedron", read_packing(dir + "tetrahedron.txt")},
                                           {"octahedron", read_packing(dir + "octahedron.txt")},
                                           {"icosahedron", read_packing(dir + "icosahedron.txt")}};
  AnnealSchedule sched;
  sched.restarts = 4;
  std::printf("%-6s %10s %6s %10s %10s %10s %10s\n", "tau", "nu0", "valid", "S_K", "volume", "tammes", "anneal");
  for (double tau = 1.0; tau <= 3.0 + 1e-9; tau += 0.25) {
    const Sphere s(tau);
    const double best = anneal_run(s, 32, sched).action;
    const auto r = compute_bounds(s, packings, best);
    std::printf("%-6.2f %10.5f %6s %10.5f %10.5f %10.5f %10.5f%s\n", tau, r.nu0.value, r.nu0.valid ? "yes" : "no",
                r.heat ? r.heat->s_k : 0.0, r.volume_upper, *r.tammes_upper(), best,
                r.sandwich_holds() ? "" : "  sandwich violated");
  }
}
