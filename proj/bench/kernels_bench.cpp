// Serial vs OpenMP timings of the solver inner loops.
//   kernels_bench [n] [reps]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "wsvm/parallel_kernels.hpp"

using namespace wsvm;
using namespace wsvm::kernels;

namespace {

double median_seconds(std::size_t reps, const std::function<void()>& f) {
  std::vector<double> t;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

void row(const std::string& name, std::size_t size, double serial, double parallel) {
  std::printf("%-8s %10zu %12.6f %12.6f %8.2f\n", name.c_str(), size, serial, parallel,
              parallel > 0.0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1600;
  const std::size_t reps = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 5;
  Rng rng(20120101);
  std::printf("%-8s %10s %12s %12s %8s\n", "kernel", "size", "serial_s", "parallel_s", "ratio");

  const std::size_t p = 2;
  std::vector<double> x(n * p), g(n * n);
  for (auto& v : x) v = rng.uniform();
  const KernelSpec spec{KernelKind::gaussian, 1.0, 0.0};
  row("gram", n, median_seconds(reps, [&] { gram_serial(spec, x, n, p, g); }),
      median_seconds(reps, [&] { gram_parallel(spec, x, n, p, g); }));

  const std::size_t len = n * 256;
  std::vector<double> a(len), b(len);
  for (auto& v : a) v = rng.uniform(-1.0, 1.0);
  row("axpy", len, median_seconds(reps, [&] { axpy_serial(1e-3, a, b); }),
      median_seconds(reps, [&] { axpy_parallel(1e-3, a, b); }));

  TermMap t;
  for (std::size_t v = 0; v < len; ++v) {
    t.item0.push_back(static_cast<std::int32_t>(rng.below(n)));
    t.coef0.push_back(1.0);
    t.item1.push_back(static_cast<std::int32_t>(rng.below(n)));
    t.coef1.push_back(-1.0);
  }
  std::vector<double> vals(n), out(len);
  for (auto& v : vals) v = rng.uniform();
  row("gather", len, median_seconds(reps, [&] { gather_serial(t, vals, out); }),
      median_seconds(reps, [&] { gather_parallel(t, vals, out); }));

  volatile double sink = 0.0;
  row("argmin", len, median_seconds(reps, [&] { sink = argmin_serial(a, 1e-12).value; }),
      median_seconds(reps, [&] { sink = argmin_parallel(a, 1e-12).value; }));
  return 0;
}
