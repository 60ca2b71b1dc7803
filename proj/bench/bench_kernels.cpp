// Timing comparison of the serial reference kernels against the OpenMP
// versions, on shapes matching the training workload.

#include <chrono>
#include <cstdio>
#include <vector>

#include "trajrl/common.hpp"
#include "trajrl/kernels.hpp"

using namespace trajrl;
namespace k = trajrl::kernels;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

void bench_gemm(int m, int n, int kk, int reps) {
  Rng rng(7);
  const auto a = random_vec(static_cast<std::size_t>(m) * kk, rng);
  const auto b = random_vec(static_cast<std::size_t>(kk) * n, rng);
  std::vector<double> c(static_cast<std::size_t>(m) * n);

  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    k::serial::gemm(false, false, m, n, kk, a.data(), b.data(), c.data(),
                    false);
  const double serial_ms = ms_since(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r)
    k::par::gemm(false, false, m, n, kk, a.data(), b.data(), c.data(), false);
  const double par_ms = ms_since(t0) / reps;

  std::printf("gemm %4dx%4dx%4d   serial %8.3f ms   omp %8.3f ms   x%.2f\n",
              m, n, kk, serial_ms, par_ms, serial_ms / par_ms);
}

void bench_conv(int c_in, int c_out, int hw, int reps) {
  Rng rng(11);
  const auto in = random_vec(static_cast<std::size_t>(c_in) * hw * hw, rng);
  const auto w =
      random_vec(static_cast<std::size_t>(c_out) * c_in * 3 * 3, rng);
  const auto bias = random_vec(c_out, rng);
  const int oh = (hw + 2 - 3) / 2 + 1;
  std::vector<double> out(static_cast<std::size_t>(c_out) * oh * oh);
  std::vector<double> gin(in.size());
  std::vector<double> gw(w.size());

  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    k::serial::conv2d_forward(in.data(), c_in, hw, hw, w.data(), c_out, 3, 3,
                              bias.data(), 2, 1, out.data(), oh, oh);
    k::serial::conv2d_backward_input(out.data(), c_out, oh, oh, w.data(),
                                     c_in, 3, 3, hw, hw, 2, 1, gin.data());
    k::serial::conv2d_backward_weight(out.data(), c_out, oh, oh, in.data(),
                                      c_in, hw, hw, 3, 3, 2, 1, gw.data());
  }
  const double serial_ms = ms_since(t0) / reps;

  t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) {
    k::par::conv2d_forward(in.data(), c_in, hw, hw, w.data(), c_out, 3, 3,
                           bias.data(), 2, 1, out.data(), oh, oh);
    k::par::conv2d_backward_input(out.data(), c_out, oh, oh, w.data(), c_in,
                                  3, 3, hw, hw, 2, 1, gin.data());
    k::par::conv2d_backward_weight(out.data(), c_out, oh, oh, in.data(), c_in,
                                   hw, hw, 3, 3, 2, 1, gw.data());
  }
  const double par_ms = ms_since(t0) / reps;

  std::printf(
      "conv %3d->%3d @%3dx%3d  serial %8.3f ms   omp %8.3f ms   x%.2f\n",
      c_in, c_out, hw, hw, serial_ms, par_ms, serial_ms / par_ms);
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 0;
  if (argc > 1) threads = std::atoi(argv[1]);
  if (threads > 0) k::set_threads(threads);
  std::printf("threads: %d\n", k::threads());

  bench_gemm(128, 128, 128, 50);
  bench_gemm(256, 256, 256, 10);
  bench_gemm(6, 128, 1024, 200);

  bench_conv(4, 16, 32, 200);
  bench_conv(16, 32, 16, 200);
  bench_conv(32, 64, 8, 200);
  return 0;
}
