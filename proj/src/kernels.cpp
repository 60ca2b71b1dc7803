#include "trajrl/kernels.hpp"

#include <algorithm>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trajrl::kernels {

namespace {
int g_threads = 1;

inline int default_threads() {
#ifdef _OPENMP
  return std::min(4, omp_get_num_procs());
#else
  return 1;
#endif
}

struct ThreadInit {
  ThreadInit() { g_threads = default_threads(); }
} g_thread_init;
}  // namespace

void set_threads(int n) {
  g_threads = std::max(1, n);
#ifdef _OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int threads() { return g_threads; }

bool parallel_enabled() {
#ifdef _OPENMP
  return g_threads > 1;
#else
  return false;
#endif
}

namespace serial {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = trans_a ? a[p * m + i] : a[i * k + p];
        const double bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      if (accumulate)
        c[i * n + j] += acc;
      else
        c[i * n + j] = acc;
    }
  }
}

void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow) {
  for (int oc = 0; oc < c_out; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias ? bias[oc] : 0.0;
        for (int ic = 0; ic < c_in; ++ic) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              acc += in[(ic * h + iy) * w + ix] *
                     weight[((oc * c_in + ic) * kh + ky) * kw + kx];
            }
          }
        }
        out[(oc * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin) {
  for (int ic = 0; ic < c_in; ++ic) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        double acc = 0.0;
        for (int oc = 0; oc < c_out; ++oc) {
          for (int ky = 0; ky < kh; ++ky) {
            const int num_y = iy + pad - ky;
            if (num_y < 0 || num_y % stride != 0) continue;
            const int oy = num_y / stride;
            if (oy >= oh) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int num_x = ix + pad - kx;
              if (num_x < 0 || num_x % stride != 0) continue;
              const int ox = num_x / stride;
              if (ox >= ow) continue;
              acc += gout[(oc * oh + oy) * ow + ox] *
                     weight[((oc * c_in + ic) * kh + ky) * kw + kx];
            }
          }
        }
        gin[(ic * h + iy) * w + ix] += acc;
      }
    }
  }
}

void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight) {
  for (int oc = 0; oc < c_out; ++oc) {
    for (int ic = 0; ic < c_in; ++ic) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              acc += gout[(oc * oh + oy) * ow + ox] *
                     in[(ic * h + iy) * w + ix];
            }
          }
          gweight[((oc * c_in + ic) * kh + ky) * kw + kx] += acc;
        }
      }
    }
  }
}

void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias) {
  for (int oc = 0; oc < c_out; ++oc) {
    double acc = 0.0;
    for (int i = 0; i < oh * ow; ++i) acc += gout[oc * oh * ow + i];
    gbias[oc] += acc;
  }
}

void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax) {
  for (int ic = 0; ic < c; ++ic) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride + ky;
          if (iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride + kx;
            if (ix >= w) continue;
            const int idx = (ic * h + iy) * w + ix;
            if (in[idx] > best) {
              best = in[idx];
              best_idx = idx;
            }
          }
        }
        const int o = (ic * oh + oy) * ow + ox;
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
}

void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin) {
  for (int i = 0; i < n_out; ++i) gin[argmax[i]] += gout[i];
}

}  // namespace serial

namespace par {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        const double av = trans_a ? a[p * m + i] : a[i * k + p];
        const double bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      if (accumulate)
        c[i * n + j] += acc;
      else
        c[i * n + j] = acc;
    }
  }
}

void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow) {
#pragma omp parallel for schedule(static) collapse(2)
  for (int oc = 0; oc < c_out; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = bias ? bias[oc] : 0.0;
        for (int ic = 0; ic < c_in; ++ic) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              acc += in[(ic * h + iy) * w + ix] *
                     weight[((oc * c_in + ic) * kh + ky) * kw + kx];
            }
          }
        }
        out[(oc * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin) {
#pragma omp parallel for schedule(static) collapse(2)
  for (int ic = 0; ic < c_in; ++ic) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        double acc = 0.0;
        for (int oc = 0; oc < c_out; ++oc) {
          for (int ky = 0; ky < kh; ++ky) {
            const int num_y = iy + pad - ky;
            if (num_y < 0 || num_y % stride != 0) continue;
            const int oy = num_y / stride;
            if (oy >= oh) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int num_x = ix + pad - kx;
              if (num_x < 0 || num_x % stride != 0) continue;
              const int ox = num_x / stride;
              if (ox >= ow) continue;
              acc += gout[(oc * oh + oy) * ow + ox] *
                     weight[((oc * c_in + ic) * kh + ky) * kw + kx];
            }
          }
        }
        gin[(ic * h + iy) * w + ix] += acc;
      }
    }
  }
}

void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight) {
#pragma omp parallel for schedule(static) collapse(2)
  for (int oc = 0; oc < c_out; ++oc) {
    for (int ic = 0; ic < c_in; ++ic) {
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= w) continue;
              acc += gout[(oc * oh + oy) * ow + ox] *
                     in[(ic * h + iy) * w + ix];
            }
          }
          gweight[((oc * c_in + ic) * kh + ky) * kw + kx] += acc;
        }
      }
    }
  }
}

void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias) {
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < c_out; ++oc) {
    double acc = 0.0;
    for (int i = 0; i < oh * ow; ++i) acc += gout[oc * oh * ow + i];
    gbias[oc] += acc;
  }
}

void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax) {
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < c; ++ic) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = -1;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * stride + ky;
          if (iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * stride + kx;
            if (ix >= w) continue;
            const int idx = (ic * h + iy) * w + ix;
            if (in[idx] > best) {
              best = in[idx];
              best_idx = idx;
            }
          }
        }
        const int o = (ic * oh + oy) * ow + ox;
        out[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
}

void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin) {
  // Windows may overlap, so the scatter stays serial.
  serial::maxpool_backward(gout, n_out, argmax, gin);
}

}  // namespace par

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate) {
  if (parallel_enabled())
    par::gemm(trans_a, trans_b, m, n, k, a, b, c, accumulate);
  else
    serial::gemm(trans_a, trans_b, m, n, k, a, b, c, accumulate);
}

void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow) {
  if (parallel_enabled())
    par::conv2d_forward(in, c_in, h, w, weight, c_out, kh, kw, bias, stride,
                        pad, out, oh, ow);
  else
    serial::conv2d_forward(in, c_in, h, w, weight, c_out, kh, kw, bias, stride,
                           pad, out, oh, ow);
}

void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin) {
  if (parallel_enabled())
    par::conv2d_backward_input(gout, c_out, oh, ow, weight, c_in, kh, kw, h, w,
                               stride, pad, gin);
  else
    serial::conv2d_backward_input(gout, c_out, oh, ow, weight, c_in, kh, kw, h,
                                  w, stride, pad, gin);
}

void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight) {
  if (parallel_enabled())
    par::conv2d_backward_weight(gout, c_out, oh, ow, in, c_in, h, w, kh, kw,
                                stride, pad, gweight);
  else
    serial::conv2d_backward_weight(gout, c_out, oh, ow, in, c_in, h, w, kh, kw,
                                   stride, pad, gweight);
}

void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias) {
  if (parallel_enabled())
    par::conv2d_backward_bias(gout, c_out, oh, ow, gbias);
  else
    serial::conv2d_backward_bias(gout, c_out, oh, ow, gbias);
}

void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax) {
  if (parallel_enabled())
    par::maxpool_forward(in, c, h, w, k, stride, out, oh, ow, argmax);
  else
    serial::maxpool_forward(in, c, h, w, k, stride, out, oh, ow, argmax);
}

void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin) {
  serial::maxpool_backward(gout, n_out, argmax, gin);
}

}  // namespace trajrl::kernels
