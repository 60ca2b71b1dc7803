#pragma once

#include <cstddef>

// Dense numeric kernels used by the tensor engine. Every kernel has a serial
// reference implementation and an OpenMP version; the parallel versions
// partition work by output element with a fixed inner summation order, so
// both paths produce bitwise-identical results. The dispatching entry points
// pick the path from the configured thread count.

namespace trajrl::kernels {

// Thread count for the parallel path; 1 selects the serial reference.
void set_threads(int n);
int threads();
bool parallel_enabled();

// C = op(A) * op(B), with op(X) = X or X^T per flag.
// A is m x k after op, B is k x n after op, C is m x n.
// accumulate=true adds into C instead of overwriting.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate);

// 2D convolution on CHW layout, square stride/padding.
void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow);
void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin);
void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight);
void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias);

// Max pooling with argmax capture (flat input indices).
void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax);
void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin);

namespace serial {
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate);
void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow);
void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin);
void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight);
void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias);
void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax);
void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin);
}  // namespace serial

namespace par {
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a,
          const double* b, double* c, bool accumulate);
void conv2d_forward(const double* in, int c_in, int h, int w,
                    const double* weight, int c_out, int kh, int kw,
                    const double* bias, int stride, int pad, double* out,
                    int oh, int ow);
void conv2d_backward_input(const double* gout, int c_out, int oh, int ow,
                           const double* weight, int c_in, int kh, int kw,
                           int h, int w, int stride, int pad, double* gin);
void conv2d_backward_weight(const double* gout, int c_out, int oh, int ow,
                            const double* in, int c_in, int h, int w, int kh,
                            int kw, int stride, int pad, double* gweight);
void conv2d_backward_bias(const double* gout, int c_out, int oh, int ow,
                          double* gbias);
void maxpool_forward(const double* in, int c, int h, int w, int k, int stride,
                     double* out, int oh, int ow, int* argmax);
void maxpool_backward(const double* gout, int n_out, const int* argmax,
                      double* gin);
}  // namespace par

}  // namespace trajrl::kernels
