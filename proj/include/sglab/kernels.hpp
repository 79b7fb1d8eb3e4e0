// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

// Raw-array compute kernels. sglab::kernels is the OpenMP-parallel set used
// by the library; sglab::ref holds serial reference implementations with the
// same signatures, kept for tests and the kernel benchmark. Every parallel
// loop writes disjoint outputs and keeps the per-element accumulation order
// of the serial version, so the two namespaces produce bit-identical results
// for any thread count.

namespace sglab {

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

#define SGLAB_KERNEL_DECLS                                                     \
  /* y[m,n] = a[m,k] · b[k,n] */                                               \
  void matmul(const double* a, const double* b, double* y, int m, int k,       \
              int n);                                                          \
  /* y[m,n] = a[m,k] · b[n,k]ᵀ */                                              \
  void matmul_nt(const double* a, const double* b, double* y, int m, int k,    \
                 int n);                                                       \
  /* y[m,n] = a[k,m]ᵀ · b[k,n] */                                              \
  void matmul_tn(const double* a, const double* b, double* y, int m, int k,    \
                 int n);                                                       \
  /* x [cin,h,w]; w [cout,cin,ksz,ksz]; bias [cout] or null; y assigned */     \
  void conv2d_forward(const double* x, const double* w, const double* bias,    \
                      double* y, int cin, int h, int wd, int cout, int ksz,    \
                      int stride, int pad);                                    \
  /* dx assigned (gather form) */                                              \
  void conv2d_backward_input(const double* dy, const double* w, double* dx,    \
                             int cin, int h, int wd, int cout, int ksz,        \
                             int stride, int pad);                             \
  /* dw, db assigned */                                                        \
  void conv2d_backward_params(const double* dy, const double* x, double* dw,   \
                              double* db, int cin, int h, int wd, int cout,    \
                              int ksz, int stride, int pad);                   \
  /* per-channel spatial standardization; y, mean, inv_std assigned */         \
  void instance_norm_forward(const double* x, double* y, double* mean,         \
                             double* inv_std, int c, int hw, double eps);      \
  /* dx assigned; y is the normalized output from the forward pass */          \
  void instance_norm_backward(const double* dy, const double* y,               \
                              const double* inv_std, double* dx, int c,        \
                              int hw);                                         \
  /* row-wise stabilized softmax */                                            \
  void softmax_rows(const double* x, double* y, int rows, int cols);           \
  void relu(const double* x, double* y, std::int64_t n);                       \
  void sigmoid(const double* x, double* y, std::int64_t n);

namespace kernels {
SGLAB_KERNEL_DECLS
}  // namespace kernels

namespace ref {
SGLAB_KERNEL_DECLS
}  // namespace ref

#undef SGLAB_KERNEL_DECLS

}  // namespace sglab
