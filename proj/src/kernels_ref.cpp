// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include "sglab/kernels.hpp"

#include <algorithm>
#include <cmath>

// Serial reference kernels. Naive loops, no pragmas. Tests assert the OpenMP
// variants reproduce these bit-for-bit; the kernel_bench tool compares their
// throughput.

namespace sglab::ref {

void matmul(const double* a, const double* b, double* y, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[static_cast<std::size_t>(i) * k + l] * b[static_cast<std::size_t>(l) * n + j];
      }
      y[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void matmul_nt(const double* a, const double* b, double* y, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[static_cast<std::size_t>(i) * k + l] * b[static_cast<std::size_t>(j) * k + l];
      }
      y[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* y, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) {
        acc += a[static_cast<std::size_t>(l) * m + i] * b[static_cast<std::size_t>(l) * n + j];
      }
      y[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

void conv2d_forward(const double* x, const double* w, const double* bias, double* y, int cin,
                    int h, int wd, int cout, int ksz, int stride, int pad) {
  int hout = conv_out_dim(h, ksz, stride, pad);
  int wout = conv_out_dim(wd, ksz, stride, pad);
  for (int co = 0; co < cout; ++co) {
    for (int oy = 0; oy < hout; ++oy) {
      for (int ox = 0; ox < wout; ++ox) {
        double acc = bias ? bias[co] : 0.0;
        for (int ci = 0; ci < cin; ++ci) {
          for (int ky = 0; ky < ksz; ++ky) {
            int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < ksz; ++kx) {
              int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += x[(static_cast<std::size_t>(ci) * h + iy) * wd + ix] *
                     w[((static_cast<std::size_t>(co) * cin + ci) * ksz + ky) * ksz + kx];
            }
          }
        }
        y[(static_cast<std::size_t>(co) * hout + oy) * wout + ox] = acc;
      }
    }
  }
}

void conv2d_backward_input(const double* dy, const double* w, double* dx, int cin, int h, int wd,
                           int cout, int ksz, int stride, int pad) {
  int hout = conv_out_dim(h, ksz, stride, pad);
  int wout = conv_out_dim(wd, ksz, stride, pad);
  for (int ci = 0; ci < cin; ++ci) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < wd; ++ix) {
        double acc = 0.0;
        for (int co = 0; co < cout; ++co) {
          for (int ky = 0; ky < ksz; ++ky) {
            int num = iy + pad - ky;
            if (num < 0 || num % stride != 0) continue;
            int oy = num / stride;
            if (oy >= hout) continue;
            for (int kx = 0; kx < ksz; ++kx) {
              int numx = ix + pad - kx;
              if (numx < 0 || numx % stride != 0) continue;
              int ox = numx / stride;
              if (ox >= wout) continue;
              acc += dy[(static_cast<std::size_t>(co) * hout + oy) * wout + ox] *
                     w[((static_cast<std::size_t>(co) * cin + ci) * ksz + ky) * ksz + kx];
            }
          }
        }
        dx[(static_cast<std::size_t>(ci) * h + iy) * wd + ix] = acc;
      }
    }
  }
}

void conv2d_backward_params(const double* dy, const double* x, double* dw, double* db, int cin,
                            int h, int wd, int cout, int ksz, int stride, int pad) {
  int hout = conv_out_dim(h, ksz, stride, pad);
  int wout = conv_out_dim(wd, ksz, stride, pad);
  for (int co = 0; co < cout; ++co) {
    double bacc = 0.0;
    for (int oy = 0; oy < hout; ++oy) {
      for (int ox = 0; ox < wout; ++ox) {
        bacc += dy[(static_cast<std::size_t>(co) * hout + oy) * wout + ox];
      }
    }
    db[co] = bacc;
    for (int ci = 0; ci < cin; ++ci) {
      for (int ky = 0; ky < ksz; ++ky) {
        for (int kx = 0; kx < ksz; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < hout; ++oy) {
            int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= h) continue;
            for (int ox = 0; ox < wout; ++ox) {
              int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += dy[(static_cast<std::size_t>(co) * hout + oy) * wout + ox] *
                     x[(static_cast<std::size_t>(ci) * h + iy) * wd + ix];
            }
          }
          dw[((static_cast<std::size_t>(co) * cin + ci) * ksz + ky) * ksz + kx] = acc;
        }
      }
    }
  }
}

void instance_norm_forward(const double* x, double* y, double* mean, double* inv_std, int c,
                           int hw, double eps) {
  for (int i = 0; i < c; ++i) {
    const double* xc = x + static_cast<std::size_t>(i) * hw;
    double* yc = y + static_cast<std::size_t>(i) * hw;
    double mu = 0.0;
    for (int p = 0; p < hw; ++p) mu += xc[p];
    mu /= hw;
    double var = 0.0;
    for (int p = 0; p < hw; ++p) {
      double d = xc[p] - mu;
      var += d * d;
    }
    var /= hw;
    double is = 1.0 / std::sqrt(var + eps);
    mean[i] = mu;
    inv_std[i] = is;
    for (int p = 0; p < hw; ++p) yc[p] = (xc[p] - mu) * is;
  }
}

void instance_norm_backward(const double* dy, const double* y, const double* inv_std, double* dx,
                            int c, int hw) {
  for (int i = 0; i < c; ++i) {
    const double* dyc = dy + static_cast<std::size_t>(i) * hw;
    const double* yc = y + static_cast<std::size_t>(i) * hw;
    double* dxc = dx + static_cast<std::size_t>(i) * hw;
    double m1 = 0.0, m2 = 0.0;
    for (int p = 0; p < hw; ++p) {
      m1 += dyc[p];
      m2 += dyc[p] * yc[p];
    }
    m1 /= hw;
    m2 /= hw;
    for (int p = 0; p < hw; ++p) dxc[p] = inv_std[i] * (dyc[p] - m1 - yc[p] * m2);
  }
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<std::size_t>(r) * cols;
    double* yr = y + static_cast<std::size_t>(r) * cols;
    double mx = xr[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    for (int c = 0; c < cols; ++c) yr[c] /= sum;
  }
}

void relu(const double* x, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void sigmoid(const double* x, double* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

}  // namespace sglab::ref
