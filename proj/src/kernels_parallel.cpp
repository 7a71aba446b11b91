#include <omp.h>

#include <algorithm>
#include <array>
#include <cassert>
#include <vector>

#include "s2cgan/kernels.hpp"

namespace s2cgan {

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

namespace kernels::parallel {
namespace {

constexpr int kRowBlock = 4;
constexpr int kColBlock = 256;

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel == 1 && g.stride == 1 && g.padding == 0;
}

// Valid output-column range [lo, hi) for which ox * stride - padding + kx lies in [0, in_w).
std::pair<int, int> valid_range(int offset, int stride, int extent, int out_extent) {
  int lo = 0;
  while (lo < out_extent && lo * stride + offset < 0) ++lo;
  int hi = out_extent;
  while (hi > lo && (hi - 1) * stride + offset >= extent) --hi;
  return {lo, hi};
}

template <typename T>
void im2col(const ConvGeometry& g, const T* in, T* col) {
  const int k = g.kernel;
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int rows = g.in_channels * k * k;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int ci = r / (k * k);
    const int ky = (r / k) % k;
    const int kx = r % k;
    T* dst = col + static_cast<std::size_t>(r) * oh * ow;
    const auto [xlo, xhi] = valid_range(kx - g.padding, g.stride, g.in_w, ow);
    for (int oy = 0; oy < oh; ++oy) {
      T* row = dst + static_cast<std::size_t>(oy) * ow;
      const int iy = oy * g.stride - g.padding + ky;
      if (iy < 0 || iy >= g.in_h) {
        std::fill(row, row + ow, T{0});
        continue;
      }
      const T* src = in + (static_cast<std::size_t>(ci) * g.in_h + iy) * g.in_w;
      std::fill(row, row + xlo, T{0});
      for (int ox = xlo; ox < xhi; ++ox) row[ox] = src[ox * g.stride - g.padding + kx];
      std::fill(row + xhi, row + ow, T{0});
    }
  }
}

// Overwrites `out` with the scatter-add of `col` patches.
template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* out) {
  const int k = g.kernel;
  const int oh = g.out_h();
  const int ow = g.out_w();
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < g.in_channels; ++ci) {
    T* plane = out + static_cast<std::size_t>(ci) * g.in_h * g.in_w;
    std::fill(plane, plane + static_cast<std::size_t>(g.in_h) * g.in_w, T{0});
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int r = (ci * k + ky) * k + kx;
        const T* src = col + static_cast<std::size_t>(r) * oh * ow;
        const auto [xlo, xhi] = valid_range(kx - g.padding, g.stride, g.in_w, ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.in_w;
          const T* srow = src + static_cast<std::size_t>(oy) * ow;
          for (int ox = xlo; ox < xhi; ++ox) dst[ox * g.stride - g.padding + kx] += srow[ox];
        }
      }
    }
  }
}

// C[M][N] = A[M][K] * B[K][N]. Each (row block, column block) tile of C is
// owned by one thread and accumulated in increasing k.
template <typename T>
void gemm_nn(int m, int n, int kdim, const T* a, const T* b, T* c) {
  const int mblocks = (m + kRowBlock - 1) / kRowBlock;
  const int nblocks = (n + kColBlock - 1) / kColBlock;
#pragma omp parallel for collapse(2) schedule(static)
  for (int nb = 0; nb < nblocks; ++nb) {
    for (int mb = 0; mb < mblocks; ++mb) {
      const int n0 = nb * kColBlock;
      const int nlen = std::min(n, n0 + kColBlock) - n0;
      const int m0 = mb * kRowBlock;
      const int mlen = std::min(m, m0 + kRowBlock) - m0;
      std::array<std::array<T, kColBlock>, kRowBlock> acc{};
      for (int kk = 0; kk < kdim; ++kk) {
        const T* brow = b + static_cast<std::size_t>(kk) * n + n0;
        for (int i = 0; i < mlen; ++i) {
          const T av = a[static_cast<std::size_t>(m0 + i) * kdim + kk];
          T* arow = acc[i].data();
#pragma omp simd
          for (int j = 0; j < nlen; ++j) arow[j] += av * brow[j];
        }
      }
      for (int i = 0; i < mlen; ++i) {
        std::copy(acc[i].begin(), acc[i].begin() + nlen, c + static_cast<std::size_t>(m0 + i) * n + n0);
      }
    }
  }
}

// C[M][N] += A[M][L] * B[N][L]^T, dot-product form.
template <typename T>
void gemm_nt_accumulate(int m, int n, int len, const T* a, const T* b, T* c) {
  const int mblocks = (m + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (int mb = 0; mb < mblocks; ++mb) {
    const int m0 = mb * kRowBlock;
    const int mlen = std::min(m, m0 + kRowBlock) - m0;
    if (mlen == kRowBlock) {
      const T* a0 = a + static_cast<std::size_t>(m0) * len;
      const T* a1 = a0 + len;
      const T* a2 = a1 + len;
      const T* a3 = a2 + len;
      for (int j = 0; j < n; ++j) {
        const T* bj = b + static_cast<std::size_t>(j) * len;
        T s0{0}, s1{0}, s2{0}, s3{0};
#pragma omp simd reduction(+ : s0, s1, s2, s3)
        for (int l = 0; l < len; ++l) {
          s0 += a0[l] * bj[l];
          s1 += a1[l] * bj[l];
          s2 += a2[l] * bj[l];
          s3 += a3[l] * bj[l];
        }
        c[static_cast<std::size_t>(m0) * n + j] += s0;
        c[static_cast<std::size_t>(m0 + 1) * n + j] += s1;
        c[static_cast<std::size_t>(m0 + 2) * n + j] += s2;
        c[static_cast<std::size_t>(m0 + 3) * n + j] += s3;
      }
    } else {
      for (int i = 0; i < mlen; ++i) {
        const T* ai = a + static_cast<std::size_t>(m0 + i) * len;
        for (int j = 0; j < n; ++j) {
          const T* bj = b + static_cast<std::size_t>(j) * len;
          T s{0};
#pragma omp simd reduction(+ : s)
          for (int l = 0; l < len; ++l) s += ai[l] * bj[l];
          c[static_cast<std::size_t>(m0 + i) * n + j] += s;
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void correlate_forward(const ConvGeometry& g, int batch, std::span<const T> input,
                       std::span<const T> weight, std::span<T> output) {
  assert(input.size() == g.input_size() * batch);
  assert(output.size() == g.output_size() * batch);
  const int rows = g.in_channels * g.kernel * g.kernel;
  const int cols = g.out_h() * g.out_w();
  std::vector<T> col;
  if (!is_pointwise(g)) col.resize(static_cast<std::size_t>(rows) * cols);
  for (int n = 0; n < batch; ++n) {
    const T* in = input.data() + n * g.input_size();
    const T* b = in;
    if (!col.empty()) {
      im2col(g, in, col.data());
      b = col.data();
    }
    gemm_nn(g.out_channels, cols, rows, weight.data(), b, output.data() + n * g.output_size());
  }
}

template <typename T>
void correlate_backward_input(const ConvGeometry& g, int batch, std::span<const T> grad_output,
                              std::span<const T> weight, std::span<T> grad_input) {
  assert(grad_output.size() == g.output_size() * batch);
  assert(grad_input.size() == g.input_size() * batch);
  const int rows = g.in_channels * g.kernel * g.kernel;
  const int cols = g.out_h() * g.out_w();
  std::vector<T> wt(weight.size());
  for (int co = 0; co < g.out_channels; ++co) {
    for (int r = 0; r < rows; ++r) {
      wt[static_cast<std::size_t>(r) * g.out_channels + co] = weight[static_cast<std::size_t>(co) * rows + r];
    }
  }
  const bool pointwise = is_pointwise(g);
  std::vector<T> col;
  if (!pointwise) col.resize(static_cast<std::size_t>(rows) * cols);
  for (int n = 0; n < batch; ++n) {
    const T* go = grad_output.data() + n * g.output_size();
    T* gi = grad_input.data() + n * g.input_size();
    if (pointwise) {
      gemm_nn(rows, cols, g.out_channels, wt.data(), go, gi);
    } else {
      gemm_nn(rows, cols, g.out_channels, wt.data(), go, col.data());
      col2im(g, col.data(), gi);
    }
  }
}

template <typename T>
void correlate_backward_weight(const ConvGeometry& g, int batch, std::span<const T> input,
                               std::span<const T> grad_output, std::span<T> grad_weight) {
  assert(grad_weight.size() == g.weight_size());
  const int rows = g.in_channels * g.kernel * g.kernel;
  const int cols = g.out_h() * g.out_w();
  std::vector<T> col;
  if (!is_pointwise(g)) col.resize(static_cast<std::size_t>(rows) * cols);
  for (int n = 0; n < batch; ++n) {
    const T* in = input.data() + n * g.input_size();
    const T* b = in;
    if (!col.empty()) {
      im2col(g, in, col.data());
      b = col.data();
    }
    gemm_nt_accumulate(g.out_channels, rows, cols, grad_output.data() + n * g.output_size(), b,
                       grad_weight.data());
  }
}

#define S2CGAN_INSTANTIATE(T)                                                              \
  template void correlate_forward<T>(const ConvGeometry&, int, std::span<const T>,         \
                                     std::span<const T>, std::span<T>);                    \
  template void correlate_backward_input<T>(const ConvGeometry&, int, std::span<const T>,  \
                                            std::span<const T>, std::span<T>);             \
  template void correlate_backward_weight<T>(const ConvGeometry&, int, std::span<const T>, \
                                             std::span<const T>, std::span<T>);

S2CGAN_INSTANTIATE(float)
S2CGAN_INSTANTIATE(double)
#undef S2CGAN_INSTANTIATE

}  // namespace kernels::parallel
}  // namespace s2cgan
