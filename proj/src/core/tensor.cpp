#include "core/tensor.hpp"

#include <algorithm>

#if defined(__AVX512F__) && defined(__FMA__)
#include <immintrin.h>
#endif

#include "core/errors.hpp"

namespace celf {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 4) fail_invalid("tensor rank must be 1..4");
    size_t n = 1;
    for (int d : shape_) {
        if (d <= 0) fail_invalid("tensor axes must be positive");
        n *= static_cast<size_t>(d);
    }
    values_.assign(n, 0.0);
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values) {
    Tensor t(std::move(shape));
    if (values.size() != t.numel()) fail_dims("tensor value count does not match shape");
    t.values_ = std::move(values);
    return t;
}

int Tensor::dim(int axis) const {
    if (axis < 0 || axis >= static_cast<int>(shape_.size())) fail_invalid("tensor axis out of range");
    return shape_[static_cast<size_t>(axis)];
}

size_t Tensor::offset(const int* idx, int n) const {
    if (n != static_cast<int>(shape_.size())) fail_dims("index rank does not match tensor rank");
    size_t off = 0;
    for (int a = 0; a < n; ++a) {
        off = off * static_cast<size_t>(shape_[static_cast<size_t>(a)]) + static_cast<size_t>(idx[a]);
    }
    return off;
}

double Tensor::at(int i) const {
    int idx[] = {i};
    return values_[offset(idx, 1)];
}
double Tensor::at(int i, int j) const {
    int idx[] = {i, j};
    return values_[offset(idx, 2)];
}
double Tensor::at(int i, int j, int k) const {
    int idx[] = {i, j, k};
    return values_[offset(idx, 3)];
}
double Tensor::at(int i, int j, int k, int l) const {
    int idx[] = {i, j, k, l};
    return values_[offset(idx, 4)];
}
void Tensor::set(int i, int j, int k, double v) {
    int idx[] = {i, j, k};
    values_[offset(idx, 3)] = v;
}

void Tensor::ensure_grad() {
    if (grad_.empty()) grad_.assign(values_.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad_.empty()) std::fill(grad_.begin(), grad_.end(), 0.0);
}

std::vector<double>& Tensor::grad() {
    if (grad_.empty()) throw StateError("tensor has no gradient buffer");
    return grad_;
}

const std::vector<double>& Tensor::grad() const {
    if (grad_.empty()) throw StateError("tensor has no gradient buffer");
    return grad_;
}

namespace {
constexpr int kColTile = 128;
constexpr int kVl = 8;  // accumulator lanes for transposed products

void gemm_acc_rows(int i0, int i1, int j0, int j1, int k, int n, const double* a, const double* b,
                   double* c) {
    int i = i0;
    for (; i + 4 <= i1; i += 4) {
        double* c0 = c + static_cast<size_t>(i) * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (int p = 0; p < k; ++p) {
            double a0 = a[static_cast<size_t>(i) * k + p];
            double a1 = a[static_cast<size_t>(i + 1) * k + p];
            double a2 = a[static_cast<size_t>(i + 2) * k + p];
            double a3 = a[static_cast<size_t>(i + 3) * k + p];
            const double* br = b + static_cast<size_t>(p) * n;
            for (int j = j0; j < j1; ++j) {
                double bv = br[j];
                c0[j] += a0 * bv;
                c1[j] += a1 * bv;
                c2[j] += a2 * bv;
                c3[j] += a3 * bv;
            }
        }
    }
    for (; i < i1; ++i) {
        double* cr = c + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            double av = a[static_cast<size_t>(i) * k + p];
            const double* br = b + static_cast<size_t>(p) * n;
            for (int j = j0; j < j1; ++j) cr[j] += av * br[j];
        }
    }
}

double dot_split(const double* x, const double* y, int k) {
    double acc[kVl] = {};
    int p = 0;
    for (; p + kVl <= k; p += kVl)
        for (int l = 0; l < kVl; ++l) acc[l] += x[p + l] * y[p + l];
    for (; p < k; ++p) acc[0] += x[p] * y[p];
    double sum = 0.0;
    for (int l = 0; l < kVl; ++l) sum += acc[l];
    return sum;
}

#if defined(__AVX512F__) && defined(__FMA__)
// 4x16 block of c updated with a full k panel; n and lda/ldb in elements.
inline void kern_acc_4x16(int k, const double* a, size_t lda, const double* b, size_t ldb,
                          double* c, size_t ldc) {
    __m512d c00 = _mm512_loadu_pd(c);
    __m512d c01 = _mm512_loadu_pd(c + 8);
    __m512d c10 = _mm512_loadu_pd(c + ldc);
    __m512d c11 = _mm512_loadu_pd(c + ldc + 8);
    __m512d c20 = _mm512_loadu_pd(c + 2 * ldc);
    __m512d c21 = _mm512_loadu_pd(c + 2 * ldc + 8);
    __m512d c30 = _mm512_loadu_pd(c + 3 * ldc);
    __m512d c31 = _mm512_loadu_pd(c + 3 * ldc + 8);
    const double* a0 = a;
    const double* a1 = a + lda;
    const double* a2 = a + 2 * lda;
    const double* a3 = a + 3 * lda;
    for (int p = 0; p < k; ++p) {
        __m512d b0 = _mm512_loadu_pd(b + static_cast<size_t>(p) * ldb);
        __m512d b1 = _mm512_loadu_pd(b + static_cast<size_t>(p) * ldb + 8);
        __m512d av = _mm512_set1_pd(a0[p]);
        c00 = _mm512_fmadd_pd(av, b0, c00);
        c01 = _mm512_fmadd_pd(av, b1, c01);
        av = _mm512_set1_pd(a1[p]);
        c10 = _mm512_fmadd_pd(av, b0, c10);
        c11 = _mm512_fmadd_pd(av, b1, c11);
        av = _mm512_set1_pd(a2[p]);
        c20 = _mm512_fmadd_pd(av, b0, c20);
        c21 = _mm512_fmadd_pd(av, b1, c21);
        av = _mm512_set1_pd(a3[p]);
        c30 = _mm512_fmadd_pd(av, b0, c30);
        c31 = _mm512_fmadd_pd(av, b1, c31);
    }
    _mm512_storeu_pd(c, c00);
    _mm512_storeu_pd(c + 8, c01);
    _mm512_storeu_pd(c + ldc, c10);
    _mm512_storeu_pd(c + ldc + 8, c11);
    _mm512_storeu_pd(c + 2 * ldc, c20);
    _mm512_storeu_pd(c + 2 * ldc + 8, c21);
    _mm512_storeu_pd(c + 3 * ldc, c30);
    _mm512_storeu_pd(c + 3 * ldc + 8, c31);
}

// 4x2 block of dot products between rows of a and rows of b.
inline void kern_abt_4x2(int k, const double* a, size_t lda, const double* b, size_t ldb, double* c,
                         size_t ldc) {
    __m512d acc00 = _mm512_setzero_pd();
    __m512d acc01 = _mm512_setzero_pd();
    __m512d acc10 = _mm512_setzero_pd();
    __m512d acc11 = _mm512_setzero_pd();
    __m512d acc20 = _mm512_setzero_pd();
    __m512d acc21 = _mm512_setzero_pd();
    __m512d acc30 = _mm512_setzero_pd();
    __m512d acc31 = _mm512_setzero_pd();
    const double* b0 = b;
    const double* b1 = b + ldb;
    int p = 0;
    for (; p + 8 <= k; p += 8) {
        __m512d bv0 = _mm512_loadu_pd(b0 + p);
        __m512d bv1 = _mm512_loadu_pd(b1 + p);
        __m512d ar = _mm512_loadu_pd(a + p);
        acc00 = _mm512_fmadd_pd(ar, bv0, acc00);
        acc01 = _mm512_fmadd_pd(ar, bv1, acc01);
        ar = _mm512_loadu_pd(a + lda + p);
        acc10 = _mm512_fmadd_pd(ar, bv0, acc10);
        acc11 = _mm512_fmadd_pd(ar, bv1, acc11);
        ar = _mm512_loadu_pd(a + 2 * lda + p);
        acc20 = _mm512_fmadd_pd(ar, bv0, acc20);
        acc21 = _mm512_fmadd_pd(ar, bv1, acc21);
        ar = _mm512_loadu_pd(a + 3 * lda + p);
        acc30 = _mm512_fmadd_pd(ar, bv0, acc30);
        acc31 = _mm512_fmadd_pd(ar, bv1, acc31);
    }
    double sums[4][2] = {{_mm512_reduce_add_pd(acc00), _mm512_reduce_add_pd(acc01)},
                         {_mm512_reduce_add_pd(acc10), _mm512_reduce_add_pd(acc11)},
                         {_mm512_reduce_add_pd(acc20), _mm512_reduce_add_pd(acc21)},
                         {_mm512_reduce_add_pd(acc30), _mm512_reduce_add_pd(acc31)}};
    for (; p < k; ++p) {
        for (int r = 0; r < 4; ++r) {
            double av = a[static_cast<size_t>(r) * lda + p];
            sums[r][0] += av * b0[p];
            sums[r][1] += av * b1[p];
        }
    }
    for (int r = 0; r < 4; ++r) {
        c[static_cast<size_t>(r) * ldc] += sums[r][0];
        c[static_cast<size_t>(r) * ldc + 1] += sums[r][1];
    }
}
#endif
}

void gemm_acc(int m, int k, int n, const double* a, const double* b, double* c) {
#if defined(__AVX512F__) && defined(__FMA__)
    int nmain = n - n % 16;
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* ai = a + static_cast<size_t>(i) * k;
        double* ci = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < nmain; j += 16)
            kern_acc_4x16(k, ai, static_cast<size_t>(k), b + j, static_cast<size_t>(n), ci + j,
                          static_cast<size_t>(n));
        if (nmain < n) gemm_acc_rows(i, i + 4, nmain, n, k, n, a, b, c);
    }
    if (i < m)
        for (int jb = 0; jb < n; jb += kColTile)
            gemm_acc_rows(i, m, jb, std::min(n, jb + kColTile), k, n, a, b, c);
#else
    for (int jb = 0; jb < n; jb += kColTile)
        gemm_acc_rows(0, m, jb, std::min(n, jb + kColTile), k, n, a, b, c);
#endif
}

void gemm_abt_acc(int m, int k, int n, const double* a, const double* b, double* c) {
#if defined(__AVX512F__) && defined(__FMA__)
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* ai = a + static_cast<size_t>(i) * k;
        double* ci = c + static_cast<size_t>(i) * n;
        int j = 0;
        for (; j + 2 <= n; j += 2)
            kern_abt_4x2(k, ai, static_cast<size_t>(k), b + static_cast<size_t>(j) * k,
                         static_cast<size_t>(k), ci + j, static_cast<size_t>(n));
        for (; j < n; ++j)
            for (int r = 0; r < 4; ++r)
                ci[static_cast<size_t>(r) * n + j] +=
                    dot_split(ai + static_cast<size_t>(r) * k, b + static_cast<size_t>(j) * k, k);
    }
    for (; i < m; ++i)
        for (int j = 0; j < n; ++j)
            c[static_cast<size_t>(i) * n + j] +=
                dot_split(a + static_cast<size_t>(i) * k, b + static_cast<size_t>(j) * k, k);
#else
    constexpr int ti = 4;
    constexpr int tj = 2;
    int i0 = 0;
    for (; i0 + ti <= m; i0 += ti) {
        int j0 = 0;
        for (; j0 + tj <= n; j0 += tj) {
            double acc[ti][tj][kVl] = {};
            int p = 0;
            for (; p + kVl <= k; p += kVl) {
                for (int r = 0; r < ti; ++r) {
                    const double* ar = a + static_cast<size_t>(i0 + r) * k + p;
                    for (int s = 0; s < tj; ++s) {
                        const double* br = b + static_cast<size_t>(j0 + s) * k + p;
                        for (int l = 0; l < kVl; ++l) acc[r][s][l] += ar[l] * br[l];
                    }
                }
            }
            for (; p < k; ++p) {
                for (int r = 0; r < ti; ++r) {
                    for (int s = 0; s < tj; ++s) {
                        acc[r][s][0] += a[static_cast<size_t>(i0 + r) * k + p] *
                                        b[static_cast<size_t>(j0 + s) * k + p];
                    }
                }
            }
            for (int r = 0; r < ti; ++r) {
                for (int s = 0; s < tj; ++s) {
                    double sum = 0.0;
                    for (int l = 0; l < kVl; ++l) sum += acc[r][s][l];
                    c[static_cast<size_t>(i0 + r) * n + j0 + s] += sum;
                }
            }
        }
        for (; j0 < n; ++j0)
            for (int r = 0; r < ti; ++r)
                c[static_cast<size_t>(i0 + r) * n + j0] += dot_split(
                    a + static_cast<size_t>(i0 + r) * k, b + static_cast<size_t>(j0) * k, k);
    }
    for (; i0 < m; ++i0)
        for (int j = 0; j < n; ++j)
            c[static_cast<size_t>(i0) * n + j] +=
                dot_split(a + static_cast<size_t>(i0) * k, b + static_cast<size_t>(j) * k, k);
#endif
}

std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) fail_dims("mse_loss: shape mismatch");
    size_t n = pred.numel();
    Tensor grad(pred.shape());
    const double* p = pred.data();
    const double* t = target.data();
    double* g = grad.data();
    double sum = 0.0;
    double scale = 2.0 / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        double d = p[i] - t[i];
        sum += d * d;
        g[i] = scale * d;
    }
    return {sum / static_cast<double>(n), std::move(grad)};
}

}  // namespace celf
