#include "upmclp/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define UPMCLP_X86 1
#include <immintrin.h>
#elif defined(__aarch64__)
#define UPMCLP_NEON 1
#include <arm_neon.h>
#endif

namespace upmclp::kernels {

namespace ref {

void minplus_relax(double* row, const double* other, double add, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double cand = add + other[j];
    if (cand < row[j]) row[j] = cand;
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

double dot(const double* x, const double* y, std::size_t n) {
  // Four independent accumulators, same reduction order as the vector paths.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += x[j] * y[j];
    s1 += x[j + 1] * y[j + 1];
    s2 += x[j + 2] * y[j + 2];
    s3 += x[j + 3] * y[j + 3];
  }
  double tail = 0.0;
  for (; j < n; ++j) tail += x[j] * y[j];
  return ((s0 + s2) + (s1 + s3)) + tail;
}

}  // namespace ref

#if UPMCLP_X86

__attribute__((target("avx2"))) static void minplus_relax_avx2(double* row, const double* other,
                                                               double add, std::size_t n) {
  const __m256d vadd = _mm256_set1_pd(add);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d cand = _mm256_add_pd(vadd, _mm256_loadu_pd(other + j));
    const __m256d cur = _mm256_loadu_pd(row + j);
    _mm256_storeu_pd(row + j, _mm256_min_pd(cur, cand));
  }
  ref::minplus_relax(row + j, other + j, add, n - j);
}

__attribute__((target("avx2"))) static void axpy_avx2(double a, const double* x, double* y,
                                                      std::size_t n) {
  // mul+add rather than fma so results match the scalar path bit for bit
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d t = _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    _mm256_storeu_pd(y + j, t);
  }
  ref::axpy(a, x + j, y + j, n - j);
}

__attribute__((target("avx2"))) static double dot_avx2(const double* x, const double* y,
                                                       std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double tail = 0.0;
  for (; j < n; ++j) tail += x[j] * y[j];
  return ((lane[0] + lane[2]) + (lane[1] + lane[3])) + tail;
}

#endif  // UPMCLP_X86

#if UPMCLP_NEON

static void minplus_relax_neon(double* row, const double* other, double add, std::size_t n) {
  const float64x2_t vadd = vdupq_n_f64(add);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t cand = vaddq_f64(vadd, vld1q_f64(other + j));
    vst1q_f64(row + j, vminq_f64(vld1q_f64(row + j), cand));
  }
  ref::minplus_relax(row + j, other + j, add, n - j);
}

static void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2)
    vst1q_f64(y + j, vaddq_f64(vld1q_f64(y + j), vmulq_f64(va, vld1q_f64(x + j))));
  ref::axpy(a, x + j, y + j, n - j);
}

static double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    a0 = vaddq_f64(a0, vmulq_f64(vld1q_f64(x + j), vld1q_f64(y + j)));
    a1 = vaddq_f64(a1, vmulq_f64(vld1q_f64(x + j + 2), vld1q_f64(y + j + 2)));
  }
  double tail = 0.0;
  for (; j < n; ++j) tail += x[j] * y[j];
  return ((vgetq_lane_f64(a0, 0) + vgetq_lane_f64(a1, 0)) +
          (vgetq_lane_f64(a0, 1) + vgetq_lane_f64(a1, 1))) +
         tail;
}

#endif  // UPMCLP_NEON

namespace {

struct Dispatch {
  void (*minplus)(double*, const double*, double, std::size_t) = &ref::minplus_relax;
  void (*axpy)(double, const double*, double*, std::size_t) = &ref::axpy;
  double (*dot)(const double*, const double*, std::size_t) = &ref::dot;
  const char* name = "scalar";

  Dispatch() {
#if UPMCLP_X86
    if (__builtin_cpu_supports("avx2")) {
      minplus = &minplus_relax_avx2;
      axpy = &axpy_avx2;
      dot = &dot_avx2;
      name = "avx2";
    }
#elif UPMCLP_NEON
    minplus = &minplus_relax_neon;
    axpy = &axpy_neon;
    dot = &dot_neon;
    name = "neon";
#endif
  }
};

const Dispatch& dispatch() {
  static const Dispatch d;
  return d;
}

}  // namespace

void minplus_relax(double* row, const double* other, double add, std::size_t n) {
  dispatch().minplus(row, other, add, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) { dispatch().axpy(a, x, y, n); }

double dot(const double* x, const double* y, std::size_t n) { return dispatch().dot(x, y, n); }

const char* active_backend() { return dispatch().name; }

}  // namespace upmclp::kernels
