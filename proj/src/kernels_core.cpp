#include "clmb/kernels_core.hpp"

#include "clmb/common.hpp"

namespace clmb::kernels {

/* One output row of C = A * B. The k-loop runs outermost over the row so
   element C[i][j] still receives its additions in ascending k order. */
template <class T>
static inline void matmul_row(const T* A, const T* B, T* C, std::size_t i,
                              std::size_t K, std::size_t N) {
    T* crow = C + i * N;
    for (std::size_t j = 0; j < N; ++j) crow[j] = T(0);
    const T* arow = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
        T a = arow[k];
        const T* brow = B + k * N;
        for (std::size_t j = 0; j < N; ++j) crow[j] += a * brow[j];
    }
}

template <class T>
void matmul_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
    for (std::size_t i = 0; i < M; ++i) matmul_row(A, B, C, i, K, N);
}

template <class T>
void matmul_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(M); ++i)
        matmul_row(A, B, C, static_cast<std::size_t>(i), K, N);
}

template <class T>
void matmul(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
    if (parallel_enabled()) matmul_omp(A, B, C, M, K, N);
    else matmul_serial(A, B, C, M, K, N);
}

template <class T>
static inline void matmul_nt_row(const T* A, const T* B, T* C, std::size_t i,
                                 std::size_t N, std::size_t K) {
    const T* arow = A + i * N;
    T* crow = C + i * K;
    for (std::size_t k = 0; k < K; ++k) {
        const T* brow = B + k * N;
        T acc = T(0);
        for (std::size_t j = 0; j < N; ++j) acc += arow[j] * brow[j];
        crow[k] = acc;
    }
}

template <class T>
void matmul_nt_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K) {
    for (std::size_t i = 0; i < M; ++i) matmul_nt_row(A, B, C, i, N, K);
}

template <class T>
void matmul_nt_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(M); ++i)
        matmul_nt_row(A, B, C, static_cast<std::size_t>(i), N, K);
}

template <class T>
void matmul_nt(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K) {
    if (parallel_enabled()) matmul_nt_omp(A, B, C, M, N, K);
    else matmul_nt_serial(A, B, C, M, N, K);
}

template <class T>
void matmul_tn_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
    for (std::size_t k = 0; k < K; ++k) {
        T* crow = C + k * N;
        for (std::size_t j = 0; j < N; ++j) {
            T acc = T(0);
            for (std::size_t i = 0; i < M; ++i) acc += A[i * K + k] * B[i * N + j];
            crow[j] = acc;
        }
    }
}

template <class T>
void matmul_tn_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < static_cast<long long>(K); ++k) {
        T* crow = C + static_cast<std::size_t>(k) * N;
        for (std::size_t j = 0; j < N; ++j) {
            T acc = T(0);
            for (std::size_t i = 0; i < M; ++i) acc += A[i * K + static_cast<std::size_t>(k)] * B[i * N + j];
            crow[j] = acc;
        }
    }
}

template <class T>
void matmul_tn(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N) {
    if (parallel_enabled()) matmul_tn_omp(A, B, C, M, K, N);
    else matmul_tn_serial(A, B, C, M, K, N);
}

template <class T>
void colsum_serial(const T* A, T* out, std::size_t M, std::size_t N) {
    for (std::size_t j = 0; j < N; ++j) {
        T acc = T(0);
        for (std::size_t i = 0; i < M; ++i) acc += A[i * N + j];
        out[j] = acc;
    }
}

template <class T>
void colsum_omp(const T* A, T* out, std::size_t M, std::size_t N) {
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(N); ++j) {
        T acc = T(0);
        for (std::size_t i = 0; i < M; ++i) acc += A[i * N + static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(j)] = acc;
    }
}

template <class T>
void colsum(const T* A, T* out, std::size_t M, std::size_t N) {
    if (parallel_enabled()) colsum_omp(A, out, M, N);
    else colsum_serial(A, out, M, N);
}

void cosine_from_point_serial(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = X + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += xi[j] * u[j];
        out[i] = 1.0 - acc;
    }
}

void cosine_from_point_omp(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const double* xi = X + static_cast<std::size_t>(i) * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += xi[j] * u[j];
        out[static_cast<std::size_t>(i)] = 1.0 - acc;
    }
}

void cosine_from_point(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
    if (parallel_enabled()) cosine_from_point_omp(X, u, out, n, d);
    else cosine_from_point_serial(X, u, out, n, d);
}

void sqdist_from_point_serial(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = X + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double t = xi[j] - u[j];
            acc += t * t;
        }
        out[i] = acc;
    }
}

void sqdist_from_point_omp(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        const double* xi = X + static_cast<std::size_t>(i) * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double t = xi[j] - u[j];
            acc += t * t;
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
}

void sqdist_from_point(const double* X, const double* u, double* out, std::size_t n, std::size_t d) {
    if (parallel_enabled()) sqdist_from_point_omp(X, u, out, n, d);
    else sqdist_from_point_serial(X, u, out, n, d);
}

#define CLMB_INSTANTIATE(T) \
    template void matmul_serial<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_omp<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_nt_serial<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_nt_omp<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_nt<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_tn_serial<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_tn_omp<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void matmul_tn<T>(const T*, const T*, T*, std::size_t, std::size_t, std::size_t); \
    template void colsum_serial<T>(const T*, T*, std::size_t, std::size_t); \
    template void colsum_omp<T>(const T*, T*, std::size_t, std::size_t); \
    template void colsum<T>(const T*, T*, std::size_t, std::size_t);

CLMB_INSTANTIATE(float)
CLMB_INSTANTIATE(double)

#undef CLMB_INSTANTIATE

} // namespace clmb::kernels
