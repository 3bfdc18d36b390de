#ifndef CLMB_KERNELS_CORE_HPP
#define CLMB_KERNELS_CORE_HPP

#include <cstddef>

namespace clmb::kernels {

/* The hot numeric kernels, each in a serial reference form and an OpenMP
   form. Every output element accumulates its reduction in a fixed ascending
   order, so both forms produce bit-identical results at any thread count.
   The unsuffixed names dispatch on the configured thread count. */

/* C = A * B. A: M x K, B: K x N, C: M x N */
template <class T>
void matmul_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);
template <class T>
void matmul_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);
template <class T>
void matmul(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);

/* C = A * B^T. A: M x N, B: K x N, C: M x K */
template <class T>
void matmul_nt_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K);
template <class T>
void matmul_nt_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K);
template <class T>
void matmul_nt(const T* A, const T* B, T* C, std::size_t M, std::size_t N, std::size_t K);

/* C = A^T * B. A: M x K, B: M x N, C: K x N */
template <class T>
void matmul_tn_serial(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);
template <class T>
void matmul_tn_omp(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);
template <class T>
void matmul_tn(const T* A, const T* B, T* C, std::size_t M, std::size_t K, std::size_t N);

/* out[j] = sum over rows i of A[i][j]. A: M x N */
template <class T>
void colsum_serial(const T* A, T* out, std::size_t M, std::size_t N);
template <class T>
void colsum_omp(const T* A, T* out, std::size_t M, std::size_t N);
template <class T>
void colsum(const T* A, T* out, std::size_t M, std::size_t N);

/* Cosine distances 1 - <X_i, u> for unit-normalized rows and unit u. X: n x d */
void cosine_from_point_serial(const double* X, const double* u, double* out, std::size_t n, std::size_t d);
void cosine_from_point_omp(const double* X, const double* u, double* out, std::size_t n, std::size_t d);
void cosine_from_point(const double* X, const double* u, double* out, std::size_t n, std::size_t d);

/* Squared Euclidean distances from each row of X to point u. X: n x d */
void sqdist_from_point_serial(const double* X, const double* u, double* out, std::size_t n, std::size_t d);
void sqdist_from_point_omp(const double* X, const double* u, double* out, std::size_t n, std::size_t d);
void sqdist_from_point(const double* X, const double* u, double* out, std::size_t n, std::size_t d);

} // namespace clmb::kernels

#endif
