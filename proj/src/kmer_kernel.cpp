#include "clmb/kmer_kernel.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>

#include "clmb/common.hpp"

namespace clmb {

int rc_index(int code, int k) {
    int rc = 0;
    for (int i = 0; i < k; ++i) {
        int base = code & 3;
        code >>= 2;
        rc = (rc << 2) | (3 - base);
    }
    // digits were consumed least significant first, so rc is already reversed
    return rc;
}

Mat<double> kernel_constraints(int k) {
    if (k < 2 || k > 5) throw input_error("k-mer length must be between 2 and 5");
    int n = 1 << (2 * k);
    std::vector<std::vector<double>> rows;

    // frequencies sum to one
    rows.emplace_back(n, 1.0);

    // strand symmetry: f(w) = f(rc(w))
    for (int w = 0; w < n; ++w) {
        int r = rc_index(w, k);
        if (w < r) {
            std::vector<double> row(n, 0.0);
            row[w] = 1.0;
            row[r] = -1.0;
            rows.push_back(std::move(row));
        }
    }

    // (k-1)-mer marginal consistency: sum_b f(ub) = sum_b f(bu)
    int m = 1 << (2 * (k - 1));
    for (int u = 0; u < m; ++u) {
        std::vector<double> row(n, 0.0);
        for (int b = 0; b < 4; ++b) {
            row[u * 4 + b] += 1.0;
            row[b * m + u] -= 1.0;
        }
        rows.push_back(std::move(row));
    }

    Mat<double> C(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < n; ++j) C(i, j) = rows[i][j];
    return C;
}

/* Householder QR with column pivoting on the transposed constraint matrix.
   The trailing columns of Q beyond the numerical rank span the null space. */
static Mat<double> null_space(const Mat<double>& C) {
    std::size_t n = C.cols; // ambient dimension
    std::size_t m = C.rows; // constraint count
    Mat<double> A(n, m);    // A = C^T
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) A(j, i) = C(i, j);

    std::size_t p = n < m ? n : m;
    std::vector<double> beta(p, 0.0);
    std::vector<double> colnorm(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += A(r, c) * A(r, c);
        colnorm[c] = s;
    }

    double tol = 0.0;
    std::size_t rank = 0;
    for (std::size_t j = 0; j < p; ++j) {
        // pivot: bring the column with the largest remaining norm to front
        std::size_t best = j;
        for (std::size_t c = j + 1; c < m; ++c)
            if (colnorm[c] > colnorm[best]) best = c;
        if (best != j) {
            for (std::size_t r = 0; r < n; ++r) std::swap(A(r, j), A(r, best));
            std::swap(colnorm[j], colnorm[best]);
        }

        double norm2 = 0.0;
        for (std::size_t r = j; r < n; ++r) norm2 += A(r, j) * A(r, j);
        double norm = std::sqrt(norm2);
        if (j == 0) tol = norm * 1e-12 * static_cast<double>(n > m ? n : m);
        if (norm <= tol || norm == 0.0) break;

        double alpha = A(j, j) >= 0.0 ? -norm : norm;
        A(j, j) -= alpha; // column j now holds the Householder vector
        double vnorm2 = 0.0;
        for (std::size_t r = j; r < n; ++r) vnorm2 += A(r, j) * A(r, j);
        beta[j] = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;

        for (std::size_t c = j + 1; c < m; ++c) {
            double dot = 0.0;
            for (std::size_t r = j; r < n; ++r) dot += A(r, j) * A(r, c);
            double f = beta[j] * dot;
            for (std::size_t r = j; r < n; ++r) A(r, c) -= f * A(r, j);
        }
        // the reflected diagonal entry is alpha; store it implicitly via rank
        ++rank;
        colnorm[j] = 0.0;
        for (std::size_t c = j + 1; c < m; ++c) {
            colnorm[c] = 0.0;
            for (std::size_t r = j + 1; r < n; ++r) colnorm[c] += A(r, c) * A(r, c);
        }
    }

    // assemble the trailing columns of Q by applying the reflectors to the
    // relevant columns of the identity
    std::size_t nullity = n - rank;
    Mat<double> K(n, nullity);
    std::vector<double> col(n);
    for (std::size_t c = 0; c < nullity; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = 0.0;
        col[rank + c] = 1.0;
        for (std::size_t j = rank; j-- > 0;) {
            double dot = 0.0;
            for (std::size_t r = j; r < n; ++r) dot += A(r, j) * col[r];
            double f = beta[j] * dot;
            for (std::size_t r = j; r < n; ++r) col[r] -= f * A(r, j);
        }
        for (std::size_t r = 0; r < n; ++r) K(r, c) = col[r];
    }
    return K;
}

KmerKernel build_kernel(int k) {
    Mat<double> C = kernel_constraints(k);
    KmerKernel out;
    out.k = k;
    out.raw_dim = 1 << (2 * k);
    out.matrix = null_space(C);
    out.projected_dim = static_cast<int>(out.matrix.cols);
    if (k == 4 && out.projected_dim != 103)
        throw numeric_error("k=4 kernel dimension is " + std::to_string(out.projected_dim) +
                            ", expected 103");
    return out;
}

static inline int base_code(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        case 'N': return -1;
        default: return -2;
    }
}

std::vector<std::int64_t> count_kmers(const std::string& seq, int k) {
    int n = 1 << (2 * k);
    int mask = n - 1;
    std::vector<std::int64_t> counts(n, 0);
    int code = 0;
    int run = 0;
    for (char c : seq) {
        int b = base_code(c);
        if (b == -2) throw input_error(std::string("invalid base '") + c + "' in sequence");
        if (b < 0) {
            run = 0;
            code = 0;
            continue;
        }
        code = ((code << 2) | b) & mask;
        if (++run >= k) ++counts[code];
    }
    return counts;
}

std::vector<double> compute_composition(const std::string& seq, const KmerKernel& kernel) {
    std::vector<std::int64_t> counts = count_kmers(seq, kernel.k);
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    if (total == 0) throw input_error("sequence has no window of " +
                                      std::to_string(kernel.k) + " definite bases");
    std::vector<double> out(kernel.projected_dim, 0.0);
    double inv = 1.0 / static_cast<double>(total);
    for (int i = 0; i < kernel.raw_dim; ++i) {
        if (counts[i] == 0) continue;
        double f = static_cast<double>(counts[i]) * inv;
        const double* krow = kernel.matrix.row(i);
        for (int j = 0; j < kernel.projected_dim; ++j) out[j] += f * krow[j];
    }
    return out;
}

Mat<double> composition_batch_serial(const std::vector<std::string>& seqs, const KmerKernel& kernel) {
    Mat<double> out(seqs.size(), kernel.projected_dim);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        std::vector<double> row = compute_composition(seqs[i], kernel);
        for (int j = 0; j < kernel.projected_dim; ++j) out(i, j) = row[j];
    }
    return out;
}

Mat<double> composition_batch_omp(const std::vector<std::string>& seqs, const KmerKernel& kernel) {
    Mat<double> out(seqs.size(), kernel.projected_dim);
    std::atomic<bool> failed{false};
    std::string failmsg;
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < static_cast<long long>(seqs.size()); ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            std::vector<double> row = compute_composition(seqs[static_cast<std::size_t>(i)], kernel);
            for (int j = 0; j < kernel.projected_dim; ++j)
                out(static_cast<std::size_t>(i), j) = row[j];
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed.store(true, std::memory_order_relaxed);
                failmsg = e.what();
            }
        }
    }
    if (failed.load()) throw input_error(failmsg);
    return out;
}

Mat<double> composition_batch(const std::vector<std::string>& seqs, const KmerKernel& kernel) {
    if (parallel_enabled()) return composition_batch_omp(seqs, kernel);
    return composition_batch_serial(seqs, kernel);
}

} // namespace clmb
