#ifndef CLMB_KMER_KERNEL_HPP
#define CLMB_KMER_KERNEL_HPP

#include <string>
#include <vector>

#include "clmb/matrix.hpp"

namespace clmb {

/* Orthonormal projection from raw k-mer frequency space into the subspace
   left free by the composition constraints (strand symmetry, (k-1)-mer
   marginal consistency, frequencies summing to one). For k = 4 the free
   subspace has dimension 103. */
struct KmerKernel {
    int k = 0;
    int raw_dim = 0;
    int projected_dim = 0;
    Mat<double> matrix; // raw_dim x projected_dim, orthonormal columns
};

/* Index of the reverse complement of the k-mer with the given code.
   Base codes: A=0, C=1, G=2, T=3; first base is the most significant digit. */
int rc_index(int code, int k);

/* Rows of the constraint system whose null space the kernel spans. */
Mat<double> kernel_constraints(int k);

KmerKernel build_kernel(int k);

/* Project a sequence's k-mer frequencies through the kernel. Windows that
   contain anything but A/C/G/T are skipped; a sequence with no valid window
   is rejected. */
std::vector<double> compute_composition(const std::string& seq, const KmerKernel& kernel);

/* Raw k-mer counts of a sequence (helper shared with the synthesizer). */
std::vector<std::int64_t> count_kmers(const std::string& seq, int k);

/* Compositions for a batch of sequences, parallel over sequences. */
Mat<double> composition_batch(const std::vector<std::string>& seqs, const KmerKernel& kernel);
Mat<double> composition_batch_serial(const std::vector<std::string>& seqs, const KmerKernel& kernel);
Mat<double> composition_batch_omp(const std::vector<std::string>& seqs, const KmerKernel& kernel);

} // namespace clmb

#endif
