#ifndef CLMB_FEATURES_HPP
#define CLMB_FEATURES_HPP

#include <string>
#include <vector>

#include "clmb/fasta.hpp"
#include "clmb/kmer_kernel.hpp"
#include "clmb/mapping.hpp"
#include "clmb/matrix.hpp"

namespace clmb {

/* Normalized, concatenation-ready features: abundance rows are distributions
   over samples, composition columns are z-scaled across contigs. */
struct FeatureMatrix {
    Mat<float> abundance; // n x s
    Mat<float> tnf;       // n x tnf_dim
    std::vector<std::string> contig_ids;
    std::vector<std::string> sample_ids;
    std::vector<int> sample_of_contig;

    std::size_t n() const { return abundance.rows; }
    int s() const { return static_cast<int>(abundance.cols); }
    int tnf_dim() const { return static_cast<int>(tnf.cols); }

    /* rows laid out as [abundance | tnf], the network input */
    Mat<float> concat() const;
};

/* Raw per-sample RPKM. A read mapping to n contigs contributes 1/n to each;
   the per-sample total counts every mapped read once. With strict_contigs
   off, contributions onto contigs absent from `contigs` are dropped while the
   read still counts toward its sample total. */
Mat<double> compute_rpkm(const std::vector<MappingRecord>& mappings,
                         const std::vector<ContigRecord>& contigs,
                         const std::vector<std::string>& sample_ids,
                         bool strict_contigs = true);

FeatureMatrix normalize_features(const Mat<double>& tnf_raw,
                                 const Mat<double>& rpkm,
                                 const std::vector<ContigRecord>& contigs,
                                 const std::vector<std::string>& sample_ids);

/* Full featurization: filter, compose, count, normalize. */
FeatureMatrix featurize(const std::vector<ContigRecord>& contigs,
                        const std::vector<MappingRecord>& mappings,
                        const std::vector<std::string>& sample_ids,
                        const KmerKernel& kernel,
                        std::size_t min_length = 2000);

void save_features(const std::string& path, const FeatureMatrix& fm);
FeatureMatrix load_features(const std::string& path);
void export_features_tsv(const std::string& path, const FeatureMatrix& fm);

} // namespace clmb

#endif
