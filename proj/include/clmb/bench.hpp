#ifndef CLMB_BENCH_HPP
#define CLMB_BENCH_HPP

#include <array>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clmb/cluster.hpp"
#include "clmb/features.hpp"
#include "clmb/mapping.hpp"
#include "clmb/matrix.hpp"

namespace clmb {

struct BinGenomeMetrics {
    std::string bin_id;
    std::string genome_id; // best-TP genome; empty if the bin hit no genome
    std::int64_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0;
    double recall = 0.0;
};

using NamedBins = std::vector<std::pair<std::string, std::vector<std::string>>>;

NamedBins to_named_bins(const BinSet& bins, const std::vector<std::string>& contig_ids);

/* Nucleotide-level metrics per bin against its best-matching genome.
   Coverage is interval-union arithmetic; FN is relative to the bases the
   dataset (all binned contigs) covers on that genome. A binned contig absent
   from the reference is an error unless its length is supplied, in which
   case every base of it counts as FP. */
std::vector<BinGenomeMetrics> evaluate_bins(
    const NamedBins& bins, const ReferenceMap& truth,
    const std::unordered_map<std::string, std::int64_t>* contig_lengths = nullptr);

struct EvalReport {
    std::vector<double> recall_grid = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    /* counts[rank][threshold], ranks ordered strain, species, genus */
    std::array<std::vector<int>, 3> counts;
    int nc_count = 0;
    /* per genome: best recall and that bin's precision, precision floor applied */
    std::vector<std::pair<std::string, std::pair<double, double>>> genome_best;
};

EvalReport count_recovered(const std::vector<BinGenomeMetrics>& metrics,
                           const ReferenceMap& truth, double precision_floor = 0.95,
                           const std::vector<double>& recall_grid = {0.5, 0.6, 0.7, 0.8,
                                                                     0.9, 0.95, 0.99});

/* Mean-centered projection onto the top principal directions, computed from
   the covariance by a Jacobi eigen decomposition. */
Mat<float> pca_project(const Mat<float>& data, int dims);

void write_bin_metrics_tsv(const std::string& path,
                           const std::vector<BinGenomeMetrics>& metrics);
void write_report_tsv(const std::string& path, const EvalReport& report,
                      const std::string& label);

} // namespace clmb

#endif
