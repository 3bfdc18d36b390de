#ifndef CLMB_CLUSTER_HPP
#define CLMB_CLUSTER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clmb/matrix.hpp"

namespace clmb {

struct LatentMatrix {
    Mat<float> values;
    std::vector<std::string> contig_ids;
    std::vector<std::string> sample_ids;
    std::vector<int> sample_of_contig;
};

/* assignment[i] = cluster id, contiguous from 0 */
struct Clustering {
    std::vector<int> assignment;
    int cluster_count = 0;
};

struct Bin {
    std::string bin_id;
    int cluster = 0;
    int sample = 0;
    std::vector<std::size_t> members;
};

struct BinSet {
    std::vector<Bin> bins;
};

/* Iterative medoid clustering over cosine distance on unit-normalized rows.
   Seeds at the lowest unclustered index, hill-climbs to a local medoid, then
   reads the cluster radius off the smoothed distance histogram (first valley
   between the near mode and the background mode, with a fixed fallback). */
struct MedoidParams {
    int max_steps = 25;
    double neighbor_radius = 0.05;
    double hist_width = 0.02;
    double hist_range = 1.4;
    int smooth_window = 5;
    int peak_window = 20;
    double valley_ratio = 0.6;
    double fallback_radius = 0.3;
    int min_cluster_size = 1;
};

Clustering iterative_medoid(const Mat<float>& latent, const MedoidParams& p);

struct KmeansParams {
    int k = 750;
    int batch = 4096;
    int max_iter = 25;
    int init_size = 20000;
    double reassignment_ratio = 0.02;
    std::uint64_t seed = 0;
};

Clustering minibatch_kmeans(const Mat<float>& latent, const KmeansParams& p);

struct DbscanParams {
    double eps = 0.35;
    int min_samples = 2;
};

/* Euclidean DBSCAN, O(n^2); noise points come back as singleton clusters. */
Clustering dbscan(const Mat<float>& latent, const DbscanParams& p);

/* Splits every cluster by source sample; bin ids are <cluster>C<sample>S. */
BinSet multi_split(const Clustering& clustering, const std::vector<int>& sample_of_contig,
                   const std::vector<std::string>& sample_ids);

void write_clusters_tsv(const std::string& path, const BinSet& bins,
                        const std::vector<std::string>& contig_ids);

/* bin_id -> contig ids, as parsed back from the TSV schema above */
std::vector<std::pair<std::string, std::vector<std::string>>> read_clusters_tsv(
    const std::string& path);

} // namespace clmb

#endif
