#ifndef CLMB_SYNTH_HPP
#define CLMB_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clmb/fasta.hpp"
#include "clmb/mapping.hpp"

namespace clmb {

/* Generator for a desk-scale multi-sample dataset with known provenance.
   Genomes are order-3 Markov sequences; the first 2*twin_pairs genomes share
   transition tables pairwise ("twins") and are placed in complementary sample
   subsets, so composition alone cannot separate them but abundance can.
   Each (genome, sample) pair is fragmented independently, mimicking one
   assembly per sample over the same underlying organisms. */
struct SynthConfig {
    int genomes = 20;
    int twin_pairs = 6; // genomes 2p and 2p+1 are twins for p < twin_pairs
    int samples = 5;
    int genome_len = 240000;
    int contig_min = 8000;
    int contig_max = 16000;
    double read_rate = 8000.0;   // mean reads per (sample, genome)
    double read_sigma = 1.5;     // log-normal spread of per-(sample, genome) rates
    double presence_drop = 0.25; // P[(sample, genome) absent]; every genome kept in >= 2 samples
    double markov_alpha = 0.7;   // Dirichlet concentration of transition rows
    double min_divergence = 0.25; // min tetramer-profile L1 between distinct-table genomes
    int max_attempts = 20;        // table regeneration attempts to reach min_divergence
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthDataset {
    std::vector<ContigRecord> contigs;   // ids g<g>s<s>c<j>, sample ids s<s>
    std::vector<MappingRecord> mappings; // one record per read, n = 1
    ReferenceMap reference;              // spans, genome lengths, taxonomy
};

SynthDataset synthesize_dataset(const SynthConfig& cfg);

/* Writes contigs.fna, mappings.tsv, reference.tsv, taxonomy.tsv into dir
   (created if missing). */
void write_dataset(const std::string& dir, const SynthDataset& ds);

} // namespace clmb

#endif
