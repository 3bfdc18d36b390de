#ifndef CLMB_CONFIG_HPP
#define CLMB_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clmb/augment.hpp"
#include "clmb/cluster.hpp"
#include "clmb/nn.hpp"
#include "clmb/synth.hpp"
#include "clmb/train.hpp"

namespace clmb {

/* Plain-text config: `section.key = value` lines, `#` starts a comment.
   Later lines override earlier ones. */
struct ConfigFile {
    std::map<std::string, std::string> values;
};

ConfigFile parse_config(std::istream& in);
ConfigFile parse_config_file(const std::string& path);

struct FeaturizeOptions {
    int kmer_k = 4;
    int min_length = 2000;
};

struct ClusterOptions {
    std::string algorithm = "medoid"; // medoid | kmeans | dbscan
    MedoidParams medoid;
    KmeansParams kmeans;
    DbscanParams dbscan;
};

/* Every tunable the CLI exposes, with library defaults. spec.s and
   spec.tnf_dim are filled from the data at run time, not from config. */
struct PipelineOptions {
    FeaturizeOptions featurize;
    AugmentConfig augment;
    NetworkSpec spec;
    TrainConfig train;
    ClusterOptions cluster;
    SynthConfig synth;
};

/* Applies recognized keys onto opts; an unrecognized key or an unparsable
   value is an input_error naming the key. */
void apply_config(const ConfigFile& cfg, PipelineOptions& opts);

/* The full key set with current values, for the manifest echo. */
std::map<std::string, std::string> effective_config(const PipelineOptions& opts);

std::string hash_file_fnv1a(const std::string& path);

struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    int threads = 0;
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, std::string>> inputs; // path, content hash
    std::vector<std::string> outputs;
    std::vector<std::pair<std::string, double>> durations; // phase, seconds
};

void write_manifest(const std::string& path, const Manifest& m);

} // namespace clmb

#endif
