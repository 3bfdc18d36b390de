#ifndef CLMB_COMMANDS_HPP
#define CLMB_COMMANDS_HPP

#include <cstdint>
#include <string>

#include "clmb/config.hpp"

namespace clmb {

/* Shared state of every subcommand: master seed, worker count and the
   effective option set (defaults, then config file, then flag overrides). */
struct CommonArgs {
    std::uint64_t seed = 1;
    int threads = 0;
    PipelineOptions opts;
};

struct FeaturizeArgs {
    std::string fasta;
    std::string mapping;
    std::string out;
};

struct TrainArgs {
    std::string features;
    std::string checkpoint;
    bool resume = false;
};

struct BinArgs {
    std::string features;
    std::string checkpoint; // needed only for transform == encoded
    std::string out_dir;
    std::string fasta;             // optional; enables per-bin FASTA emission
    std::string feature_set = "both";  // abundance | tnf | both
    std::string transform = "encoded"; // raw | pca | encoded
};

struct BenchArgs {
    std::string clusters;
    std::string reference;
    std::string taxonomy;
    std::string out_dir;
    std::string label = "run";
};

struct SynthArgs {
    std::string out_dir;
};

struct PipelineArgs {
    std::string out_dir;
    std::string fasta;     // optional external dataset; default synthesizes one
    std::string mapping;
    std::string reference; // optional; enables the bench stage
    std::string taxonomy;
};

void cmd_featurize(const FeaturizeArgs& args, const CommonArgs& common);
void cmd_train(const TrainArgs& args, const CommonArgs& common);
void cmd_bin(const BinArgs& args, const CommonArgs& common);
void cmd_bench(const BenchArgs& args, const CommonArgs& common);
void cmd_synth(const SynthArgs& args, const CommonArgs& common);
void cmd_pipeline(const PipelineArgs& args, const CommonArgs& common);

} // namespace clmb

#endif
