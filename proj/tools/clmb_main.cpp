#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "clmb/commands.hpp"
#include "clmb/common.hpp"

namespace {

const std::vector<std::string> kFeatureSets{"abundance", "tnf", "both"};
const std::vector<std::string> kTransforms{"raw", "pca", "encoded"};
const std::vector<std::string> kAlgorithms{"medoid", "kmeans", "dbscan"};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CLMB: contrastive-learning based metagenomic binning"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    int threads = 0;
    std::string config_path;
    std::string log_level = "info";
    app.add_option("--seed", seed, "master random seed (default 1)");
    app.add_option("--threads", threads, "worker threads; 0 = OpenMP default, 1 = serial");
    app.add_option("--config", config_path, "config file with section.key = value lines");
    app.add_option("--log-level", log_level, "debug, info, warn or error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    clmb::FeaturizeArgs fe;
    int fe_k = 4, fe_min_length = 2000;
    CLI::App* c_fe = app.add_subcommand("featurize", "compute abundance + TNF features");
    c_fe->add_option("fasta", fe.fasta, "contig FASTA, headers sample|contig")->required();
    c_fe->add_option("mapping", fe.mapping, "read mapping TSV (mandatory abundance input)")->required();
    c_fe->add_option("--out", fe.out, "output feature file")->required();
    CLI::Option* o_fe_k = c_fe->add_option("-k,--kmer-k", fe_k, "k-mer size (default 4)");
    CLI::Option* o_fe_min = c_fe->add_option("--min-length", fe_min_length,
                                             "minimum contig length (default 2000)");

    clmb::TrainArgs tr;
    int tr_epochs = 0, tr_batch = 0;
    double tr_lr = 0.0;
    CLI::App* c_tr = app.add_subcommand("train", "train the VAE on a feature file");
    c_tr->add_option("features", tr.features, "feature file from featurize")->required();
    c_tr->add_option("--out", tr.checkpoint, "output checkpoint path")->required();
    c_tr->add_flag("--resume", tr.resume, "continue from the existing checkpoint");
    CLI::Option* o_tr_epochs = c_tr->add_option("--epochs", tr_epochs, "training epochs");
    CLI::Option* o_tr_batch = c_tr->add_option("--batch-size", tr_batch, "minibatch size");
    CLI::Option* o_tr_lr = c_tr->add_option("--lr", tr_lr, "Adam learning rate");

    clmb::BinArgs bi;
    std::string bi_algorithm;
    CLI::App* c_bi = app.add_subcommand("bin", "encode, cluster and split into bins");
    c_bi->add_option("feature_file", bi.features, "feature file from featurize")->required();
    c_bi->add_option("--out", bi.out_dir, "output directory")->required();
    c_bi->add_option("--checkpoint", bi.checkpoint, "trained checkpoint (for --transform encoded)");
    c_bi->add_option("--fasta", bi.fasta, "contig FASTA; enables per-bin FASTA output");
    c_bi->add_option("--features", bi.feature_set, "abundance, tnf or both (default both)")
        ->check(CLI::IsMember(kFeatureSets));
    c_bi->add_option("--transform", bi.transform, "raw, pca or encoded (default encoded)")
        ->check(CLI::IsMember(kTransforms));
    CLI::Option* o_bi_algo = c_bi->add_option("--algorithm", bi_algorithm,
                                              "medoid, kmeans or dbscan (default medoid)")
                                 ->check(CLI::IsMember(kAlgorithms));

    clmb::BenchArgs be;
    CLI::App* c_be = app.add_subcommand("bench", "evaluate bins against a reference");
    c_be->add_option("clusters", be.clusters, "clusters TSV from bin")->required();
    c_be->add_option("reference", be.reference, "reference map TSV")->required();
    c_be->add_option("taxonomy", be.taxonomy, "taxonomy TSV")->required();
    c_be->add_option("--out", be.out_dir, "output directory")->required();
    c_be->add_option("--label", be.label, "label column for the report (default run)");

    clmb::SynthArgs sy;
    CLI::App* c_sy = app.add_subcommand("synth", "generate a synthetic dataset");
    c_sy->add_option("--out", sy.out_dir, "output directory")->required();

    clmb::PipelineArgs pi;
    CLI::App* c_pi = app.add_subcommand("pipeline", "synth/featurize/train/bin/bench in one go");
    c_pi->add_option("--out", pi.out_dir, "output directory")->required();
    c_pi->add_option("--fasta", pi.fasta, "external contig FASTA (default synthesizes data)");
    c_pi->add_option("--mapping", pi.mapping, "external mapping TSV");
    c_pi->add_option("--reference", pi.reference, "reference map TSV for the bench stage");
    c_pi->add_option("--taxonomy", pi.taxonomy, "taxonomy TSV for the bench stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        clmb::set_log_level(log_level);
        clmb::CommonArgs common;
        common.seed = seed;
        common.threads = threads;
        if (!config_path.empty())
            clmb::apply_config(clmb::parse_config_file(config_path), common.opts);

        if (*o_fe_k) common.opts.featurize.kmer_k = fe_k;
        if (*o_fe_min) common.opts.featurize.min_length = fe_min_length;
        if (*o_tr_epochs) common.opts.train.epochs = tr_epochs;
        if (*o_tr_batch) common.opts.train.batch_size = tr_batch;
        if (*o_tr_lr) common.opts.train.learning_rate = tr_lr;
        if (*o_bi_algo) common.opts.cluster.algorithm = bi_algorithm;

        if (c_fe->parsed()) clmb::cmd_featurize(fe, common);
        else if (c_tr->parsed()) clmb::cmd_train(tr, common);
        else if (c_bi->parsed()) clmb::cmd_bin(bi, common);
        else if (c_be->parsed()) clmb::cmd_bench(be, common);
        else if (c_sy->parsed()) clmb::cmd_synth(sy, common);
        else if (c_pi->parsed()) clmb::cmd_pipeline(pi, common);
        return 0;
    } catch (const clmb::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const clmb::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
