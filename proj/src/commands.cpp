#include "clmb/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "clmb/bench.hpp"
#include "clmb/cluster.hpp"
#include "clmb/common.hpp"
#include "clmb/fasta.hpp"
#include "clmb/features.hpp"
#include "clmb/kmer_kernel.hpp"
#include "clmb/mapping.hpp"
#include "clmb/nn.hpp"
#include "clmb/rng.hpp"
#include "clmb/synth.hpp"
#include "clmb/train.hpp"

namespace clmb {

namespace {

class PhaseClock {
public:
    void start() { t0_ = std::chrono::steady_clock::now(); }
    double stop() {
        auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_{};
};

Manifest start_manifest(const std::string& command, const CommonArgs& common) {
    Manifest m;
    m.command = command;
    m.seed = common.seed;
    m.threads = common.threads;
    m.config = effective_config(common.opts);
    return m;
}

void add_input(Manifest& m, const std::string& path) {
    if (!path.empty()) m.inputs.emplace_back(path, hash_file_fnv1a(path));
}

std::vector<std::string> collect_sample_ids(const std::vector<ContigRecord>& contigs) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const ContigRecord& c : contigs)
        if (seen.insert(c.sample_id).second) ids.push_back(c.sample_id);
    return ids;
}

/* Column selection for the fusion experiments: the abundance block, the
   composition block, or both. */
Mat<float> select_features(const FeatureMatrix& fm, const std::string& feature_set) {
    if (feature_set == "both") return fm.concat();
    int lo = 0, hi = 0;
    if (feature_set == "abundance") {
        lo = 0;
        hi = fm.s();
    } else if (feature_set == "tnf") {
        lo = fm.s();
        hi = fm.s() + fm.tnf_dim();
    } else {
        throw input_error("unknown feature set '" + feature_set +
                          "' (expected abundance, tnf or both)");
    }
    Mat<float> full = fm.concat();
    Mat<float> out(full.rows, static_cast<std::size_t>(hi - lo));
    for (std::size_t i = 0; i < full.rows; ++i)
        for (int j = lo; j < hi; ++j)
            out(i, static_cast<std::size_t>(j - lo)) = full(i, static_cast<std::size_t>(j));
    return out;
}

void write_bin_fastas(const std::string& dir, const BinSet& bins,
                      const std::vector<std::string>& contig_ids,
                      const std::vector<ContigRecord>& records, Manifest& manifest) {
    std::filesystem::create_directories(dir);
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].contig_id] = i;
    std::size_t written = 0;
    for (const Bin& bin : bins.bins) {
        std::vector<ContigRecord> members;
        for (std::size_t idx : bin.members) {
            auto it = by_id.find(contig_ids[idx]);
            if (it == by_id.end()) {
                log_warn("bin " + bin.bin_id + ": contig " + contig_ids[idx] +
                         " is not in the supplied FASTA, skipping");
                continue;
            }
            members.push_back(records[it->second]);
            ++written;
        }
        std::string path = dir + "/" + bin.bin_id + ".fna";
        write_fasta_file(path, members);
        manifest.outputs.push_back(path);
    }
    if (written < records.size())
        log_info("bin FASTA: " + std::to_string(records.size() - written) +
                 " of " + std::to_string(records.size()) +
                 " input contigs are in no bin (filtered before featurization)");
}

} // namespace

void cmd_featurize(const FeaturizeArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("featurize", common);
    add_input(manifest, args.fasta);
    add_input(manifest, args.mapping);
    PhaseClock clock;

    clock.start();
    std::vector<ContigRecord> contigs = parse_fasta_file(args.fasta);
    std::vector<std::string> sample_ids = collect_sample_ids(contigs);
    std::unordered_set<std::string> known;
    for (const ContigRecord& c : contigs) known.insert(c.contig_id);
    std::vector<MappingRecord> mappings = parse_mapping_file(args.mapping, known);
    manifest.durations.emplace_back("parse", clock.stop());

    clock.start();
    KmerKernel kernel = build_kernel(common.opts.featurize.kmer_k);
    FeatureMatrix fm = featurize(contigs, mappings, sample_ids, kernel,
                                 static_cast<std::size_t>(common.opts.featurize.min_length));
    manifest.durations.emplace_back("featurize", clock.stop());

    clock.start();
    save_features(args.out, fm);
    manifest.outputs.push_back(args.out);
    manifest.durations.emplace_back("write", clock.stop());
    write_manifest(args.out + ".manifest.json", manifest);
    log_info("featurize: " + std::to_string(fm.n()) + " contigs, " +
             std::to_string(fm.s()) + " samples, tnf dim " + std::to_string(fm.tnf_dim()));
}

void cmd_train(const TrainArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("train", common);
    add_input(manifest, args.features);
    PhaseClock clock;

    clock.start();
    FeatureMatrix fm = load_features(args.features);
    manifest.durations.emplace_back("load", clock.stop());

    TrainConfig cfg = common.opts.train;
    cfg.aug = common.opts.augment;
    cfg.seed = common.seed;

    clock.start();
    TrainResult result;
    if (args.resume) {
        add_input(manifest, args.checkpoint);
        Checkpoint start = load_checkpoint(args.checkpoint);
        result = resume_training(fm, cfg, std::move(start));
    } else {
        NetworkSpec spec = common.opts.spec;
        spec.s = fm.s();
        spec.tnf_dim = fm.tnf_dim();
        result = train_vae(fm, spec, cfg);
    }
    manifest.durations.emplace_back("train", clock.stop());

    clock.start();
    save_checkpoint(args.checkpoint, result.state);
    manifest.outputs.push_back(args.checkpoint);
    std::string log_path = args.checkpoint + ".loss.tsv";
    write_loss_log(log_path, result.log);
    manifest.outputs.push_back(log_path);
    manifest.durations.emplace_back("write", clock.stop());
    write_manifest(args.checkpoint + ".manifest.json", manifest);
}

void cmd_bin(const BinArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("bin", common);
    add_input(manifest, args.features);
    PhaseClock clock;

    clock.start();
    FeatureMatrix fm = load_features(args.features);
    manifest.durations.emplace_back("load", clock.stop());

    clock.start();
    Mat<float> points;
    if (args.transform == "encoded") {
        if (args.feature_set != "both")
            throw input_error("the encoded transform uses the full feature vector; "
                              "pass --features both");
        if (args.checkpoint.empty())
            throw input_error("the encoded transform needs --checkpoint");
        add_input(manifest, args.checkpoint);
        Checkpoint ck = load_checkpoint(args.checkpoint);
        if (ck.params.spec.s != fm.s() || ck.params.spec.tnf_dim != fm.tnf_dim())
            throw input_error("checkpoint was trained on s=" + std::to_string(ck.params.spec.s) +
                              ", tnf_dim=" + std::to_string(ck.params.spec.tnf_dim) +
                              " but the feature file has s=" + std::to_string(fm.s()) +
                              ", tnf_dim=" + std::to_string(fm.tnf_dim()));
        points = encode(ck.params, fm.concat());
    } else if (args.transform == "raw") {
        points = select_features(fm, args.feature_set);
    } else if (args.transform == "pca") {
        Mat<float> raw = select_features(fm, args.feature_set);
        int dims = common.opts.spec.latent_dim;
        if (dims > static_cast<int>(raw.cols)) dims = static_cast<int>(raw.cols);
        points = pca_project(raw, dims);
    } else {
        throw input_error("unknown transform '" + args.transform +
                          "' (expected raw, pca or encoded)");
    }
    manifest.durations.emplace_back("transform", clock.stop());

    clock.start();
    Clustering clustering;
    const ClusterOptions& copt = common.opts.cluster;
    if (copt.algorithm == "medoid") {
        clustering = iterative_medoid(points, copt.medoid);
    } else if (copt.algorithm == "kmeans") {
        KmeansParams kp = copt.kmeans;
        kp.seed = common.seed;
        clustering = minibatch_kmeans(points, kp);
    } else if (copt.algorithm == "dbscan") {
        clustering = dbscan(points, copt.dbscan);
    } else {
        throw input_error("unknown clustering algorithm '" + copt.algorithm + "'");
    }
    BinSet bins = multi_split(clustering, fm.sample_of_contig, fm.sample_ids);
    manifest.durations.emplace_back("cluster", clock.stop());

    clock.start();
    std::filesystem::create_directories(args.out_dir);
    std::string clusters_path = args.out_dir + "/clusters.tsv";
    write_clusters_tsv(clusters_path, bins, fm.contig_ids);
    manifest.outputs.push_back(clusters_path);
    if (!args.fasta.empty()) {
        add_input(manifest, args.fasta);
        std::vector<ContigRecord> records = parse_fasta_file(args.fasta);
        write_bin_fastas(args.out_dir + "/bins", bins, fm.contig_ids, records, manifest);
    }
    manifest.durations.emplace_back("write", clock.stop());
    write_manifest(args.out_dir + "/manifest.json", manifest);
    log_info("bin: " + std::to_string(clustering.cluster_count) + " clusters, " +
             std::to_string(bins.bins.size()) + " bins");
}

void cmd_bench(const BenchArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("bench", common);
    add_input(manifest, args.clusters);
    add_input(manifest, args.reference);
    add_input(manifest, args.taxonomy);
    PhaseClock clock;

    clock.start();
    NamedBins bins = read_clusters_tsv(args.clusters);
    ReferenceMap ref = parse_reference_file(args.reference);
    parse_taxonomy_file(args.taxonomy, ref);
    manifest.durations.emplace_back("load", clock.stop());

    clock.start();
    std::vector<BinGenomeMetrics> metrics = evaluate_bins(bins, ref);
    EvalReport report = count_recovered(metrics, ref);
    manifest.durations.emplace_back("evaluate", clock.stop());

    clock.start();
    std::filesystem::create_directories(args.out_dir);
    std::string metrics_path = args.out_dir + "/bin_metrics.tsv";
    std::string report_path = args.out_dir + "/report.tsv";
    write_bin_metrics_tsv(metrics_path, metrics);
    write_report_tsv(report_path, report, args.label);
    manifest.outputs.push_back(metrics_path);
    manifest.outputs.push_back(report_path);
    manifest.durations.emplace_back("write", clock.stop());
    write_manifest(args.out_dir + "/bench_manifest.json", manifest);
    log_info("bench: " + std::to_string(report.nc_count) + " NC genomes from " +
             std::to_string(bins.size()) + " bins");
}

void cmd_synth(const SynthArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("synth", common);
    PhaseClock clock;

    clock.start();
    SynthConfig cfg = common.opts.synth;
    cfg.seed = common.seed;
    SynthDataset ds = synthesize_dataset(cfg);
    manifest.durations.emplace_back("generate", clock.stop());

    clock.start();
    write_dataset(args.out_dir, ds);
    for (const char* name : {"contigs.fna", "mappings.tsv", "reference.tsv", "taxonomy.tsv"})
        manifest.outputs.push_back(args.out_dir + "/" + name);
    manifest.durations.emplace_back("write", clock.stop());
    write_manifest(args.out_dir + "/manifest.json", manifest);
}

void cmd_pipeline(const PipelineArgs& args, const CommonArgs& common) {
    set_thread_count(common.threads);
    Manifest manifest = start_manifest("pipeline", common);
    PhaseClock clock;
    std::filesystem::create_directories(args.out_dir);

    std::string fasta = args.fasta;
    std::string mapping = args.mapping;
    std::string reference = args.reference;
    std::string taxonomy = args.taxonomy;
    if (fasta.empty() != mapping.empty())
        throw input_error("pipeline: --fasta and --mapping must be given together");
    if (fasta.empty()) {
        clock.start();
        SynthArgs sa;
        sa.out_dir = args.out_dir + "/dataset";
        cmd_synth(sa, common);
        fasta = sa.out_dir + "/contigs.fna";
        mapping = sa.out_dir + "/mappings.tsv";
        reference = sa.out_dir + "/reference.tsv";
        taxonomy = sa.out_dir + "/taxonomy.tsv";
        manifest.durations.emplace_back("synth", clock.stop());
    }
    add_input(manifest, fasta);
    add_input(manifest, mapping);

    clock.start();
    FeaturizeArgs fa;
    fa.fasta = fasta;
    fa.mapping = mapping;
    fa.out = args.out_dir + "/features.clmb";
    cmd_featurize(fa, common);
    manifest.outputs.push_back(fa.out);
    manifest.durations.emplace_back("featurize", clock.stop());

    clock.start();
    TrainArgs ta;
    ta.features = fa.out;
    ta.checkpoint = args.out_dir + "/model.ckpt";
    cmd_train(ta, common);
    manifest.outputs.push_back(ta.checkpoint);
    manifest.durations.emplace_back("train", clock.stop());

    clock.start();
    BinArgs ba;
    ba.features = fa.out;
    ba.checkpoint = ta.checkpoint;
    ba.out_dir = args.out_dir;
    ba.fasta = fasta;
    cmd_bin(ba, common);
    manifest.outputs.push_back(args.out_dir + "/clusters.tsv");
    manifest.durations.emplace_back("bin", clock.stop());

    if (!reference.empty() && !taxonomy.empty()) {
        clock.start();
        BenchArgs bba;
        bba.clusters = args.out_dir + "/clusters.tsv";
        bba.reference = reference;
        bba.taxonomy = taxonomy;
        bba.out_dir = args.out_dir;
        bba.label = "pipeline";
        cmd_bench(bba, common);
        manifest.outputs.push_back(args.out_dir + "/report.tsv");
        manifest.durations.emplace_back("bench", clock.stop());
    } else {
        log_info("pipeline: no reference/taxonomy supplied, skipping the bench stage");
    }
    write_manifest(args.out_dir + "/pipeline_manifest.json", manifest);
}

} // namespace clmb
