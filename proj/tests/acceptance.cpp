#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "clmb/augment.hpp"
#include "clmb/bench.hpp"
#include "clmb/cluster.hpp"
#include "clmb/commands.hpp"
#include "clmb/common.hpp"
#include "clmb/features.hpp"
#include "clmb/kmer_kernel.hpp"
#include "clmb/loss.hpp"
#include "clmb/nn.hpp"
#include "clmb/rng.hpp"
#include "clmb/synth.hpp"
#include "clmb/train.hpp"
#include "util.hpp"

namespace {

int g_failures = 0;

template <class F>
void criterion(int idx, const char* name, double budget_s, F body) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string note;
    try {
        ok = body(note);
    } catch (const std::exception& e) {
        ok = false;
        note = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && budget_s > 0.0 && secs > budget_s) {
        ok = false;
        note += (note.empty() ? "" : "; ") + std::string("budget ") +
                std::to_string(budget_s) + " s exceeded";
    }
    std::printf("c%d %s: %s (%.2f s)%s%s\n", idx, name, ok ? "PASS" : "FAIL", secs,
                note.empty() ? "" : " ", note.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string random_seq(clmb::Rng& rng, std::size_t len) {
    static const char bases[] = "ACGT";
    std::string s(len, 'A');
    for (auto& c : s) c = bases[rng.uniform_below(4)];
    return s;
}

std::string revcomp(const std::string& s) {
    std::string r(s.rbegin(), s.rend());
    for (auto& c : r) {
        switch (c) {
            case 'A': c = 'T'; break;
            case 'C': c = 'G'; break;
            case 'G': c = 'C'; break;
            default: c = 'A'; break;
        }
    }
    return r;
}

bool kernel_criterion(std::string& note) {
    clmb::KmerKernel kernel = clmb::build_kernel(4);
    if (kernel.projected_dim != 103) {
        note = "projected_dim " + std::to_string(kernel.projected_dim);
        return false;
    }
    double max_dev = 0.0;
    for (int a = 0; a < 103; ++a)
        for (int b = 0; b < 103; ++b) {
            double dot = 0.0;
            for (int r = 0; r < 256; ++r)
                dot += kernel.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(a)) *
                       kernel.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(b));
            max_dev = std::max(max_dev, std::fabs(dot - (a == b ? 1.0 : 0.0)));
        }
    if (max_dev >= 1e-9) {
        note = "orthonormality deviation " + std::to_string(max_dev);
        return false;
    }
    clmb::Rng rng(424242);
    double max_rc = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::string seq = random_seq(rng, 300 + rng.uniform_below(500));
        std::vector<double> fwd = clmb::compute_composition(seq, kernel);
        std::vector<double> rev = clmb::compute_composition(revcomp(seq), kernel);
        for (std::size_t j = 0; j < fwd.size(); ++j)
            max_rc = std::max(max_rc, std::fabs(fwd[j] - rev[j]));
    }
    if (max_rc >= 1e-9) {
        note = "rc deviation " + std::to_string(max_rc);
        return false;
    }
    return true;
}

bool gradient_criterion(std::string& note) {
    const std::vector<std::vector<int>> hiddens{{}, {4}, {6, 4}, {5}};
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        testutil::GradCase gc;
        gc.spec.s = 1 + i % 4;
        gc.spec.tnf_dim = 3 + (2 * i) % 6;
        gc.spec.encoder_hidden = hiddens[static_cast<std::size_t>(i) % hiddens.size()];
        gc.spec.latent_dim = 2 + i % 3;
        gc.spec.dropout_p = (i % 2) ? 0.2 : 0.0;
        gc.rows = 6 + 2 * (i % 2);
        gc.seed = 1000 + static_cast<std::uint64_t>(i);
        gc.contrast_on_split = i % 3 == 0;
        testutil::GradCheckOutcome out = testutil::gradcheck(gc);
        worst = std::max(worst, out.max_rel);
        if (out.checked == 0 || out.max_rel >= 1e-4) {
            note = "spec " + std::to_string(i) + " max rel " + std::to_string(out.max_rel);
            return false;
        }
    }
    note = "worst rel " + clmb::fmt_g(worst, 3) + " over 20 specs";
    return true;
}

bool loss_criterion(std::string& note) {
    clmb::Rng rng(99);
    std::size_t n = 100, d = 100;
    clmb::Mat<double> mu(n, d), sigma(n, d);
    std::vector<double> mu_flat, var_flat;
    for (std::size_t i = 0; i < n * d; ++i) {
        mu.v[i] = rng.normal();
        sigma.v[i] = 0.05 + 3.0 * rng.uniform();
        mu_flat.push_back(mu.v[i]);
        var_flat.push_back(sigma.v[i] * sigma.v[i]);
    }
    double got = clmb::kl_loss<double>(mu, sigma, nullptr, nullptr);
    double want = testutil::kl_closed_form(mu_flat, var_flat);
    if (testutil::rel_err(got, want) >= 1e-10) {
        note = "kl rel " + std::to_string(testutil::rel_err(got, want));
        return false;
    }

    clmb::Mat<double> two(2, 5);
    for (auto& x : two.v) x = rng.normal();
    if (clmb::contrastive_loss<double>(two, 0.1, nullptr) != 0.0) {
        note = "2N=2 identity broken";
        return false;
    }

    for (std::size_t rows : {4u, 8u, 16u, 32u, 64u}) {
        clmb::Mat<double> X(rows, 7);
        for (auto& x : X.v) x = rng.normal();
        double lhs = clmb::contrastive_loss<double>(X, 0.1, nullptr);
        double rhs = testutil::ntxent_oracle(X, 0.1);
        if (testutil::rel_err(lhs, rhs) >= 1e-9) {
            note = "ntxent rel " + std::to_string(testutil::rel_err(lhs, rhs)) + " at 2N=" +
                   std::to_string(rows);
            return false;
        }
    }

    clmb::Mat<double> same(8, 5);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 5; ++j) same(i, j) = 0.3 * static_cast<double>(j) - 1.0;
    double collapsed = clmb::contrastive_loss<double>(same, 0.1, nullptr);
    if (std::fabs(collapsed - std::log(7.0)) >= 1e-9) {
        note = "collapse value " + std::to_string(collapsed);
        return false;
    }
    return true;
}

bool calibration_criterion(std::string& note) {
    clmb::LossWeights w = clmb::LossWeights::make(4, 16);
    const double L1 = 3.7, L2 = 0.9, L3 = 5.1;
    clmb::LossBreakdown b = clmb::combine(L1, L2, L3, w, true);
    if (!w.calibrated) {
        note = "weights stayed uncalibrated";
        return false;
    }
    double kl_side = w.w2 * L2 * 2e5 * 16;
    double ct_side = w.w3 * L3;
    if (testutil::rel_err(kl_side, L1) >= 1e-12) {
        note = "w2 identity rel " + std::to_string(testutil::rel_err(kl_side, L1));
        return false;
    }
    if (testutil::rel_err(ct_side, 1.35 * L1) >= 1e-12) {
        note = "w3 identity rel " + std::to_string(testutil::rel_err(ct_side, 1.35 * L1));
        return false;
    }
    if (testutil::rel_err(b.total, L1 + w.w2 * L2 + w.w3 * L3) >= 1e-14) {
        note = "total mismatch";
        return false;
    }
    return true;
}

bool augment_criterion(std::string& note) {
    const std::size_t d = 1000000;
    std::vector<double> in(d, 1.0), out(d, 0.0);
    {
        clmb::Rng rng(2024);
        clmb::random_mask(in.data(), out.data(), d, 0.01, rng);
        double zeros = static_cast<double>(std::count(out.begin(), out.end(), 0.0));
        double expect = 0.01 * static_cast<double>(d);
        double sd = std::sqrt(static_cast<double>(d) * 0.01 * 0.99);
        if (std::fabs(zeros - expect) > 2.5758 * sd) {
            note = "mask zeroed " + std::to_string(static_cast<long>(zeros)) + " of " +
                   std::to_string(d);
            return false;
        }
    }
    {
        clmb::FeatureStats stats;
        stats.mean.assign(d, 0.0);
        stats.var.assign(d, 4.0);
        clmb::AugmentConfig cfg;
        std::vector<double> zero_in(d, 0.0);
        clmb::Rng rng(2025);
        clmb::gaussian_noise(zero_in.data(), out.data(), d, stats, cfg, rng);
        double mean = 0.0;
        for (double x : out) mean += x;
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (double x : out) var += (x - mean) * (x - mean);
        var /= static_cast<double>(d - 1);
        double expect = 0.15 * 0.15 * 4.0;
        if (std::fabs(var - expect) > 0.02 * expect) {
            note = "gaussian variance " + std::to_string(var) + " vs " + std::to_string(expect);
            return false;
        }
    }
    {
        const std::size_t dim = 103;
        const double fraction = 0.05;
        const std::size_t pairs = 5;
        for (int r = 0; r < 128; ++r) {
            std::vector<double> row(dim, 0.0), shifted(dim, 0.0);
            row[static_cast<std::size_t>(7 * r) % dim] = 1.0;
            std::uint64_t seed = clmb::derive(3000, static_cast<std::uint64_t>(r));
            clmb::Rng replay(seed);
            std::vector<std::size_t> idx = replay.choose(dim, 2 * pairs);
            clmb::Rng rng(seed);
            clmb::random_shift(row.data(), shifted.data(), dim, fraction, rng);
            for (std::size_t t = 0; t < pairs; ++t) {
                std::size_t i = idx[2 * t], j = idx[2 * t + 1];
                if (shifted[i] + shifted[j] != row[i] + row[j]) {
                    note = "pair sum drifted in row " + std::to_string(r);
                    return false;
                }
            }
            double total = 0.0;
            for (double x : shifted) total += x;
            if (total != 1.0) {
                note = "row sum drifted in row " + std::to_string(r);
                return false;
            }
        }
        std::vector<double> ones(dim, 1.0), moved(dim, 0.0);
        clmb::Rng rng(4000);
        clmb::random_shift(ones.data(), moved.data(), dim, fraction, rng);
        if (moved == ones) {
            note = "shift left a dense row untouched";
            return false;
        }
    }
    return true;
}

bool clustering_criterion(std::string& note) {
    std::vector<int> truth;
    clmb::Mat<float> X = testutil::planted_blobs(20, 100, 16, 0.05, 2.2, 515, &truth);
    clmb::Clustering med = clmb::iterative_medoid(X, clmb::MedoidParams{});
    if (med.cluster_count != 20 || !testutil::same_partition(med.assignment, truth)) {
        note = "medoid clusters " + std::to_string(med.cluster_count);
        return false;
    }
    clmb::KmeansParams kp;
    kp.k = 20;
    kp.seed = 99;
    clmb::Clustering km = clmb::minibatch_kmeans(X, kp);
    if (km.cluster_count != 20 || !testutil::same_partition(km.assignment, truth)) {
        note = "kmeans clusters " + std::to_string(km.cluster_count);
        return false;
    }

    auto rows = [](std::vector<std::vector<float>> r) {
        clmb::Mat<float> m(r.size(), r[0].size());
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < r[i].size(); ++j) m(i, j) = r[i][j];
        return m;
    };
    clmb::DbscanParams dp;
    clmb::Clustering close = clmb::dbscan(rows({{0.0f, 0.0f}, {0.1f, 0.0f}}), dp);
    clmb::Clustering apart = clmb::dbscan(rows({{0.0f, 0.0f}, {1.0f, 0.0f}}), dp);
    clmb::Clustering chain = clmb::dbscan(rows({{0.0f, 0.0f}, {0.3f, 0.0f}, {0.6f, 0.0f}}), dp);
    if (close.cluster_count != 1 || apart.cluster_count != 2 || chain.cluster_count != 1) {
        note = "dbscan hand cases " + std::to_string(close.cluster_count) + "/" +
               std::to_string(apart.cluster_count) + "/" + std::to_string(chain.cluster_count);
        return false;
    }
    return true;
}

bool bench_criterion(std::string& note) {
    for (int trial = 0; trial < 200; ++trial) {
        clmb::Rng rng(7000 + static_cast<std::uint64_t>(trial));
        clmb::ReferenceMap ref;
        std::vector<std::string> contigs;
        for (int g = 0; g < 3; ++g) {
            std::string genome = "g" + std::to_string(g);
            for (int c = 0; c < 4; ++c) {
                std::string contig = genome + "_c" + std::to_string(c);
                std::int64_t start = static_cast<std::int64_t>(rng.uniform_below(1200));
                std::int64_t len = 20 + static_cast<std::int64_t>(rng.uniform_below(280));
                ref.entries.push_back({contig, genome, start, start + len});
                auto& gl = ref.genome_lengths[genome];
                gl = std::max(gl, start + len);
                if (rng.uniform() < 0.25) {
                    std::string other = "g" + std::to_string((g + 1) % 3);
                    std::int64_t s2 = static_cast<std::int64_t>(rng.uniform_below(1200));
                    ref.entries.push_back({contig, other, s2, s2 + 50});
                    auto& ol = ref.genome_lengths[other];
                    ol = std::max(ol, s2 + 50);
                }
                contigs.push_back(contig);
            }
            ref.taxonomy[genome] = {"st" + std::to_string(g), "sp" + std::to_string(g / 2),
                                    "ge0"};
        }
        std::unordered_map<std::string, std::int64_t> lengths{{"u0", 90}, {"u1", 210}};

        clmb::NamedBins bins;
        int nbins = 2 + static_cast<int>(rng.uniform_below(3));
        for (int b = 0; b < nbins; ++b) bins.push_back({"bin" + std::to_string(b), {}});
        for (const auto& contig : contigs)
            if (rng.uniform() < 0.85)
                bins[rng.uniform_below(static_cast<std::uint64_t>(nbins))].second.push_back(contig);
        bins[0].second.push_back("u0");
        bins[static_cast<std::size_t>(nbins - 1)].second.push_back("u1");
        for (auto it = bins.begin(); it != bins.end();)
            it = it->second.empty() ? bins.erase(it) : it + 1;

        auto got = clmb::evaluate_bins(bins, ref, &lengths);
        auto want = testutil::oracle_evaluate(bins, ref, &lengths);
        if (got.size() != want.size()) {
            note = "trial " + std::to_string(trial) + " bin count";
            return false;
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].genome_id != want[i].genome_id || got[i].tp != want[i].tp ||
                got[i].fp != want[i].fp || got[i].fn != want[i].fn ||
                got[i].precision != want[i].precision || got[i].recall != want[i].recall) {
                note = "trial " + std::to_string(trial) + " bin " + got[i].bin_id;
                return false;
            }
        }
        std::vector<double> grid{0.3, 0.6, 0.9};
        clmb::EvalReport lhs = clmb::count_recovered(got, ref, 0.8, grid);
        clmb::EvalReport rhs = testutil::oracle_count(want, ref, 0.8, grid);
        for (int rank = 0; rank < 3; ++rank)
            if (lhs.counts[static_cast<std::size_t>(rank)] !=
                rhs.counts[static_cast<std::size_t>(rank)]) {
                note = "trial " + std::to_string(trial) + " counts rank " + std::to_string(rank);
                return false;
            }
        if (lhs.nc_count != rhs.nc_count || lhs.genome_best != rhs.genome_best) {
            note = "trial " + std::to_string(trial) + " nc/genome_best";
            return false;
        }
    }
    return true;
}

int nc_of(const clmb::Mat<float>& points, const clmb::FeatureMatrix& fm,
          const clmb::ReferenceMap& ref) {
    clmb::Clustering clustering = clmb::iterative_medoid(points, clmb::MedoidParams{});
    clmb::BinSet bins = clmb::multi_split(clustering, fm.sample_of_contig, fm.sample_ids);
    clmb::NamedBins named = clmb::to_named_bins(bins, fm.contig_ids);
    auto metrics = clmb::evaluate_bins(named, ref, nullptr);
    return clmb::count_recovered(metrics, ref).nc_count;
}

bool end_to_end_criterion(std::string& note) {
    clmb::set_thread_count(0);
    clmb::SynthConfig scfg;
    scfg.seed = 1;
    clmb::SynthDataset ds = clmb::synthesize_dataset(scfg);

    std::vector<std::string> sample_ids;
    for (int s = 0; s < scfg.samples; ++s) sample_ids.push_back("s" + std::to_string(s));
    clmb::KmerKernel kernel = clmb::build_kernel(4);
    clmb::FeatureMatrix fm = clmb::featurize(ds.contigs, ds.mappings, sample_ids, kernel, 2000);

    clmb::NetworkSpec spec;
    spec.s = fm.s();
    spec.tnf_dim = fm.tnf_dim();
    spec.encoder_hidden = {128, 128};
    spec.latent_dim = 16;
    clmb::TrainConfig tcfg;
    tcfg.batch_size = 256;
    tcfg.epochs = 200;
    tcfg.seed = 1;
    clmb::TrainResult result = clmb::train_vae(fm, spec, tcfg);

    clmb::Mat<float> latent = clmb::encode(result.state.params, fm.concat());
    int nc_encoded = nc_of(latent, fm, ds.reference);
    int nc_raw = nc_of(fm.concat(), fm, ds.reference);

    note = std::to_string(fm.n()) + " contigs, nc encoded " + std::to_string(nc_encoded) +
           ", nc raw " + std::to_string(nc_raw);
    if (nc_encoded < 14) return false;
    if (nc_encoded < nc_raw) return false;
    return true;
}

bool determinism_criterion(std::string& note) {
    clmb::CommonArgs common;
    common.seed = 77;
    common.threads = 1;
    common.opts.synth.genomes = 5;
    common.opts.synth.twin_pairs = 0;
    common.opts.synth.samples = 3;
    common.opts.synth.genome_len = 30000;
    common.opts.synth.contig_min = 2000;
    common.opts.synth.contig_max = 4000;
    common.opts.synth.read_rate = 300.0;
    common.opts.spec.encoder_hidden = {32};
    common.opts.spec.latent_dim = 8;
    common.opts.train.epochs = 20;
    common.opts.train.batch_size = 64;

    std::string base = testutil::make_temp_dir("acc_det");
    for (const char* run : {"a", "b"}) {
        clmb::PipelineArgs args;
        args.out_dir = base + "/" + run;
        clmb::cmd_pipeline(args, common);
    }
    for (const char* name :
         {"/features.clmb", "/model.ckpt", "/clusters.tsv", "/report.tsv", "/bin_metrics.tsv"}) {
        std::string a = testutil::read_file_bytes(base + "/a" + name);
        std::string b = testutil::read_file_bytes(base + "/b" + name);
        if (a.empty() || a != b) {
            note = std::string(name + 1) + " differs between runs";
            return false;
        }
    }
    return true;
}

} // namespace

int main() {
    clmb::set_log_level("warn");
    criterion(1, "kernel orthonormality and strand symmetry", 5.0, kernel_criterion);
    criterion(2, "gradients match central finite differences", 120.0, gradient_criterion);
    criterion(3, "loss terms match closed forms and brute force", 0.0, loss_criterion);
    criterion(4, "loss weight calibration identities", 0.0, calibration_criterion);
    criterion(5, "augmentation statistics", 0.0, augment_criterion);
    criterion(6, "planted cluster recovery", 0.0, clustering_criterion);
    criterion(7, "benchmark equals the per-base oracle", 0.0, bench_criterion);
    criterion(8, "synthetic end to end binning", 600.0, end_to_end_criterion);
    criterion(9, "byte-identical repeated pipelines", 0.0, determinism_criterion);
    if (g_failures == 0) std::printf("all 9 criteria passed\n");
    else std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
