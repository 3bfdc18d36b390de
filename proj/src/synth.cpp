#include "clmb/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "clmb/common.hpp"
#include "clmb/rng.hpp"

namespace clmb {

namespace {

constexpr char kBaseChar[4] = {'A', 'C', 'G', 'T'};

std::string fmt_int(const char* prefix, int v) {
    return std::string(prefix) + std::to_string(v);
}

/* 64 contexts x 4 next-base probabilities, rows cumulative for sampling */
struct MarkovTable {
    std::array<double, 256> cum{};
};

MarkovTable make_table(Rng& rng, double alpha) {
    MarkovTable t;
    double row[4];
    for (int ctx = 0; ctx < 64; ++ctx) {
        rng.dirichlet(alpha, row, 4);
        double acc = 0.0;
        for (int b = 0; b < 4; ++b) {
            acc += row[b];
            t.cum[static_cast<std::size_t>(ctx * 4 + b)] = acc;
        }
    }
    return t;
}

std::vector<std::uint8_t> make_genome(Rng& rng, const MarkovTable& t, int len) {
    std::vector<std::uint8_t> g(static_cast<std::size_t>(len));
    int ctx = 0;
    for (int i = 0; i < 3 && i < len; ++i) {
        g[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(rng.uniform_below(4));
        ctx = ctx * 4 + g[static_cast<std::size_t>(i)];
    }
    for (int i = 3; i < len; ++i) {
        double u = rng.uniform();
        const double* cum = &t.cum[static_cast<std::size_t>(ctx * 4)];
        int b = 0;
        while (b < 3 && u > cum[b]) ++b;
        g[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(b);
        ctx = (ctx * 4) % 64 + b;
    }
    return g;
}

std::array<double, 256> tetramer_profile(const std::vector<std::uint8_t>& g) {
    std::array<double, 256> p{};
    if (g.size() < 4) return p;
    double total = 0.0;
    int idx = g[0] * 64 + g[1] * 16 + g[2] * 4 + g[3];
    p[static_cast<std::size_t>(idx)] += 1.0;
    total += 1.0;
    for (std::size_t i = 4; i < g.size(); ++i) {
        idx = (idx * 4) % 256 + g[i];
        p[static_cast<std::size_t>(idx)] += 1.0;
        total += 1.0;
    }
    for (double& v : p) v /= total;
    return p;
}

} // namespace

void SynthConfig::validate() const {
    if (genomes < 1) throw input_error("synth: genomes must be >= 1");
    if (samples < 1) throw input_error("synth: samples must be >= 1");
    if (twin_pairs < 0) throw input_error("synth: twin_pairs must be >= 0");
    if (2 * twin_pairs > genomes)
        throw input_error("synth: twin_pairs needs 2*twin_pairs <= genomes");
    if (twin_pairs > 0 && samples < 4)
        throw input_error("synth: twin placement needs at least 4 samples");
    if (contig_min < 1 || contig_max < contig_min)
        throw input_error("synth: need 1 <= contig_min <= contig_max");
    if (genome_len < contig_min)
        throw input_error("synth: genome_len " + std::to_string(genome_len) +
                          " is shorter than contig_min " + std::to_string(contig_min));
    if (!(read_rate > 0.0)) throw input_error("synth: read_rate must be positive");
    if (!(read_sigma >= 0.0)) throw input_error("synth: read_sigma must be >= 0");
    if (!(presence_drop >= 0.0) || presence_drop >= 1.0)
        throw input_error("synth: presence_drop must be in [0, 1)");
    if (!(markov_alpha > 0.0)) throw input_error("synth: markov_alpha must be positive");
    if (!(min_divergence >= 0.0)) throw input_error("synth: min_divergence must be >= 0");
    if (max_attempts < 1) throw input_error("synth: max_attempts must be >= 1");
}

SynthDataset synthesize_dataset(const SynthConfig& cfg) {
    cfg.validate();
    const int G = cfg.genomes;
    const int S = cfg.samples;
    const int TP = cfg.twin_pairs;

    auto table_of = [&](int g) { return g < 2 * TP ? g / 2 : g; };

    /* Genomes; tables regenerated wholesale until distinct-table genomes are
       separated enough in tetramer space. Twins share a table by design and
       are excluded from the check. */
    const std::uint64_t table_base = substream(cfg.seed, "synth.table");
    const std::uint64_t genome_base = substream(cfg.seed, "synth.genome");
    std::vector<std::vector<std::uint8_t>> genomes;
    double best_min = -1.0;
    bool ok = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
        genomes.clear();
        genomes.reserve(static_cast<std::size_t>(G));
        std::vector<MarkovTable> tables(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) {
            if (g < 2 * TP && g % 2 == 1) {
                tables[static_cast<std::size_t>(g)] = tables[static_cast<std::size_t>(g - 1)];
            } else {
                Rng tr(derive(table_base, static_cast<std::uint64_t>(attempt),
                              static_cast<std::uint64_t>(table_of(g))));
                tables[static_cast<std::size_t>(g)] = make_table(tr, cfg.markov_alpha);
            }
        }
        for (int g = 0; g < G; ++g) {
            Rng gr(derive(genome_base, static_cast<std::uint64_t>(attempt),
                          static_cast<std::uint64_t>(g)));
            genomes.push_back(make_genome(gr, tables[static_cast<std::size_t>(g)], cfg.genome_len));
        }
        std::vector<std::array<double, 256>> profs;
        profs.reserve(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) profs.push_back(tetramer_profile(genomes[static_cast<std::size_t>(g)]));
        double mind = 4.0;
        for (int a = 0; a < G; ++a)
            for (int b = a + 1; b < G; ++b) {
                if (table_of(a) == table_of(b)) continue;
                double d = 0.0;
                for (int j = 0; j < 256; ++j) d += std::fabs(profs[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] - profs[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)]);
                if (d < mind) mind = d;
            }
        best_min = mind;
        ok = mind >= cfg.min_divergence;
    }
    if (!ok)
        throw input_error("synth: minimum tetramer divergence " + std::to_string(best_min) +
                          " stayed below " + std::to_string(cfg.min_divergence) + " after " +
                          std::to_string(cfg.max_attempts) + " attempts");

    /* Independent fragmentation per (genome, sample); a tail shorter than
       contig_min is left uncovered. */
    struct Span {
        int genome;
        int sample;
        int index;
        int start;
        int end;
    };
    Rng frag_rng(substream(cfg.seed, "synth.frag"));
    std::vector<Span> spans;
    const std::uint64_t len_range =
        static_cast<std::uint64_t>(cfg.contig_max - cfg.contig_min) + 1;
    for (int g = 0; g < G; ++g)
        for (int s = 0; s < S; ++s) {
            int pos = 0;
            int j = 0;
            while (cfg.genome_len - pos >= cfg.contig_min) {
                int ln = cfg.contig_min + static_cast<int>(frag_rng.uniform_below(len_range));
                if (ln > cfg.genome_len - pos) ln = cfg.genome_len - pos;
                spans.push_back({g, s, j, pos, pos + ln});
                pos += ln;
                ++j;
            }
        }

    std::vector<double> glen_total(static_cast<std::size_t>(G), 0.0);
    for (const Span& sp : spans)
        glen_total[static_cast<std::size_t>(sp.genome)] += static_cast<double>(sp.end - sp.start);

    /* Per-(sample, genome) read rates: log-normal, thinned by presence_drop
       with every genome rescued back into at least two samples, then twins
       forced onto complementary sample subsets with a floor rate. */
    std::vector<double> rate(static_cast<std::size_t>(S * G));
    Rng rate_rng(substream(cfg.seed, "synth.rate"));
    const double log_rate = std::log(cfg.read_rate);
    for (int s = 0; s < S; ++s)
        for (int g = 0; g < G; ++g)
            rate[static_cast<std::size_t>(s * G + g)] = std::exp(log_rate + cfg.read_sigma * rate_rng.normal());
    if (cfg.presence_drop > 0.0) {
        Rng pres_rng(substream(cfg.seed, "synth.presence"));
        std::vector<char> absent(static_cast<std::size_t>(S * G), 0);
        for (int s = 0; s < S; ++s)
            for (int g = 0; g < G; ++g)
                absent[static_cast<std::size_t>(s * G + g)] = pres_rng.uniform() < cfg.presence_drop ? 1 : 0;
        const int max_absent = S > 2 ? S - 2 : 0;
        for (int g = 0; g < G; ++g) {
            auto count_absent = [&] {
                int c = 0;
                for (int s = 0; s < S; ++s) c += absent[static_cast<std::size_t>(s * G + g)];
                return c;
            };
            while (count_absent() > max_absent) {
                int s = static_cast<int>(pres_rng.uniform_below(static_cast<std::uint64_t>(S)));
                absent[static_cast<std::size_t>(s * G + g)] = 0;
            }
        }
        for (int s = 0; s < S; ++s)
            for (int g = 0; g < G; ++g)
                if (absent[static_cast<std::size_t>(s * G + g)]) rate[static_cast<std::size_t>(s * G + g)] = 0.0;
    }
    if (TP > 0) {
        Rng twin_rng(substream(cfg.seed, "synth.twin"));
        const double floor_rate = 0.2 * cfg.read_rate;
        for (int p = 0; p < TP; ++p) {
            int a = 2 * p, b = 2 * p + 1;
            std::size_t ka = 2 + static_cast<std::size_t>(twin_rng.uniform_below(2));
            std::vector<std::size_t> sa = twin_rng.choose(static_cast<std::size_t>(S), ka);
            std::vector<char> in_a(static_cast<std::size_t>(S), 0);
            for (std::size_t s : sa) in_a[s] = 1;
            for (int s = 0; s < S; ++s) {
                double& ra = rate[static_cast<std::size_t>(s * G + a)];
                double& rb = rate[static_cast<std::size_t>(s * G + b)];
                if (in_a[static_cast<std::size_t>(s)]) {
                    ra = std::max(ra, floor_rate);
                    rb = 0.0;
                } else {
                    ra = 0.0;
                    rb = std::max(rb, floor_rate);
                }
            }
        }
    }

    SynthDataset ds;
    ds.contigs.reserve(spans.size());
    ds.reference.entries.reserve(spans.size());
    std::vector<std::string> contig_names(spans.size());
    for (std::size_t ci = 0; ci < spans.size(); ++ci) {
        const Span& sp = spans[ci];
        std::string cid = "g" + std::to_string(sp.genome) + "s" + std::to_string(sp.sample) +
                          "c" + std::to_string(sp.index);
        contig_names[ci] = cid;
        ContigRecord rec;
        rec.contig_id = cid;
        rec.sample_id = fmt_int("s", sp.sample);
        rec.sequence.resize(static_cast<std::size_t>(sp.end - sp.start));
        const std::vector<std::uint8_t>& gen = genomes[static_cast<std::size_t>(sp.genome)];
        for (int i = sp.start; i < sp.end; ++i)
            rec.sequence[static_cast<std::size_t>(i - sp.start)] = kBaseChar[gen[static_cast<std::size_t>(i)]];
        ds.contigs.push_back(std::move(rec));
        RefEntry re;
        re.contig_id = std::move(cid);
        re.genome_id = fmt_int("g", sp.genome);
        re.start = sp.start;
        re.end = sp.end;
        ds.reference.entries.push_back(std::move(re));
    }
    for (int g = 0; g < G; ++g) {
        std::int64_t maxe = 0;
        for (const Span& sp : spans)
            if (sp.genome == g && sp.end > maxe) maxe = sp.end;
        ds.reference.genome_lengths[fmt_int("g", g)] = maxe;
    }
    for (int g = 0; g < G; ++g) {
        int sp = g < 2 * TP ? g / 2 : g - TP;
        TaxonLabels t;
        t.strain = fmt_int("strain", g);
        t.species = fmt_int("species", sp);
        t.genus = fmt_int("genus", sp / 2);
        ds.reference.taxonomy[fmt_int("g", g)] = t;
    }

    /* One mapping record per read; counts are Poisson with the contig's
       length share of its genome's pooled assembled length. */
    Rng read_rng(substream(cfg.seed, "synth.reads"));
    std::vector<std::string> sample_names(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) sample_names[static_cast<std::size_t>(s)] = fmt_int("s", s);
    for (std::size_t ci = 0; ci < spans.size(); ++ci) {
        const Span& sp = spans[ci];
        double len = static_cast<double>(sp.end - sp.start);
        for (int s = 0; s < S; ++s) {
            double lam = rate[static_cast<std::size_t>(s * G + sp.genome)] * len /
                         glen_total[static_cast<std::size_t>(sp.genome)];
            long c = read_rng.poisson(lam);
            for (long i = 0; i < c; ++i) {
                MappingRecord mr;
                mr.read_id = "r" + std::to_string(s) + "_" + contig_names[ci] + "_" + std::to_string(i);
                mr.sample_id = sample_names[static_cast<std::size_t>(s)];
                mr.contig_ids.push_back(contig_names[ci]);
                ds.mappings.push_back(std::move(mr));
            }
        }
    }

    log_info("synth: " + std::to_string(G) + " genomes, " + std::to_string(S) + " samples, " +
             std::to_string(ds.contigs.size()) + " contigs, " +
             std::to_string(ds.mappings.size()) + " reads, min divergence " +
             std::to_string(best_min));
    return ds;
}

void write_dataset(const std::string& dir, const SynthDataset& ds) {
    std::filesystem::create_directories(dir);
    write_fasta_file(dir + "/contigs.fna", ds.contigs);
    {
        std::ofstream out(dir + "/mappings.tsv", std::ios::binary);
        if (!out) throw input_error("synth: cannot write " + dir + "/mappings.tsv");
        write_mapping(out, ds.mappings);
    }
    {
        std::ofstream out(dir + "/reference.tsv", std::ios::binary);
        if (!out) throw input_error("synth: cannot write " + dir + "/reference.tsv");
        write_reference(out, ds.reference);
    }
    {
        std::ofstream out(dir + "/taxonomy.tsv", std::ios::binary);
        if (!out) throw input_error("synth: cannot write " + dir + "/taxonomy.tsv");
        write_taxonomy(out, ds.reference);
    }
}

} // namespace clmb
