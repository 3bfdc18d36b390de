#include "clmb/features.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "clmb/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature and checkpoint files assume a little-endian host");

namespace clmb {

Mat<float> FeatureMatrix::concat() const {
    Mat<float> out(n(), abundance.cols + tnf.cols);
    for (std::size_t i = 0; i < n(); ++i) {
        float* dst = out.row(i);
        const float* a = abundance.row(i);
        for (std::size_t j = 0; j < abundance.cols; ++j) dst[j] = a[j];
        const float* t = tnf.row(i);
        for (std::size_t j = 0; j < tnf.cols; ++j) dst[abundance.cols + j] = t[j];
    }
    return out;
}

Mat<double> compute_rpkm(const std::vector<MappingRecord>& mappings,
                         const std::vector<ContigRecord>& contigs,
                         const std::vector<std::string>& sample_ids,
                         bool strict_contigs) {
    std::unordered_map<std::string, std::size_t> contig_index;
    for (std::size_t i = 0; i < contigs.size(); ++i)
        contig_index.emplace(contigs[i].contig_id, i);
    std::unordered_map<std::string, std::size_t> sample_index;
    for (std::size_t j = 0; j < sample_ids.size(); ++j)
        sample_index.emplace(sample_ids[j], j);

    std::size_t n = contigs.size();
    std::size_t s = sample_ids.size();
    Mat<double> weighted(n, s);
    std::vector<double> total_reads(s, 0.0);

    for (const auto& rec : mappings) {
        auto sit = sample_index.find(rec.sample_id);
        if (sit == sample_index.end())
            throw input_error("mapping references unknown sample '" + rec.sample_id + "'");
        std::size_t sj = sit->second;
        total_reads[sj] += 1.0;
        double w = 1.0 / static_cast<double>(rec.contig_ids.size());
        for (const auto& cid : rec.contig_ids) {
            auto cit = contig_index.find(cid);
            if (cit == contig_index.end()) {
                if (strict_contigs)
                    throw input_error("mapping references unknown contig '" + cid + "'");
                continue;
            }
            weighted(cit->second, sj) += w;
        }
    }

    Mat<double> rpkm(n, s);
    for (std::size_t j = 0; j < s; ++j) {
        if (total_reads[j] == 0.0) {
            log_warn("sample '" + sample_ids[j] + "' has no mapped reads; RPKM column is zero");
            continue;
        }
        double per_million = total_reads[j] / 1e6;
        for (std::size_t i = 0; i < n; ++i) {
            double kb = static_cast<double>(contigs[i].length()) / 1000.0;
            rpkm(i, j) = weighted(i, j) / kb / per_million;
        }
    }
    return rpkm;
}

FeatureMatrix normalize_features(const Mat<double>& tnf_raw,
                                 const Mat<double>& rpkm,
                                 const std::vector<ContigRecord>& contigs,
                                 const std::vector<std::string>& sample_ids) {
    if (tnf_raw.rows != rpkm.rows || tnf_raw.rows != contigs.size())
        throw input_error("feature matrices are not row-aligned on contigs");
    std::size_t n = tnf_raw.rows;
    std::size_t s = rpkm.cols;
    std::size_t d = tnf_raw.cols;

    FeatureMatrix fm;
    fm.abundance = Mat<float>(n, s);
    fm.tnf = Mat<float>(n, d);
    fm.sample_ids = sample_ids;
    fm.contig_ids.reserve(n);
    fm.sample_of_contig.reserve(n);
    std::unordered_map<std::string, int> sample_index;
    for (std::size_t j = 0; j < s; ++j) sample_index.emplace(sample_ids[j], static_cast<int>(j));
    for (const auto& c : contigs) {
        auto it = sample_index.find(c.sample_id);
        if (it == sample_index.end())
            throw input_error("contig '" + c.contig_id + "' has unknown sample '" + c.sample_id + "'");
        fm.contig_ids.push_back(c.contig_id);
        fm.sample_of_contig.push_back(it->second);
    }

    // z-scale each composition column; constant columns become zero
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += tnf_raw(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double t = tnf_raw(i, j) - mean;
            var += t * t;
        }
        var /= static_cast<double>(n);
        double sd = std::sqrt(var);
        if (sd == 0.0) {
            for (std::size_t i = 0; i < n; ++i) fm.tnf(i, j) = 0.0f;
        } else {
            for (std::size_t i = 0; i < n; ++i)
                fm.tnf(i, j) = static_cast<float>((tnf_raw(i, j) - mean) / sd);
        }
    }

    // abundance rows become distributions over samples
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < s; ++j) sum += rpkm(i, j);
        if (sum <= 0.0) {
            float u = 1.0f / static_cast<float>(s);
            for (std::size_t j = 0; j < s; ++j) fm.abundance(i, j) = u;
        } else {
            for (std::size_t j = 0; j < s; ++j)
                fm.abundance(i, j) = static_cast<float>(rpkm(i, j) / sum);
        }
    }
    return fm;
}

FeatureMatrix featurize(const std::vector<ContigRecord>& contigs,
                        const std::vector<MappingRecord>& mappings,
                        const std::vector<std::string>& sample_ids,
                        const KmerKernel& kernel,
                        std::size_t min_length) {
    std::vector<ContigRecord> kept = filter_contigs(contigs, min_length);
    if (kept.empty()) throw input_error("no contigs pass the length filter");

    // reject unfeaturizable contigs up front so the error can name them
    for (const auto& c : kept) {
        int run = 0;
        bool ok = false;
        for (char b : c.sequence) {
            if (b == 'N') run = 0;
            else if (++run >= kernel.k) { ok = true; break; }
        }
        if (!ok)
            throw input_error("contig '" + c.contig_id + "' has no window of " +
                              std::to_string(kernel.k) + " definite bases");
    }

    std::vector<std::string> seqs;
    seqs.reserve(kept.size());
    for (const auto& c : kept) seqs.push_back(c.sequence);
    Mat<double> tnf_raw = composition_batch(seqs, kernel);

    // reads onto dropped contigs still count toward the per-sample totals
    Mat<double> rpkm = compute_rpkm(mappings, kept, sample_ids, false);
    return normalize_features(tnf_raw, rpkm, kept, sample_ids);
}

static void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

static std::uint32_t read_u32(std::istream& in, const std::string& path) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 4))
        throw input_error("truncated feature file: " + path);
    return v;
}

static void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

static std::string read_string(std::istream& in, const std::string& path) {
    std::uint32_t len = read_u32(in, path);
    if (len > (1u << 20)) throw input_error("corrupt string length in " + path);
    std::string s(len, '\0');
    if (len && !in.read(s.data(), len))
        throw input_error("truncated feature file: " + path);
    return s;
}

void save_features(const std::string& path, const FeatureMatrix& fm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write feature file: " + path);
    out << "CLMBFEAT v1 " << fm.n() << ' ' << fm.s() << ' ' << fm.tnf_dim() << '\n';
    for (std::size_t i = 0; i < fm.n(); ++i) {
        out.write(reinterpret_cast<const char*>(fm.abundance.row(i)),
                  static_cast<std::streamsize>(fm.abundance.cols * sizeof(float)));
        out.write(reinterpret_cast<const char*>(fm.tnf.row(i)),
                  static_cast<std::streamsize>(fm.tnf.cols * sizeof(float)));
    }
    for (const auto& id : fm.contig_ids) write_string(out, id);
    write_u32(out, static_cast<std::uint32_t>(fm.sample_ids.size()));
    for (const auto& id : fm.sample_ids) write_string(out, id);
    for (int si : fm.sample_of_contig) write_u32(out, static_cast<std::uint32_t>(si));
    if (!out) throw input_error("write failure on feature file: " + path);
}

FeatureMatrix load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open feature file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw input_error("empty feature file: " + path);
    std::istringstream hs(header);
    std::string magic, version;
    std::size_t n = 0;
    int s = 0, d = 0;
    hs >> magic >> version >> n >> s >> d;
    if (magic != "CLMBFEAT" || version != "v1" || !hs || s < 1 || d < 1)
        throw input_error("not a feature file: " + path);

    FeatureMatrix fm;
    fm.abundance = Mat<float>(n, static_cast<std::size_t>(s));
    fm.tnf = Mat<float>(n, static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) {
        if (!in.read(reinterpret_cast<char*>(fm.abundance.row(i)),
                     static_cast<std::streamsize>(fm.abundance.cols * sizeof(float))) ||
            !in.read(reinterpret_cast<char*>(fm.tnf.row(i)),
                     static_cast<std::streamsize>(fm.tnf.cols * sizeof(float))))
            throw input_error("truncated feature file: " + path);
    }
    fm.contig_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) fm.contig_ids.push_back(read_string(in, path));
    std::uint32_t ns = read_u32(in, path);
    if (ns != static_cast<std::uint32_t>(s))
        throw input_error("sample list does not match header in " + path);
    for (std::uint32_t j = 0; j < ns; ++j) fm.sample_ids.push_back(read_string(in, path));
    fm.sample_of_contig.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t si = read_u32(in, path);
        if (si >= ns) throw input_error("bad sample index in " + path);
        fm.sample_of_contig.push_back(static_cast<int>(si));
    }
    return fm;
}

void export_features_tsv(const std::string& path, const FeatureMatrix& fm) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write TSV export: " + path);
    out << "contig_id\tsample_id";
    for (int j = 0; j < fm.s(); ++j) out << "\tab_" << fm.sample_ids[j];
    for (int j = 0; j < fm.tnf_dim(); ++j) out << "\ttnf_" << j;
    out << '\n';
    for (std::size_t i = 0; i < fm.n(); ++i) {
        out << fm.contig_ids[i] << '\t' << fm.sample_ids[fm.sample_of_contig[i]];
        for (int j = 0; j < fm.s(); ++j) out << '\t' << fmt_g(fm.abundance(i, j), 9);
        for (int j = 0; j < fm.tnf_dim(); ++j) out << '\t' << fmt_g(fm.tnf(i, j), 9);
        out << '\n';
    }
}

} // namespace clmb
