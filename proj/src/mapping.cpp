#include "clmb/mapping.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "clmb/common.hpp"

namespace clmb {

static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

static std::int64_t parse_int(const std::string& s, long line_no, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw input_error(std::string("bad ") + what + " '" + s + "' at line " +
                          std::to_string(line_no));
    return v;
}

std::vector<MappingRecord> parse_mapping(std::istream& in,
                                         const std::unordered_set<std::string>& known_contigs) {
    std::vector<MappingRecord> records;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 3)
            throw input_error("expected 3 tab-separated fields at line " +
                              std::to_string(line_no));
        MappingRecord rec;
        rec.read_id = fields[0];
        rec.sample_id = fields[1];
        if (fields[2].empty())
            throw input_error("empty contig list for read '" + rec.read_id +
                              "' at line " + std::to_string(line_no));
        for (auto& id : split(fields[2], ',')) {
            if (id.empty())
                throw input_error("empty contig id in mapping at line " +
                                  std::to_string(line_no));
            if (!known_contigs.count(id))
                throw input_error("mapping references unknown contig '" + id + "'");
            rec.contig_ids.push_back(std::move(id));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<MappingRecord> parse_mapping_file(const std::string& path,
                                              const std::unordered_set<std::string>& known_contigs) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open mapping file: " + path);
    return parse_mapping(in, known_contigs);
}

void write_mapping(std::ostream& out, const std::vector<MappingRecord>& records) {
    for (const auto& r : records) {
        out << r.read_id << '\t' << r.sample_id << '\t';
        for (std::size_t i = 0; i < r.contig_ids.size(); ++i) {
            if (i) out << ',';
            out << r.contig_ids[i];
        }
        out << '\n';
    }
}

ReferenceMap parse_reference(std::istream& in) {
    ReferenceMap ref;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 4)
            throw input_error("expected 4 tab-separated fields at line " +
                              std::to_string(line_no));
        RefEntry e;
        e.contig_id = fields[0];
        e.genome_id = fields[1];
        e.start = parse_int(fields[2], line_no, "span start");
        e.end = parse_int(fields[3], line_no, "span end");
        if (e.start < 0 || e.end <= e.start)
            throw input_error("inverted or empty span for contig '" + e.contig_id +
                              "' at line " + std::to_string(line_no));
        auto it = ref.genome_lengths.find(e.genome_id);
        if (it == ref.genome_lengths.end() || it->second < e.end)
            ref.genome_lengths[e.genome_id] = e.end;
        ref.entries.push_back(std::move(e));
    }
    return ref;
}

ReferenceMap parse_reference_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open reference map: " + path);
    return parse_reference(in);
}

void write_reference(std::ostream& out, const ReferenceMap& ref) {
    for (const auto& e : ref.entries)
        out << e.contig_id << '\t' << e.genome_id << '\t' << e.start << '\t' << e.end << '\n';
}

void parse_taxonomy(std::istream& in, ReferenceMap& ref) {
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 4)
            throw input_error("expected 4 tab-separated fields at line " +
                              std::to_string(line_no));
        ref.taxonomy[fields[0]] = TaxonLabels{fields[1], fields[2], fields[3]};
    }
}

void parse_taxonomy_file(const std::string& path, ReferenceMap& ref) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open taxonomy file: " + path);
    parse_taxonomy(in, ref);
}

void write_taxonomy(std::ostream& out, const ReferenceMap& ref) {
    for (const auto& [genome, t] : ref.taxonomy)
        out << genome << '\t' << t.strain << '\t' << t.species << '\t' << t.genus << '\n';
}

} // namespace clmb
