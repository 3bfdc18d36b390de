#include "clmb/fasta.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "clmb/common.hpp"

namespace clmb {

static bool valid_base(char c) {
    return c == 'A' || c == 'C' || c == 'G' || c == 'T' || c == 'N';
}

std::vector<ContigRecord> parse_fasta(std::istream& in, char sep,
                                      const std::string& default_sample) {
    std::vector<ContigRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    long line_no = 0;
    bool have_record = false;
    ContigRecord cur;
    long header_line = 0;

    auto flush = [&]() {
        if (!have_record) return;
        if (cur.sequence.empty())
            throw input_error("empty sequence for contig '" + cur.contig_id +
                              "' (header at line " + std::to_string(header_line) + ")");
        if (!seen.insert(cur.contig_id).second)
            throw input_error("duplicate contig id '" + cur.contig_id + "'");
        records.push_back(std::move(cur));
        cur = ContigRecord{};
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            have_record = true;
            header_line = line_no;
            std::string header = line.substr(1);
            std::size_t pos = header.find(sep);
            if (pos == std::string::npos) {
                if (default_sample.empty())
                    throw input_error("header without sample separator at line " +
                                      std::to_string(line_no) + ": " + line);
                cur.sample_id = default_sample;
                cur.contig_id = header;
            } else {
                cur.sample_id = header.substr(0, pos);
                cur.contig_id = header.substr(pos + 1);
            }
            if (cur.contig_id.empty())
                throw input_error("empty contig id at line " + std::to_string(line_no));
        } else {
            if (!have_record)
                throw input_error("sequence data before any header at line " +
                                  std::to_string(line_no));
            for (char c : line) {
                char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                if (!valid_base(u))
                    throw input_error("invalid character '" + std::string(1, c) +
                                      "' at line " + std::to_string(line_no));
                cur.sequence.push_back(u);
            }
        }
    }
    flush();
    return records;
}

std::vector<ContigRecord> parse_fasta_file(const std::string& path, char sep,
                                           const std::string& default_sample) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open FASTA file: " + path);
    return parse_fasta(in, sep, default_sample);
}

void write_fasta(std::ostream& out, const std::vector<ContigRecord>& records, char sep) {
    for (const auto& r : records)
        out << '>' << r.sample_id << sep << r.contig_id << '\n' << r.sequence << '\n';
}

void write_fasta_file(const std::string& path, const std::vector<ContigRecord>& records,
                      char sep) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write FASTA file: " + path);
    write_fasta(out, records, sep);
}

std::vector<ContigRecord> filter_contigs(const std::vector<ContigRecord>& records,
                                         std::size_t min_length) {
    std::vector<ContigRecord> out;
    out.reserve(records.size());
    for (const auto& r : records)
        if (r.length() >= min_length) out.push_back(r);
    return out;
}

} // namespace clmb
