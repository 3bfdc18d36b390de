#ifndef CLMB_FASTA_HPP
#define CLMB_FASTA_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace clmb {

struct ContigRecord {
    std::string contig_id;
    std::string sample_id;
    std::string sequence; // uppercase, over {A,C,G,T,N}
    std::size_t length() const { return sequence.size(); }
};

/* Headers are `sampleid<sep>contigid`. A header without the separator gets
   default_sample; if that is empty too, the record is rejected. */
std::vector<ContigRecord> parse_fasta(std::istream& in, char sep = '|',
                                      const std::string& default_sample = "");
std::vector<ContigRecord> parse_fasta_file(const std::string& path, char sep = '|',
                                           const std::string& default_sample = "");

void write_fasta(std::ostream& out, const std::vector<ContigRecord>& records, char sep = '|');
void write_fasta_file(const std::string& path, const std::vector<ContigRecord>& records,
                      char sep = '|');

std::vector<ContigRecord> filter_contigs(const std::vector<ContigRecord>& records,
                                         std::size_t min_length = 2000);

} // namespace clmb

#endif
