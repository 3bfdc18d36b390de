#ifndef CLMB_MAPPING_HPP
#define CLMB_MAPPING_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace clmb {

struct MappingRecord {
    std::string read_id;
    std::string sample_id;
    std::vector<std::string> contig_ids; // n >= 1; a read counts 1/n per contig
};

/* Lines are `read_id<TAB>sample_id<TAB>contig1,contig2,...`. */
std::vector<MappingRecord> parse_mapping(std::istream& in,
                                         const std::unordered_set<std::string>& known_contigs);
std::vector<MappingRecord> parse_mapping_file(const std::string& path,
                                              const std::unordered_set<std::string>& known_contigs);
void write_mapping(std::ostream& out, const std::vector<MappingRecord>& records);

struct RefEntry {
    std::string contig_id;
    std::string genome_id;
    std::int64_t start = 0; // inclusive base offset
    std::int64_t end = 0;   // exclusive base offset
};

struct TaxonLabels {
    std::string strain;
    std::string species;
    std::string genus;
};

struct ReferenceMap {
    std::vector<RefEntry> entries;
    std::map<std::string, std::int64_t> genome_lengths; // max span end per genome
    std::map<std::string, TaxonLabels> taxonomy;
};

/* `contig_id<TAB>genome_id<TAB>start<TAB>end` */
ReferenceMap parse_reference(std::istream& in);
ReferenceMap parse_reference_file(const std::string& path);
void write_reference(std::ostream& out, const ReferenceMap& ref);

/* `genome_id<TAB>strain<TAB>species<TAB>genus` */
void parse_taxonomy(std::istream& in, ReferenceMap& ref);
void parse_taxonomy_file(const std::string& path, ReferenceMap& ref);
void write_taxonomy(std::ostream& out, const ReferenceMap& ref);

} // namespace clmb

#endif
