#include "clmb/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "clmb/common.hpp"

namespace clmb {

namespace {

using Interval = std::pair<std::int64_t, std::int64_t>;

std::int64_t union_length(std::vector<Interval>& spans) {
    if (spans.empty()) return 0;
    std::sort(spans.begin(), spans.end());
    std::int64_t total = 0;
    std::int64_t lo = spans[0].first, hi = spans[0].second;
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].first > hi) {
            total += hi - lo;
            lo = spans[i].first;
            hi = spans[i].second;
        } else {
            hi = std::max(hi, spans[i].second);
        }
    }
    total += hi - lo;
    return total;
}

} // namespace

NamedBins to_named_bins(const BinSet& bins, const std::vector<std::string>& contig_ids) {
    NamedBins out;
    out.reserve(bins.bins.size());
    for (const auto& b : bins.bins) {
        std::vector<std::string> ids;
        ids.reserve(b.members.size());
        for (std::size_t i : b.members) ids.push_back(contig_ids[i]);
        out.push_back({b.bin_id, std::move(ids)});
    }
    return out;
}

std::vector<BinGenomeMetrics> evaluate_bins(
    const NamedBins& bins, const ReferenceMap& truth,
    const std::unordered_map<std::string, std::int64_t>* contig_lengths) {
    std::unordered_map<std::string, std::vector<const RefEntry*>> by_contig;
    for (const auto& e : truth.entries) {
        if (e.end <= e.start)
            throw input_error("reference: inverted or empty span for contig '" +
                              e.contig_id + "'");
        by_contig[e.contig_id].push_back(&e);
    }

    // dataset coverage per genome: union over every binned contig's spans
    std::map<std::string, std::vector<Interval>> dataset_spans;
    for (const auto& [bin_id, members] : bins) {
        (void)bin_id;
        for (const auto& cid : members) {
            auto it = by_contig.find(cid);
            if (it == by_contig.end()) {
                if (!contig_lengths || !contig_lengths->count(cid))
                    throw input_error("binned contig '" + cid +
                                      "' is missing from the reference");
                continue;
            }
            for (const RefEntry* e : it->second)
                dataset_spans[e->genome_id].push_back({e->start, e->end});
        }
    }
    std::map<std::string, std::int64_t> dataset_cov;
    for (auto& [genome, spans] : dataset_spans) dataset_cov[genome] = union_length(spans);

    std::vector<BinGenomeMetrics> out;
    out.reserve(bins.size());
    for (const auto& [bin_id, members] : bins) {
        std::map<std::string, std::vector<Interval>> genome_spans;
        std::int64_t unknown_bases = 0;
        for (const auto& cid : members) {
            auto it = by_contig.find(cid);
            if (it == by_contig.end()) {
                unknown_bases += contig_lengths->at(cid);
                continue;
            }
            for (const RefEntry* e : it->second)
                genome_spans[e->genome_id].push_back({e->start, e->end});
        }

        std::map<std::string, std::int64_t> tp_by_genome;
        for (auto& [genome, spans] : genome_spans)
            tp_by_genome[genome] = union_length(spans);

        BinGenomeMetrics m;
        m.bin_id = bin_id;
        std::int64_t best_tp = 0;
        for (const auto& [genome, tp] : tp_by_genome) {
            if (tp > best_tp) {
                best_tp = tp;
                m.genome_id = genome;
            }
        }
        m.tp = best_tp;
        m.fp = unknown_bases;
        for (const auto& [genome, tp] : tp_by_genome)
            if (genome != m.genome_id) m.fp += tp;
        if (!m.genome_id.empty()) m.fn = dataset_cov[m.genome_id] - m.tp;
        m.precision = m.tp + m.fp > 0
                          ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                          : 0.0;
        m.recall = m.tp + m.fn > 0
                       ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn)
                       : 0.0;
        out.push_back(std::move(m));
    }
    return out;
}

EvalReport count_recovered(const std::vector<BinGenomeMetrics>& metrics,
                           const ReferenceMap& truth, double precision_floor,
                           const std::vector<double>& recall_grid) {
    EvalReport rep;
    rep.recall_grid = recall_grid;
    for (auto& c : rep.counts) c.assign(recall_grid.size(), 0);

    auto rank_of = [&truth](const std::string& genome, int rank) -> const std::string& {
        auto it = truth.taxonomy.find(genome);
        if (it == truth.taxonomy.end())
            throw input_error("taxonomy is missing genome '" + genome + "'");
        switch (rank) {
            case 0: return it->second.strain;
            case 1: return it->second.species;
            default: return it->second.genus;
        }
    };

    for (int rank = 0; rank < 3; ++rank) {
        for (std::size_t ti = 0; ti < recall_grid.size(); ++ti) {
            std::set<std::string> recovered;
            for (const auto& m : metrics) {
                if (m.genome_id.empty()) continue;
                if (m.precision >= precision_floor && m.recall > recall_grid[ti])
                    recovered.insert(rank_of(m.genome_id, rank));
            }
            rep.counts[static_cast<std::size_t>(rank)][ti] =
                static_cast<int>(recovered.size());
        }
    }

    std::set<std::string> nc;
    for (const auto& m : metrics) {
        if (m.genome_id.empty()) continue;
        rank_of(m.genome_id, 0);
        if (m.recall > 0.9 && m.precision > 0.95) nc.insert(m.genome_id);
    }
    rep.nc_count = static_cast<int>(nc.size());

    std::map<std::string, std::pair<double, double>> best;
    for (const auto& [genome, len] : truth.genome_lengths) {
        (void)len;
        best[genome] = {0.0, 0.0};
    }
    for (const auto& m : metrics) {
        if (m.genome_id.empty() || m.precision < precision_floor) continue;
        auto it = best.find(m.genome_id);
        if (it == best.end()) continue;
        if (m.recall > it->second.first) it->second = {m.recall, m.precision};
    }
    for (const auto& [genome, pr] : best) rep.genome_best.push_back({genome, pr});
    return rep;
}

Mat<float> pca_project(const Mat<float>& data, int dims) {
    std::size_t n = data.rows;
    std::size_t d = data.cols;
    if (n == 0) throw input_error("pca: no rows");
    if (dims < 1 || static_cast<std::size_t>(dims) > d)
        throw input_error("pca: dims must lie in [1, feature dimension]");

    // mean-center in double
    Mat<double> X(n, d);
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += static_cast<double>(data(i, j));
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            X(i, j) = static_cast<double>(data(i, j)) - mean[j];

    Mat<double> C(d, d);
    double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += X(i, a) * X(i, b);
            C(a, b) = acc / denom;
            C(b, a) = C(a, b);
        }

    // cyclic Jacobi eigen decomposition
    Mat<double> V(d, d);
    for (std::size_t i = 0; i < d; ++i) V(i, i) = 1.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < C.size(); ++i) norm += C.data()[i] * C.data()[i];
    norm = std::sqrt(norm);
    double tol = norm * 1e-14 + 1e-300;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += C(p, q) * C(p, q);
        if (std::sqrt(off) <= tol) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                if (std::fabs(C(p, q)) <= tol / static_cast<double>(d)) continue;
                double theta = (C(q, q) - C(p, p)) / (2.0 * C(p, q));
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t i = 0; i < d; ++i) {
                    double cip = C(i, p), ciq = C(i, q);
                    C(i, p) = c * cip - s * ciq;
                    C(i, q) = s * cip + c * ciq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    double cpi = C(p, i), cqi = C(q, i);
                    C(p, i) = c * cpi - s * cqi;
                    C(q, i) = s * cpi + c * cqi;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&C](std::size_t a, std::size_t b) { return C(a, a) > C(b, b); });

    double eig_tol = std::max(norm, 1.0) * 1e-12;
    int zero_var = 0;
    for (int j = 0; j < dims; ++j)
        if (C(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]) <=
            eig_tol)
            ++zero_var;
    if (zero_var > 0)
        log_warn("pca: " + std::to_string(zero_var) + " of " + std::to_string(dims) +
                 " requested components have zero variance (data rank deficit)");

    Mat<float> out(n, static_cast<std::size_t>(dims));
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < dims; ++j) {
            double acc = 0.0;
            std::size_t col = order[static_cast<std::size_t>(j)];
            for (std::size_t a = 0; a < d; ++a) acc += X(i, a) * V(a, col);
            out(i, static_cast<std::size_t>(j)) = static_cast<float>(acc);
        }
    return out;
}

void write_bin_metrics_tsv(const std::string& path,
                           const std::vector<BinGenomeMetrics>& metrics) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write bin metrics TSV: " + path);
    out << "bin_id\tgenome_id\ttp\tfp\tfn\tprecision\trecall\n";
    for (const auto& m : metrics)
        out << m.bin_id << '\t' << m.genome_id << '\t' << m.tp << '\t' << m.fp << '\t'
            << m.fn << '\t' << fmt_g(m.precision, 9) << '\t' << fmt_g(m.recall, 9) << '\n';
}

void write_report_tsv(const std::string& path, const EvalReport& report,
                      const std::string& label) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write report TSV: " + path);
    out << "# " << label << '\n';
    out << "rank";
    for (double r : report.recall_grid) out << '\t' << fmt_g(r, 6);
    out << '\n';
    const char* rank_names[3] = {"strain", "species", "genus"};
    for (int rank = 0; rank < 3; ++rank) {
        out << rank_names[rank];
        for (int c : report.counts[static_cast<std::size_t>(rank)]) out << '\t' << c;
        out << '\n';
    }
    out << "nc\t" << report.nc_count << '\n';
    out << "genome\tbest_recall\tbest_precision\n";
    for (const auto& [genome, pr] : report.genome_best)
        out << genome << '\t' << fmt_g(pr.first, 9) << '\t' << fmt_g(pr.second, 9) << '\n';
}

} // namespace clmb
