#include "clmb/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "clmb/common.hpp"
#include "clmb/kernels_core.hpp"
#include "clmb/rng.hpp"

namespace clmb {

namespace {

Mat<double> to_double(const Mat<float>& m) {
    Mat<double> out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.size(); ++i)
        out.data()[i] = static_cast<double>(m.data()[i]);
    return out;
}

Mat<double> unit_rows(const Mat<float>& m) {
    Mat<double> out = to_double(m);
    for (std::size_t i = 0; i < out.rows; ++i) {
        double* r = out.row(i);
        double norm = 0.0;
        for (std::size_t j = 0; j < out.cols; ++j) norm += r[j] * r[j];
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (std::size_t j = 0; j < out.cols; ++j) r[j] /= norm;
    }
    return out;
}

} // namespace

Clustering iterative_medoid(const Mat<float>& latent, const MedoidParams& p) {
    std::size_t n = latent.rows;
    if (n == 0) throw input_error("medoid clustering: no points");
    Mat<double> X = unit_rows(latent);
    std::size_t d = X.cols;

    std::vector<char> clustered(n, 0);
    std::vector<int> assignment(n, -1);
    std::vector<double> dist(n);
    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    int nbins = static_cast<int>(std::ceil(p.hist_range / p.hist_width));
    std::vector<double> hist(static_cast<std::size_t>(nbins));
    std::vector<double> sm(static_cast<std::size_t>(nbins));

    int next_cluster = 0;
    std::size_t seed_scan = 0;
    while (true) {
        while (seed_scan < n && clustered[seed_scan]) ++seed_scan;
        if (seed_scan == n) break;
        std::size_t medoid = seed_scan;

        // hill-climb to the local medoid of the near-neighborhood
        for (int step = 0; step < p.max_steps; ++step) {
            kernels::cosine_from_point(X.data(), X.row(medoid), dist.data(), n, d);
            std::vector<std::size_t> neigh;
            for (std::size_t i : remaining)
                if (dist[i] <= p.neighbor_radius) neigh.push_back(i);
            if (std::find(neigh.begin(), neigh.end(), medoid) == neigh.end())
                neigh.push_back(medoid);
            std::size_t best = medoid;
            double best_sum = 1.0 / 0.0;
            for (std::size_t cand : neigh) {
                double sum = 0.0;
                const double* cr = X.row(cand);
                for (std::size_t other : neigh) {
                    double dot = 0.0;
                    const double* orow = X.row(other);
                    for (std::size_t j = 0; j < d; ++j) dot += cr[j] * orow[j];
                    sum += 1.0 - dot;
                }
                if (sum < best_sum) {
                    best_sum = sum;
                    best = cand;
                }
            }
            if (best == medoid) break;
            medoid = best;
        }

        kernels::cosine_from_point(X.data(), X.row(medoid), dist.data(), n, d);

        // histogram of distances from the medoid over unclustered points
        std::fill(hist.begin(), hist.end(), 0.0);
        for (std::size_t i : remaining) {
            int b = static_cast<int>(dist[i] / p.hist_width);
            if (b < 0) b = 0;
            if (b >= nbins) b = nbins - 1;
            hist[static_cast<std::size_t>(b)] += 1.0;
        }
        int half = p.smooth_window / 2;
        for (int i = 0; i < nbins; ++i) {
            int lo = std::max(0, i - half);
            int hi = std::min(nbins - 1, i + half);
            double acc = 0.0;
            for (int j = lo; j <= hi; ++j) acc += hist[static_cast<std::size_t>(j)];
            sm[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
        }

        double radius = p.fallback_radius;
        int pw = std::min(p.peak_window, nbins);
        int peak = 0;
        for (int i = 1; i < pw; ++i)
            if (sm[static_cast<std::size_t>(i)] > sm[static_cast<std::size_t>(peak)]) peak = i;
        if (peak + 1 < nbins) {
            int bg = peak + 1;
            for (int i = peak + 1; i < nbins; ++i)
                if (sm[static_cast<std::size_t>(i)] > sm[static_cast<std::size_t>(bg)]) bg = i;
            if (bg > peak + 1) {
                int valley = peak + 1;
                for (int i = peak + 1; i < bg; ++i)
                    if (sm[static_cast<std::size_t>(i)] < sm[static_cast<std::size_t>(valley)])
                        valley = i;
                double floor_level = p.valley_ratio *
                                     std::min(sm[static_cast<std::size_t>(peak)],
                                              sm[static_cast<std::size_t>(bg)]);
                if (sm[static_cast<std::size_t>(valley)] <= floor_level)
                    radius = (static_cast<double>(valley) + 0.5) * p.hist_width;
            }
        }

        std::vector<std::size_t> members;
        for (std::size_t i : remaining)
            if (dist[i] <= radius) members.push_back(i);
        if (members.empty()) members.push_back(medoid);

        if (static_cast<int>(members.size()) < p.min_cluster_size) {
            for (std::size_t i : members) {
                assignment[i] = next_cluster++;
                clustered[i] = 1;
            }
        } else {
            for (std::size_t i : members) {
                assignment[i] = next_cluster;
                clustered[i] = 1;
            }
            ++next_cluster;
        }
        std::vector<std::size_t> keep;
        keep.reserve(remaining.size() - members.size());
        for (std::size_t i : remaining)
            if (!clustered[i]) keep.push_back(i);
        remaining.swap(keep);
    }
    return Clustering{std::move(assignment), next_cluster};
}

Clustering minibatch_kmeans(const Mat<float>& latent, const KmeansParams& p) {
    std::size_t n = latent.rows;
    if (n == 0) throw input_error("kmeans clustering: no points");
    if (p.k < 1) throw input_error("kmeans: k must be >= 1");
    Mat<double> X = to_double(latent);
    std::size_t d = X.cols;

    std::size_t k = static_cast<std::size_t>(p.k);
    if (k > n) {
        log_warn("kmeans: k=" + std::to_string(p.k) + " exceeds point count " +
                 std::to_string(n) + "; clamping");
        k = n;
    }

    Rng rng(substream(p.seed, "cluster.kmeans"));

    // k-means++ on a subsample
    std::size_t init_m = std::min<std::size_t>(static_cast<std::size_t>(p.init_size), n);
    std::vector<std::size_t> sub = rng.choose(n, init_m);
    Mat<double> centers(k, d);
    std::vector<double> d2(init_m);
    {
        std::size_t first = sub[rng.uniform_below(init_m)];
        for (std::size_t j = 0; j < d; ++j) centers(0, j) = X(first, j);
        std::vector<char> used(init_m, 0);
        for (std::size_t i = 0; i < init_m; ++i)
            if (sub[i] == first) used[i] = 1;
        for (std::size_t i = 0; i < init_m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double t = X(sub[i], j) - centers(0, j);
                acc += t * t;
            }
            d2[i] = acc;
        }
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < init_m; ++i) total += d2[i];
            std::size_t pick = init_m;
            if (total <= 0.0) {
                for (std::size_t i = 0; i < init_m; ++i)
                    if (!used[i]) {
                        pick = i;
                        break;
                    }
                if (pick == init_m) pick = 0;
            } else {
                double u = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < init_m; ++i) {
                    acc += d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
                if (pick == init_m) pick = init_m - 1;
            }
            used[pick] = 1;
            for (std::size_t j = 0; j < d; ++j) centers(c, j) = X(sub[pick], j);
            for (std::size_t i = 0; i < init_m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    double t = X(sub[i], j) - centers(c, j);
                    acc += t * t;
                }
                d2[i] = std::min(d2[i], acc);
            }
        }
    }

    // minibatch updates with per-center learning rates
    std::vector<double> counts(k, 0.0);
    std::size_t bsz = std::min<std::size_t>(static_cast<std::size_t>(p.batch), n);
    for (int it = 0; it < p.max_iter; ++it) {
        std::vector<std::size_t> batch = rng.choose(n, bsz);
        for (std::size_t bi = 0; bi < batch.size(); ++bi) {
            std::size_t i = batch[bi];
            std::size_t best = 0;
            double best_d = 1.0 / 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    double t = X(i, j) - centers(c, j);
                    acc += t * t;
                }
                if (acc < best_d) {
                    best_d = acc;
                    best = c;
                }
            }
            counts[best] += 1.0;
            double eta = 1.0 / counts[best];
            for (std::size_t j = 0; j < d; ++j)
                centers(best, j) += eta * (X(i, j) - centers(best, j));
        }
        double assigned = 0.0;
        for (std::size_t c = 0; c < k; ++c) assigned += counts[c];
        double thr = p.reassignment_ratio * assigned / static_cast<double>(k);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] < thr) {
                std::size_t pick = rng.uniform_below(n);
                for (std::size_t j = 0; j < d; ++j) centers(c, j) = X(pick, j);
                counts[c] = 1.0;
            }
        }
    }

    // full nearest-center assignment, ties to the lowest center index
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = 1.0 / 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double t = X(i, j) - centers(c, j);
                acc += t * t;
            }
            if (acc < best_d) {
                best_d = acc;
                best = c;
            }
        }
        raw[i] = static_cast<int>(best);
    }

    std::vector<int> remap(k, -1);
    int next = 0;
    std::vector<int> assignment(n);
    for (std::size_t c = 0; c < k; ++c) {
        bool seen = false;
        for (std::size_t i = 0; i < n && !seen; ++i) seen = raw[i] == static_cast<int>(c);
        if (seen) remap[c] = next++;
    }
    for (std::size_t i = 0; i < n; ++i) assignment[i] = remap[static_cast<std::size_t>(raw[i])];
    return Clustering{std::move(assignment), next};
}

Clustering dbscan(const Mat<float>& latent, const DbscanParams& p) {
    std::size_t n = latent.rows;
    if (n == 0) throw input_error("dbscan clustering: no points");
    if (p.eps < 0.0) throw input_error("dbscan: eps must be >= 0");
    if (p.min_samples < 1) throw input_error("dbscan: min_samples must be >= 1");
    Mat<double> X = to_double(latent);
    std::size_t d = X.cols;
    double eps2 = p.eps * p.eps;

    std::vector<double> dist(n);
    auto neighbors = [&](std::size_t i, std::vector<std::size_t>& out) {
        out.clear();
        kernels::sqdist_from_point(X.data(), X.row(i), dist.data(), n, d);
        for (std::size_t j = 0; j < n; ++j)
            if (dist[j] <= eps2) out.push_back(j);
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(n, kUnvisited);
    int next_cluster = 0;
    std::vector<std::size_t> neigh, more;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        neighbors(i, neigh);
        if (neigh.size() < static_cast<std::size_t>(p.min_samples)) {
            label[i] = kNoise;
            continue;
        }
        int cid = next_cluster++;
        label[i] = cid;
        std::vector<std::size_t> queue = neigh;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::size_t q = queue[qi];
            if (label[q] == kNoise) label[q] = cid;
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            neighbors(q, more);
            if (more.size() >= static_cast<std::size_t>(p.min_samples))
                queue.insert(queue.end(), more.begin(), more.end());
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] == kNoise) label[i] = next_cluster++;
    return Clustering{std::move(label), next_cluster};
}

BinSet multi_split(const Clustering& clustering, const std::vector<int>& sample_of_contig,
                   const std::vector<std::string>& sample_ids) {
    if (clustering.assignment.size() != sample_of_contig.size())
        throw input_error("multi_split: assignment and sample list sizes differ");
    std::size_t n = clustering.assignment.size();
    for (std::size_t i = 0; i < n; ++i) {
        int si = sample_of_contig[i];
        if (si < 0 || static_cast<std::size_t>(si) >= sample_ids.size())
            throw input_error("multi_split: contig " + std::to_string(i) +
                              " has no valid sample");
    }

    std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i)
        groups[{clustering.assignment[i], sample_of_contig[i]}].push_back(i);

    BinSet bs;
    bs.bins.reserve(groups.size());
    for (auto& [key, members] : groups) {
        Bin b;
        b.cluster = key.first;
        b.sample = key.second;
        b.bin_id = std::to_string(key.first) + "C" +
                   sample_ids[static_cast<std::size_t>(key.second)] + "S";
        b.members = std::move(members);
        bs.bins.push_back(std::move(b));
    }
    return bs;
}

void write_clusters_tsv(const std::string& path, const BinSet& bins,
                        const std::vector<std::string>& contig_ids) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write cluster TSV: " + path);
    out << "bin_id\tcontig_id\n";
    for (const auto& b : bins.bins)
        for (std::size_t i : b.members) out << b.bin_id << '\t' << contig_ids[i] << '\n';
    if (!out) throw input_error("write failure on cluster TSV: " + path);
}

std::vector<std::pair<std::string, std::vector<std::string>>> read_clusters_tsv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open cluster TSV: " + path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::map<std::string, std::size_t> index;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw input_error("cluster TSV line " + std::to_string(lineno) +
                              " is not two tab-separated fields");
        std::string bin = line.substr(0, tab);
        std::string contig = line.substr(tab + 1);
        if (first && bin == "bin_id" && contig == "contig_id") {
            first = false;
            continue;
        }
        first = false;
        if (bin.empty() || contig.empty())
            throw input_error("cluster TSV line " + std::to_string(lineno) +
                              " has an empty field");
        auto it = index.find(bin);
        if (it == index.end()) {
            index.emplace(bin, out.size());
            out.push_back({bin, {contig}});
        } else {
            out[it->second].second.push_back(contig);
        }
    }
    return out;
}

} // namespace clmb
