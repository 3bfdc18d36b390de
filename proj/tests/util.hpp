#ifndef CLMB_TESTS_UTIL_HPP
#define CLMB_TESTS_UTIL_HPP

/* Helpers shared between the unit test binaries and the acceptance runner:
   independent oracles, the finite-difference gradient checker, planted-blob
   generators and small filesystem utilities. */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <unordered_map>
#include <vector>

#include "clmb/bench.hpp"
#include "clmb/loss.hpp"
#include "clmb/mapping.hpp"
#include "clmb/matrix.hpp"
#include "clmb/nn.hpp"
#include "clmb/rng.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    double m = std::max(std::fabs(a), std::fabs(b));
    if (m < 1e-12) return 0.0;
    return std::fabs(a - b) / m;
}

inline std::string make_temp_dir(const std::string& tag) {
    static int counter = 0;
    std::filesystem::path p = std::filesystem::temp_directory_path() /
                              ("clmb_" + tag + "_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter++));
    std::filesystem::create_directories(p);
    return p.string();
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/* ---------- loss oracles ---------- */

/* Gaussian KL against the standard normal via the sd-parameterized textbook
   formula; `var` holds variances. */
inline double kl_closed_form(const std::vector<double>& mu, const std::vector<double>& var) {
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double sd = std::sqrt(var[i]);
        total += std::log(1.0 / sd) + (var[i] + mu[i] * mu[i]) / 2.0 - 0.5;
    }
    return total;
}

/* Direct NT-Xent evaluation: plain cosine, exp and log, no stabilization,
   positives interleaved as (2k, 2k+1), averaged over the 2N directed terms. */
inline double ntxent_oracle(const clmb::Mat<double>& X, double tau) {
    const std::size_t n = X.rows;
    auto cosine = [&](std::size_t a, std::size_t b) {
        double num = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t j = 0; j < X.cols; ++j) {
            num += X(a, j) * X(b, j);
            na += X(a, j) * X(a, j);
            nb += X(b, j) * X(b, j);
        }
        return num / std::sqrt(na * nb);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = i ^ 1u;
        double den = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            if (s != i) den += std::exp(cosine(i, s) / tau);
        total += -std::log(std::exp(cosine(i, p) / tau) / den);
    }
    return total / static_cast<double>(n);
}

/* ---------- gradient checking ---------- */

struct GradCase {
    clmb::NetworkSpec spec;
    int rows = 8; // network input rows (2N), even
    std::uint64_t seed = 1;
    bool contrast_on_split = false;
    clmb::Mode mode = clmb::Mode::Train;
};

struct GradData {
    clmb::Mat<double> input, A_in, T_in;
    clmb::LossWeights weights;
    std::uint64_t noise_seed = 0;
};

inline GradData grad_data(const GradCase& gc) {
    const int s = gc.spec.s, tw = gc.spec.tnf_dim;
    const int M = gc.rows, N = gc.rows / 2;
    GradData d;
    clmb::Rng rng(clmb::derive(gc.seed, 101));
    d.input = clmb::Mat<double>(static_cast<std::size_t>(M), static_cast<std::size_t>(s + tw));
    for (auto& x : d.input.v) x = 0.7 * rng.normal();
    d.A_in = clmb::Mat<double>(static_cast<std::size_t>(N), static_cast<std::size_t>(s));
    std::vector<double> row(static_cast<std::size_t>(s));
    for (int k = 0; k < N; ++k) {
        rng.dirichlet(1.0, row.data(), row.size());
        for (int j = 0; j < s; ++j) d.A_in(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) = row[static_cast<std::size_t>(j)];
    }
    d.T_in = clmb::Mat<double>(static_cast<std::size_t>(N), static_cast<std::size_t>(tw));
    for (auto& x : d.T_in.v) x = rng.normal();
    d.weights = clmb::LossWeights::make(s, gc.spec.latent_dim);
    d.weights.calibrated = true;
    d.weights.w2 = 0.37;
    d.weights.w3 = 1.9;
    d.noise_seed = clmb::derive(gc.seed, 202);
    return d;
}

inline double grad_loss_value(const clmb::VaeParams<double>& base, const GradData& d,
                              const GradCase& gc) {
    clmb::VaeParams<double> params = base;
    clmb::Rng rng(d.noise_seed);
    clmb::ForwardTrace<double> trace = clmb::forward(params, d.input, gc.mode, rng);
    double L1 = clmb::reconstruction_loss<double>(trace.A, trace.Tnf, d.A_in, d.T_in,
                                                  d.weights, nullptr, nullptr);
    double L2 = clmb::kl_loss<double>(trace.mu, trace.sigma, nullptr, nullptr);
    double L3;
    if (gc.contrast_on_split) {
        const std::size_t cols = trace.A.cols + trace.Tnf.cols;
        clmb::Mat<double> Xp(trace.A.rows, cols);
        for (std::size_t k = 0; k < trace.A.rows; ++k) {
            for (std::size_t j = 0; j < trace.A.cols; ++j) Xp(k, j) = trace.A(k, j);
            for (std::size_t j = 0; j < trace.Tnf.cols; ++j) Xp(k, trace.A.cols + j) = trace.Tnf(k, j);
        }
        L3 = clmb::contrastive_loss(Xp, d.weights.tau, static_cast<clmb::Mat<double>*>(nullptr));
    } else {
        L3 = clmb::contrastive_loss(trace.projection(), d.weights.tau,
                                    static_cast<clmb::Mat<double>*>(nullptr));
    }
    return L1 + d.weights.w2 * L2 + d.weights.w3 * L3;
}

inline clmb::VaeGrads<double> grad_analytic(const clmb::VaeParams<double>& base,
                                            const GradData& d, const GradCase& gc) {
    clmb::VaeParams<double> params = base;
    clmb::Rng rng(d.noise_seed);
    clmb::ForwardTrace<double> trace = clmb::forward(params, d.input, gc.mode, rng);
    clmb::Mat<double> dA, dT, dmu, dsig, dX;
    clmb::reconstruction_loss(trace.A, trace.Tnf, d.A_in, d.T_in, d.weights, &dA, &dT);
    clmb::kl_loss(trace.mu, trace.sigma, &dmu, &dsig);
    if (gc.contrast_on_split) {
        const std::size_t sa = trace.A.cols;
        clmb::Mat<double> Xp(trace.A.rows, sa + trace.Tnf.cols);
        for (std::size_t k = 0; k < trace.A.rows; ++k) {
            for (std::size_t j = 0; j < sa; ++j) Xp(k, j) = trace.A(k, j);
            for (std::size_t j = 0; j < trace.Tnf.cols; ++j) Xp(k, sa + j) = trace.Tnf(k, j);
        }
        clmb::contrastive_loss(Xp, d.weights.tau, &dX);
        for (std::size_t k = 0; k < Xp.rows; ++k)
            for (std::size_t j = 0; j < Xp.cols; ++j) {
                double g = d.weights.w3 * dX(k, j);
                if (j < sa) dA(k, j) += g;
                else dT(k, j - sa) += g;
            }
    } else {
        clmb::contrastive_loss(trace.projection(), d.weights.tau, &dX);
    }
    clmb::UpstreamGrads<double> up;
    up.dA = std::move(dA);
    up.dT = std::move(dT);
    up.dmu = std::move(dmu);
    for (auto& x : up.dmu.v) x *= d.weights.w2;
    up.dsigma = std::move(dsig);
    for (auto& x : up.dsigma.v) x *= d.weights.w2;
    if (!gc.contrast_on_split) {
        up.dx = std::move(dX);
        for (auto& x : up.dx.v) x *= d.weights.w3;
    }
    return clmb::backward(params, trace, up);
}

struct GradCheckOutcome {
    double max_rel = 0.0;
    std::size_t checked = 0;
};

/* Central finite differences over every trainable scalar against the
   analytic backward pass, with identical noise draws on every evaluation. */
inline GradCheckOutcome gradcheck(const GradCase& gc) {
    GradData d = grad_data(gc);
    clmb::Rng init_rng(clmb::derive(gc.seed, 303));
    clmb::VaeParams<double> base = clmb::init_params<double>(gc.spec, init_rng);
    clmb::VaeGrads<double> grads = grad_analytic(base, d, gc);
    auto gv = clmb::grad_views(grads);
    auto pv = clmb::param_views(base);

    GradCheckOutcome out;
    const double h = 1e-5;
    for (std::size_t vi = 0; vi < pv.size(); ++vi) {
        for (std::size_t i = 0; i < pv[vi].n; ++i) {
            double saved = pv[vi].data[i];
            pv[vi].data[i] = saved + h;
            double f_plus = grad_loss_value(base, d, gc);
            pv[vi].data[i] = saved - h;
            double f_minus = grad_loss_value(base, d, gc);
            pv[vi].data[i] = saved;
            double fd = (f_plus - f_minus) / (2.0 * h);
            double an = gv[vi].data[i];
            ++out.checked;
            if (std::max(std::fabs(fd), std::fabs(an)) < 1e-8) continue;
            double r = rel_err(fd, an);
            if (r > out.max_rel) out.max_rel = r;
        }
    }
    return out;
}

/* ---------- clustering helpers ---------- */

/* k well-separated Gaussian blobs; centroids drawn on a radius-2 sphere and
   resampled until pairwise Euclidean separation reaches min_sep. */
inline clmb::Mat<float> planted_blobs(int k, int per, int dim, double sigma, double min_sep,
                                      std::uint64_t seed, std::vector<int>* labels) {
    clmb::Rng rng(seed);
    std::vector<std::vector<double>> centers;
    while (static_cast<int>(centers.size()) < k) {
        std::vector<double> c(static_cast<std::size_t>(dim));
        double norm = 0.0;
        for (auto& x : c) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (auto& x : c) x = 2.0 * x / norm;
        bool ok = true;
        for (const auto& prev : centers) {
            double dd = 0.0;
            for (int j = 0; j < dim; ++j) dd += (c[static_cast<std::size_t>(j)] - prev[static_cast<std::size_t>(j)]) * (c[static_cast<std::size_t>(j)] - prev[static_cast<std::size_t>(j)]);
            if (std::sqrt(dd) < min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) centers.push_back(std::move(c));
    }
    clmb::Mat<float> out(static_cast<std::size_t>(k * per), static_cast<std::size_t>(dim));
    if (labels) labels->assign(static_cast<std::size_t>(k * per), 0);
    std::size_t r = 0;
    for (int c = 0; c < k; ++c)
        for (int p = 0; p < per; ++p, ++r) {
            for (int j = 0; j < dim; ++j)
                out(r, static_cast<std::size_t>(j)) = static_cast<float>(
                    centers[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] + sigma * rng.normal());
            if (labels) (*labels)[r] = c;
        }
    return out;
}

/* Exact partition equality up to label permutation. */
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, rev;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto f = fwd.find(a[i]);
        if (f == fwd.end()) fwd[a[i]] = b[i];
        else if (f->second != b[i]) return false;
        auto r = rev.find(b[i]);
        if (r == rev.end()) rev[b[i]] = a[i];
        else if (r->second != a[i]) return false;
    }
    return true;
}

/* ---------- benchmark oracle ---------- */

/* Per-base counting oracle: every genome gets a byte per base; coverage,
   TP/FP/FN and the best-genome choice are recomputed from scratch. */
inline std::vector<clmb::BinGenomeMetrics> oracle_evaluate(
    const clmb::NamedBins& bins, const clmb::ReferenceMap& truth,
    const std::unordered_map<std::string, std::int64_t>* contig_lengths) {
    std::map<std::string, std::int64_t> genome_len;
    std::unordered_map<std::string, std::vector<const clmb::RefEntry*>> by_contig;
    for (const auto& e : truth.entries) {
        by_contig[e.contig_id].push_back(&e);
        auto& len = genome_len[e.genome_id];
        len = std::max(len, e.end);
    }

    std::map<std::string, std::vector<char>> dataset_mask;
    for (const auto& [g, len] : genome_len) dataset_mask[g].assign(static_cast<std::size_t>(len), 0);
    for (const auto& [bin_id, members] : bins) {
        (void)bin_id;
        for (const auto& cid : members) {
            auto it = by_contig.find(cid);
            if (it == by_contig.end()) continue;
            for (const clmb::RefEntry* e : it->second)
                for (std::int64_t p = e->start; p < e->end; ++p)
                    dataset_mask[e->genome_id][static_cast<std::size_t>(p)] = 1;
        }
    }
    std::map<std::string, std::int64_t> dataset_cov;
    for (const auto& [g, mask] : dataset_mask)
        dataset_cov[g] = std::count(mask.begin(), mask.end(), char(1));

    std::vector<clmb::BinGenomeMetrics> out;
    for (const auto& [bin_id, members] : bins) {
        std::map<std::string, std::vector<char>> bin_mask;
        std::int64_t unknown = 0;
        for (const auto& cid : members) {
            auto it = by_contig.find(cid);
            if (it == by_contig.end()) {
                unknown += contig_lengths->at(cid);
                continue;
            }
            for (const clmb::RefEntry* e : it->second) {
                auto& mask = bin_mask[e->genome_id];
                if (mask.empty()) mask.assign(static_cast<std::size_t>(genome_len[e->genome_id]), 0);
                for (std::int64_t p = e->start; p < e->end; ++p) mask[static_cast<std::size_t>(p)] = 1;
            }
        }
        clmb::BinGenomeMetrics m;
        m.bin_id = bin_id;
        std::int64_t best = 0;
        std::map<std::string, std::int64_t> tp_of;
        for (const auto& [g, mask] : bin_mask)
            tp_of[g] = std::count(mask.begin(), mask.end(), char(1));
        for (const auto& [g, tp] : tp_of)
            if (tp > best) {
                best = tp;
                m.genome_id = g;
            }
        m.tp = best;
        m.fp = unknown;
        for (const auto& [g, tp] : tp_of)
            if (g != m.genome_id) m.fp += tp;
        if (!m.genome_id.empty()) m.fn = dataset_cov[m.genome_id] - m.tp;
        m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
        m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
        out.push_back(std::move(m));
    }
    return out;
}

/* Exhaustive (bin, taxon, threshold) enumeration mirroring the report
   definitions with plain loops. */
inline clmb::EvalReport oracle_count(const std::vector<clmb::BinGenomeMetrics>& metrics,
                                     const clmb::ReferenceMap& truth, double floor,
                                     const std::vector<double>& grid) {
    clmb::EvalReport rep;
    rep.recall_grid = grid;
    for (int rank = 0; rank < 3; ++rank) {
        rep.counts[static_cast<std::size_t>(rank)].assign(grid.size(), 0);
        for (std::size_t t = 0; t < grid.size(); ++t) {
            std::set<std::string> taxa;
            for (const auto& m : metrics) {
                if (m.genome_id.empty()) continue;
                const clmb::TaxonLabels& tl = truth.taxonomy.at(m.genome_id);
                if (m.precision >= floor && m.recall > grid[t])
                    taxa.insert(rank == 0 ? tl.strain : rank == 1 ? tl.species : tl.genus);
            }
            rep.counts[static_cast<std::size_t>(rank)][t] = static_cast<int>(taxa.size());
        }
    }
    std::set<std::string> nc;
    for (const auto& m : metrics)
        if (!m.genome_id.empty() && m.recall > 0.9 && m.precision > 0.95) nc.insert(m.genome_id);
    rep.nc_count = static_cast<int>(nc.size());
    std::map<std::string, std::pair<double, double>> best;
    for (const auto& [g, len] : truth.genome_lengths) {
        (void)len;
        best[g] = {0.0, 0.0};
    }
    for (const auto& m : metrics) {
        if (m.genome_id.empty() || m.precision < floor) continue;
        auto it = best.find(m.genome_id);
        if (it != best.end() && m.recall > it->second.first) it->second = {m.recall, m.precision};
    }
    for (const auto& [g, pr] : best) rep.genome_best.push_back({g, pr});
    return rep;
}

} // namespace testutil

#endif
