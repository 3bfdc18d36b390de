#include "clmb/config.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "clmb/common.hpp"

namespace clmb {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw input_error("config: " + key + " expects an integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw input_error("config: " + key + " expects a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw input_error("config: " + key + " expects true or false, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    if (v.empty() || v == "none") return out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        out.push_back(static_cast<int>(to_int(key, part)));
    }
    return out;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string from_int_list(const std::vector<int>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw input_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos)
            throw input_error("config line " + std::to_string(lineno) +
                              ": key must look like section.name");
        cfg.values[key] = value;
    }
    return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config file " + path);
    return parse_config(in);
}

void apply_config(const ConfigFile& cfg, PipelineOptions& opts) {
    for (const auto& [key, v] : cfg.values) {
        if (key == "featurize.kmer_k") opts.featurize.kmer_k = static_cast<int>(to_int(key, v));
        else if (key == "featurize.min_length") opts.featurize.min_length = static_cast<int>(to_int(key, v));
        else if (key == "augment.gaussian_scale") opts.augment.gaussian_scale = to_double(key, v);
        else if (key == "augment.mask_p") opts.augment.mask_p = to_double(key, v);
        else if (key == "augment.shift_fraction") opts.augment.shift_fraction = to_double(key, v);
        else if (key == "augment.gaussian_literal_mu") opts.augment.gaussian_literal_mu = to_bool(key, v);
        else if (key == "spec.hidden") opts.spec.encoder_hidden = to_int_list(key, v);
        else if (key == "spec.latent") opts.spec.latent_dim = static_cast<int>(to_int(key, v));
        else if (key == "spec.dropout") opts.spec.dropout_p = to_double(key, v);
        else if (key == "spec.leaky_slope") opts.spec.leaky_slope = to_double(key, v);
        else if (key == "spec.bn_eps") opts.spec.bn_eps = to_double(key, v);
        else if (key == "spec.bn_momentum") opts.spec.bn_momentum = to_double(key, v);
        else if (key == "train.batch_size") opts.train.batch_size = static_cast<int>(to_int(key, v));
        else if (key == "train.epochs") opts.train.epochs = static_cast<int>(to_int(key, v));
        else if (key == "train.learning_rate") opts.train.learning_rate = to_double(key, v);
        else if (key == "train.beta1") opts.train.beta1 = to_double(key, v);
        else if (key == "train.beta2") opts.train.beta2 = to_double(key, v);
        else if (key == "train.eps") opts.train.eps = to_double(key, v);
        else if (key == "train.contrast_on_split") opts.train.contrast_on_split = to_bool(key, v);
        else if (key == "cluster.algorithm") {
            if (v != "medoid" && v != "kmeans" && v != "dbscan")
                throw input_error("config: cluster.algorithm must be medoid, kmeans or dbscan, got '" + v + "'");
            opts.cluster.algorithm = v;
        }
        else if (key == "cluster.min_cluster_size") opts.cluster.medoid.min_cluster_size = static_cast<int>(to_int(key, v));
        else if (key == "cluster.max_steps") opts.cluster.medoid.max_steps = static_cast<int>(to_int(key, v));
        else if (key == "cluster.k") opts.cluster.kmeans.k = static_cast<int>(to_int(key, v));
        else if (key == "cluster.batch") opts.cluster.kmeans.batch = static_cast<int>(to_int(key, v));
        else if (key == "cluster.max_iter") opts.cluster.kmeans.max_iter = static_cast<int>(to_int(key, v));
        else if (key == "cluster.init_size") opts.cluster.kmeans.init_size = static_cast<int>(to_int(key, v));
        else if (key == "cluster.reassignment_ratio") opts.cluster.kmeans.reassignment_ratio = to_double(key, v);
        else if (key == "cluster.eps") opts.cluster.dbscan.eps = to_double(key, v);
        else if (key == "cluster.min_samples") opts.cluster.dbscan.min_samples = static_cast<int>(to_int(key, v));
        else if (key == "synth.genomes") opts.synth.genomes = static_cast<int>(to_int(key, v));
        else if (key == "synth.twin_pairs") opts.synth.twin_pairs = static_cast<int>(to_int(key, v));
        else if (key == "synth.samples") opts.synth.samples = static_cast<int>(to_int(key, v));
        else if (key == "synth.genome_len") opts.synth.genome_len = static_cast<int>(to_int(key, v));
        else if (key == "synth.contig_min") opts.synth.contig_min = static_cast<int>(to_int(key, v));
        else if (key == "synth.contig_max") opts.synth.contig_max = static_cast<int>(to_int(key, v));
        else if (key == "synth.read_rate") opts.synth.read_rate = to_double(key, v);
        else if (key == "synth.read_sigma") opts.synth.read_sigma = to_double(key, v);
        else if (key == "synth.presence_drop") opts.synth.presence_drop = to_double(key, v);
        else if (key == "synth.markov_alpha") opts.synth.markov_alpha = to_double(key, v);
        else if (key == "synth.min_divergence") opts.synth.min_divergence = to_double(key, v);
        else if (key == "synth.max_attempts") opts.synth.max_attempts = static_cast<int>(to_int(key, v));
        else throw input_error("config: unknown key '" + key + "'");
    }
}

std::map<std::string, std::string> effective_config(const PipelineOptions& opts) {
    std::map<std::string, std::string> m;
    m["featurize.kmer_k"] = std::to_string(opts.featurize.kmer_k);
    m["featurize.min_length"] = std::to_string(opts.featurize.min_length);
    m["augment.gaussian_scale"] = fmt_g(opts.augment.gaussian_scale);
    m["augment.mask_p"] = fmt_g(opts.augment.mask_p);
    m["augment.shift_fraction"] = fmt_g(opts.augment.shift_fraction);
    m["augment.gaussian_literal_mu"] = from_bool(opts.augment.gaussian_literal_mu);
    m["spec.hidden"] = from_int_list(opts.spec.encoder_hidden);
    m["spec.latent"] = std::to_string(opts.spec.latent_dim);
    m["spec.dropout"] = fmt_g(opts.spec.dropout_p);
    m["spec.leaky_slope"] = fmt_g(opts.spec.leaky_slope);
    m["spec.bn_eps"] = fmt_g(opts.spec.bn_eps);
    m["spec.bn_momentum"] = fmt_g(opts.spec.bn_momentum);
    m["train.batch_size"] = std::to_string(opts.train.batch_size);
    m["train.epochs"] = std::to_string(opts.train.epochs);
    m["train.learning_rate"] = fmt_g(opts.train.learning_rate);
    m["train.beta1"] = fmt_g(opts.train.beta1);
    m["train.beta2"] = fmt_g(opts.train.beta2);
    m["train.eps"] = fmt_g(opts.train.eps);
    m["train.contrast_on_split"] = from_bool(opts.train.contrast_on_split);
    m["cluster.algorithm"] = opts.cluster.algorithm;
    m["cluster.min_cluster_size"] = std::to_string(opts.cluster.medoid.min_cluster_size);
    m["cluster.max_steps"] = std::to_string(opts.cluster.medoid.max_steps);
    m["cluster.k"] = std::to_string(opts.cluster.kmeans.k);
    m["cluster.batch"] = std::to_string(opts.cluster.kmeans.batch);
    m["cluster.max_iter"] = std::to_string(opts.cluster.kmeans.max_iter);
    m["cluster.init_size"] = std::to_string(opts.cluster.kmeans.init_size);
    m["cluster.reassignment_ratio"] = fmt_g(opts.cluster.kmeans.reassignment_ratio);
    m["cluster.eps"] = fmt_g(opts.cluster.dbscan.eps);
    m["cluster.min_samples"] = std::to_string(opts.cluster.dbscan.min_samples);
    m["synth.genomes"] = std::to_string(opts.synth.genomes);
    m["synth.twin_pairs"] = std::to_string(opts.synth.twin_pairs);
    m["synth.samples"] = std::to_string(opts.synth.samples);
    m["synth.genome_len"] = std::to_string(opts.synth.genome_len);
    m["synth.contig_min"] = std::to_string(opts.synth.contig_min);
    m["synth.contig_max"] = std::to_string(opts.synth.contig_max);
    m["synth.read_rate"] = fmt_g(opts.synth.read_rate);
    m["synth.read_sigma"] = fmt_g(opts.synth.read_sigma);
    m["synth.presence_drop"] = fmt_g(opts.synth.presence_drop);
    m["synth.markov_alpha"] = fmt_g(opts.synth.markov_alpha);
    m["synth.min_divergence"] = fmt_g(opts.synth.min_divergence);
    m["synth.max_attempts"] = std::to_string(opts.synth.max_attempts);
    return m;
}

std::string hash_file_fnv1a(const std::string& path) {
    std::uint64_t h = hash_file(path);
    char out[19];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

void write_manifest(const std::string& path, const Manifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["threads"] = m.threads;
    j["config"] = m.config;
    j["inputs"] = nlohmann::json::array();
    for (const auto& [p, h] : m.inputs) j["inputs"].push_back({{"path", p}, {"fnv1a", h}});
    j["outputs"] = m.outputs;
    j["durations"] = nlohmann::json::array();
    for (const auto& [phase, sec] : m.durations)
        j["durations"].push_back({{"phase", phase}, {"seconds", sec}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write manifest " + path);
    out << j.dump(2) << "\n";
}

} // namespace clmb
