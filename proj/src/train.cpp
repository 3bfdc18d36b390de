#include "clmb/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include "clmb/common.hpp"

namespace clmb {

void TrainConfig::validate() const {
    if (batch_size < 2) throw input_error("train: batch_size must be >= 2");
    if (epochs < 1) throw input_error("train: epochs must be >= 1");
    if (learning_rate <= 0.0) throw input_error("train: learning rate must be > 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw input_error("train: adam betas must lie in [0, 1)");
    if (eps <= 0.0) throw input_error("train: adam eps must be > 0");
}

void adam_step(std::vector<ParamView<float>>& params, std::vector<ParamView<float>>& grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
    std::size_t total = 0;
    for (const auto& v : params) total += v.n;
    if (state.m.size() != total || state.v.size() != total)
        throw input_error("adam: moment buffers do not match parameter count");
    if (params.size() != grads.size())
        throw input_error("adam: gradient views do not match parameter views");

    state.step += 1;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    std::size_t off = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].n != grads[k].n)
            throw input_error("adam: gradient block shape mismatch");
        float* p = params[k].data;
        const float* g = grads[k].data;
        for (std::size_t i = 0; i < params[k].n; ++i) {
            double gi = static_cast<double>(g[i]);
            double m = beta1 * static_cast<double>(state.m[off + i]) + (1.0 - beta1) * gi;
            double v = beta2 * static_cast<double>(state.v[off + i]) + (1.0 - beta2) * gi * gi;
            state.m[off + i] = static_cast<float>(m);
            state.v[off + i] = static_cast<float>(v);
            double update = lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
            p[i] = static_cast<float>(static_cast<double>(p[i]) - update);
        }
        off += params[k].n;
    }
}

namespace {

TrainResult run_training(const FeatureMatrix& features, const TrainConfig& cfg,
                         Checkpoint ck) {
    cfg.validate();
    const NetworkSpec& spec = ck.params.spec;
    if (features.n() < 2) throw input_error("training needs at least 2 contigs");
    if (features.s() != spec.s || features.tnf_dim() != spec.tnf_dim)
        throw input_error("feature dimensions do not match the network spec");

    Mat<float> X = features.concat();
    std::size_t n = X.rows;
    std::size_t s = static_cast<std::size_t>(spec.s);
    std::size_t tw = static_cast<std::size_t>(spec.tnf_dim);
    std::size_t B = static_cast<std::size_t>(cfg.batch_size);

    std::uint64_t shuffle_base = substream(cfg.seed, "train.shuffle");
    std::uint64_t augpair_base = substream(cfg.seed, "train.augpair");
    std::uint64_t aug_base = substream(cfg.seed, "train.augment");
    std::uint64_t net_base = substream(cfg.seed, "train.net");

    TrainResult res;
    for (int e = ck.next_epoch; e < cfg.epochs; ++e) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng shuffle_rng(derive(shuffle_base, static_cast<std::uint64_t>(e)));
        shuffle_rng.shuffle(perm);

        double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0, sumt = 0.0;
        std::size_t done = 0;
        std::size_t nb = (n + B - 1) / B;
        for (std::size_t b = 0; b < nb; ++b) {
            std::size_t lo = b * B;
            std::size_t hi = std::min(n, lo + B);
            std::size_t N = hi - lo;
            if (N == 1) {
                log_info("epoch " + std::to_string(e) + ": skipping trailing 1-contig minibatch " +
                         std::to_string(b));
                continue;
            }
            Mat<float> batch(N, X.cols);
            for (std::size_t k = 0; k < N; ++k) {
                const float* src = X.row(perm[lo + k]);
                float* dst = batch.row(k);
                for (std::size_t j = 0; j < X.cols; ++j) dst[j] = src[j];
            }

            try {
                Rng pair_rng(derive(augpair_base, static_cast<std::uint64_t>(e), b));
                FormPair pair = sample_form_pair(pair_rng);
                Mat<float> aug = augment_batch(batch, pair, cfg.aug, aug_base,
                                               static_cast<std::uint64_t>(e), lo);
                Rng net_rng(derive(net_base, static_cast<std::uint64_t>(e), b));
                ForwardTrace<float> trace = forward(ck.params, aug, Mode::Train, net_rng);

                Mat<float> A_in(N, s), T_in(N, tw);
                for (std::size_t k = 0; k < N; ++k) {
                    const float* src = batch.row(k);
                    for (std::size_t j = 0; j < s; ++j) A_in(k, j) = src[j];
                    for (std::size_t j = 0; j < tw; ++j) T_in(k, j) = src[s + j];
                }

                Mat<float> dA, dT, dmu, dsig, dX;
                double L1 = reconstruction_loss(trace.A, trace.Tnf, A_in, T_in, ck.weights,
                                                &dA, &dT);
                double L2 = kl_loss(trace.mu, trace.sigma, &dmu, &dsig);
                double L3;
                if (cfg.contrast_on_split) {
                    Mat<float> Xp(2 * N, s + tw);
                    for (std::size_t k = 0; k < 2 * N; ++k) {
                        float* dst = Xp.row(k);
                        for (std::size_t j = 0; j < s; ++j) dst[j] = trace.A(k, j);
                        for (std::size_t j = 0; j < tw; ++j) dst[s + j] = trace.Tnf(k, j);
                    }
                    L3 = contrastive_loss(Xp, ck.weights.tau, &dX);
                } else {
                    L3 = contrastive_loss(trace.projection(), ck.weights.tau, &dX);
                }

                LossBreakdown bd = combine(L1, L2, L3, ck.weights, !ck.weights.calibrated);
                if (!std::isfinite(bd.total)) throw numeric_error("non-finite loss value");

                UpstreamGrads<float> up;
                up.dA = std::move(dA);
                up.dT = std::move(dT);
                double w2 = ck.weights.w2, w3 = ck.weights.w3;
                up.dmu = std::move(dmu);
                for (std::size_t i = 0; i < up.dmu.size(); ++i)
                    up.dmu.data()[i] = static_cast<float>(w2 * up.dmu.data()[i]);
                up.dsigma = std::move(dsig);
                for (std::size_t i = 0; i < up.dsigma.size(); ++i)
                    up.dsigma.data()[i] = static_cast<float>(w2 * up.dsigma.data()[i]);
                if (cfg.contrast_on_split) {
                    for (std::size_t k = 0; k < 2 * N; ++k)
                        for (std::size_t j = 0; j < s + tw; ++j) {
                            double g = w3 * static_cast<double>(dX(k, j));
                            if (j < s)
                                up.dA(k, j) = static_cast<float>(up.dA(k, j) + g);
                            else
                                up.dT(k, j - s) = static_cast<float>(up.dT(k, j - s) + g);
                        }
                } else {
                    up.dx = std::move(dX);
                    for (std::size_t i = 0; i < up.dx.size(); ++i)
                        up.dx.data()[i] = static_cast<float>(w3 * up.dx.data()[i]);
                }

                VaeGrads<float> grads = backward(ck.params, trace, up);
                auto pv = param_views(ck.params);
                auto gv = grad_views(grads);
                adam_step(pv, gv, ck.adam, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);

                sum1 += bd.L1;
                sum2 += bd.L2;
                sum3 += bd.L3;
                sumt += bd.total;
                done += N;
            } catch (const numeric_error& ex) {
                throw numeric_error("epoch " + std::to_string(e) + " minibatch " +
                                    std::to_string(b) + ": " + ex.what());
            }
        }

        double inv = 1.0 / static_cast<double>(done);
        EpochLoss el;
        el.epoch = e;
        el.L1 = sum1 * inv;
        el.L2 = sum2 * inv;
        el.L3 = sum3 * inv;
        el.total = sumt * inv;
        el.w2 = ck.weights.w2;
        el.w3 = ck.weights.w3;
        res.log.push_back(el);
        ck.next_epoch = e + 1;

        auto t1 = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(t1 - t0).count();
        std::ostringstream msg;
        msg << "epoch " << e + 1 << "/" << cfg.epochs << " L1=" << fmt_g(el.L1, 6)
            << " L2=" << fmt_g(el.L2, 6) << " L3=" << fmt_g(el.L3, 6)
            << " total=" << fmt_g(el.total, 6) << " (" << fmt_g(secs, 3) << "s)";
        log_info(msg.str());
    }
    res.state = std::move(ck);
    return res;
}

} // namespace

TrainResult train_vae(const FeatureMatrix& features, const NetworkSpec& spec,
                      const TrainConfig& cfg) {
    spec.validate();
    Checkpoint ck;
    Rng init_rng(substream(cfg.seed, "init"));
    ck.params = init_params<float>(spec, init_rng);
    ck.weights = LossWeights::make(spec.s, spec.latent_dim);
    std::size_t pc = param_count(spec);
    ck.adam.m.assign(pc, 0.0f);
    ck.adam.v.assign(pc, 0.0f);
    ck.adam.step = 0;
    ck.next_epoch = 0;
    return run_training(features, cfg, std::move(ck));
}

TrainResult resume_training(const FeatureMatrix& features, const TrainConfig& cfg,
                            Checkpoint start) {
    if (start.next_epoch >= cfg.epochs) {
        log_warn("checkpoint already covers " + std::to_string(start.next_epoch) +
                 " epochs; nothing to train");
        TrainResult res;
        res.state = std::move(start);
        return res;
    }
    return run_training(features, cfg, std::move(start));
}

namespace {

void write_block(std::ofstream& out, const float* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
}

void read_block(std::ifstream& in, float* data, std::size_t n, const std::string& path) {
    if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4)))
        throw input_error("truncated checkpoint: " + path);
}

} // namespace

void save_checkpoint(const std::string& path, Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write checkpoint: " + path);
    const NetworkSpec& spec = ck.params.spec;
    out << "CLMBVAE v1\n";
    out << "spec " << spec.s << ' ' << spec.tnf_dim << ' ' << spec.latent_dim << ' '
        << spec.encoder_hidden.size();
    for (int h : spec.encoder_hidden) out << ' ' << h;
    out << '\n';
    out << "hyper " << fmt_g(spec.dropout_p, 17) << ' ' << fmt_g(spec.leaky_slope, 17) << ' '
        << fmt_g(spec.bn_eps, 17) << ' ' << fmt_g(spec.bn_momentum, 17) << '\n';
    out << "state " << ck.adam.step << ' ' << ck.next_epoch << ' '
        << (ck.weights.calibrated ? 1 : 0) << ' ' << fmt_g(ck.weights.w2, 17) << ' '
        << fmt_g(ck.weights.w3, 17) << ' ' << fmt_g(ck.weights.L1_0, 17) << ' '
        << fmt_g(ck.weights.L2_0, 17) << ' ' << fmt_g(ck.weights.L3_0, 17) << '\n';

    auto pv = param_views(ck.params);
    auto rv = running_views(ck.params);
    std::size_t total = 0;
    for (const auto& v : pv) total += v.n;
    for (const auto& v : rv) total += v.n;
    total += ck.adam.m.size() + ck.adam.v.size();
    out << "blocks " << total << '\n';
    for (const auto& v : pv) write_block(out, v.data, v.n);
    for (const auto& v : rv) write_block(out, v.data, v.n);
    write_block(out, ck.adam.m.data(), ck.adam.m.size());
    write_block(out, ck.adam.v.data(), ck.adam.v.size());
    if (!out) throw input_error("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "CLMBVAE v1")
        throw input_error("not a checkpoint file: " + path);

    NetworkSpec spec;
    if (!std::getline(in, line)) throw input_error("truncated checkpoint: " + path);
    {
        std::istringstream ls(line);
        std::string tag;
        std::size_t nh = 0;
        ls >> tag >> spec.s >> spec.tnf_dim >> spec.latent_dim >> nh;
        if (tag != "spec" || !ls) throw input_error("bad spec line in checkpoint: " + path);
        spec.encoder_hidden.clear();
        for (std::size_t i = 0; i < nh; ++i) {
            int h = 0;
            if (!(ls >> h)) throw input_error("bad spec line in checkpoint: " + path);
            spec.encoder_hidden.push_back(h);
        }
    }
    if (!std::getline(in, line)) throw input_error("truncated checkpoint: " + path);
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag >> spec.dropout_p >> spec.leaky_slope >> spec.bn_eps >> spec.bn_momentum;
        if (tag != "hyper" || !ls) throw input_error("bad hyper line in checkpoint: " + path);
    }

    Checkpoint ck;
    if (!std::getline(in, line)) throw input_error("truncated checkpoint: " + path);
    {
        std::istringstream ls(line);
        std::string tag;
        int calibrated = 0;
        ls >> tag >> ck.adam.step >> ck.next_epoch >> calibrated;
        ck.weights = LossWeights::make(spec.s, spec.latent_dim);
        ls >> ck.weights.w2 >> ck.weights.w3 >> ck.weights.L1_0 >> ck.weights.L2_0 >>
            ck.weights.L3_0;
        if (tag != "state" || !ls) throw input_error("bad state line in checkpoint: " + path);
        ck.weights.calibrated = calibrated != 0;
    }

    ck.params = make_params<float>(spec);
    std::size_t pc = param_count(spec);
    ck.adam.m.assign(pc, 0.0f);
    ck.adam.v.assign(pc, 0.0f);

    if (!std::getline(in, line)) throw input_error("truncated checkpoint: " + path);
    {
        std::istringstream ls(line);
        std::string tag;
        std::size_t blocks = 0;
        ls >> tag >> blocks;
        if (tag != "blocks" || !ls) throw input_error("bad blocks line in checkpoint: " + path);
        auto pv = param_views(ck.params);
        auto rv = running_views(ck.params);
        std::size_t expect = 2 * pc;
        for (const auto& v : pv) expect += v.n;
        for (const auto& v : rv) expect += v.n;
        if (blocks != expect)
            throw input_error("checkpoint parameter count does not match its spec: " + path);
    }

    auto pv = param_views(ck.params);
    auto rv = running_views(ck.params);
    for (auto& v : pv) read_block(in, v.data, v.n, path);
    for (auto& v : rv) read_block(in, v.data, v.n, path);
    read_block(in, ck.adam.m.data(), pc, path);
    read_block(in, ck.adam.v.data(), pc, path);
    char extra;
    if (in.read(&extra, 1)) throw input_error("trailing bytes in checkpoint: " + path);
    return ck;
}

void write_loss_log(const std::string& path, const std::vector<EpochLoss>& log) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write loss log: " + path);
    out << "epoch\tL1\tL2\tL3\ttotal\tw2\tw3\n";
    for (const auto& el : log)
        out << el.epoch << '\t' << fmt_g(el.L1, 17) << '\t' << fmt_g(el.L2, 17) << '\t'
            << fmt_g(el.L3, 17) << '\t' << fmt_g(el.total, 17) << '\t' << fmt_g(el.w2, 17)
            << '\t' << fmt_g(el.w3, 17) << '\n';
}

} // namespace clmb
