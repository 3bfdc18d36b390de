#include "clmb/nn.hpp"

#include <cmath>

#include "clmb/common.hpp"
#include "clmb/kernels_core.hpp"

namespace clmb {

void NetworkSpec::validate() const {
    if (s < 1) throw input_error("network spec: sample count must be >= 1");
    if (tnf_dim < 1) throw input_error("network spec: composition width must be >= 1");
    if (latent_dim < 1) throw input_error("network spec: latent_dim must be >= 1");
    for (int h : encoder_hidden)
        if (h < 1) throw input_error("network spec: hidden widths must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw input_error("network spec: dropout_p must lie in [0, 1)");
    if (bn_eps <= 0.0) throw input_error("network spec: bn_eps must be > 0");
    if (bn_momentum <= 0.0 || bn_momentum > 1.0)
        throw input_error("network spec: bn_momentum must lie in (0, 1]");
}

namespace {

template <class T>
void check_finite(const Mat<T>& m, const char* name) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!std::isfinite(static_cast<double>(m.data()[i])))
            throw numeric_error(std::string("non-finite activation in ") + name);
}

template <class T>
Affine<T> make_affine(int out_dim, int in_dim, Rng& rng) {
    Affine<T> a;
    a.W = Mat<T>(static_cast<std::size_t>(out_dim), static_cast<std::size_t>(in_dim));
    a.b.assign(static_cast<std::size_t>(out_dim), T(0));
    double r = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (std::size_t i = 0; i < a.W.size(); ++i)
        a.W.data()[i] = static_cast<T>((rng.uniform() * 2.0 - 1.0) * r);
    return a;
}

template <class T>
BnParams<T> make_bn(int width) {
    BnParams<T> bn;
    bn.gamma.assign(static_cast<std::size_t>(width), T(1));
    bn.beta.assign(static_cast<std::size_t>(width), T(0));
    bn.rm.assign(static_cast<std::size_t>(width), T(0));
    bn.rv.assign(static_cast<std::size_t>(width), T(1));
    return bn;
}

template <class T>
void affine_forward(const Mat<T>& in, const Affine<T>& a, Mat<T>& out) {
    if (in.cols != a.W.cols) throw input_error("affine input width mismatch");
    out = Mat<T>(in.rows, a.W.rows);
    kernels::matmul_nt(in.data(), a.W.data(), out.data(), in.rows, in.cols, a.W.rows);
    for (std::size_t i = 0; i < out.rows; ++i) {
        T* r = out.row(i);
        for (std::size_t j = 0; j < out.cols; ++j) r[j] += a.b[j];
    }
}

/* d_out: M x out; returns d_in and accumulates into gW/gb (assigned, not +=) */
template <class T>
Mat<T> affine_backward(const Mat<T>& in, const Affine<T>& a, const Mat<T>& d_out,
                       Affine<T>& grad) {
    kernels::matmul_tn(d_out.data(), in.data(), grad.W.data(), d_out.rows, d_out.cols,
                       in.cols);
    kernels::colsum(d_out.data(), grad.b.data(), d_out.rows, d_out.cols);
    Mat<T> d_in(in.rows, in.cols);
    kernels::matmul(d_out.data(), a.W.data(), d_in.data(), d_out.rows, d_out.cols, in.cols);
    return d_in;
}

template <class T>
void bn_forward(const Mat<T>& a, BnParams<T>& bn, const NetworkSpec& spec, Mode mode,
                LayerTrace<T>& lt) {
    std::size_t m = a.rows, w = a.cols;
    lt.xhat = Mat<T>(m, w);
    lt.y = Mat<T>(m, w);
    lt.mean.assign(w, T(0));
    lt.var.assign(w, T(0));
    if (mode == Mode::Train) {
        for (std::size_t j = 0; j < w; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m; ++i) mean += static_cast<double>(a(i, j));
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double t = static_cast<double>(a(i, j)) - mean;
                var += t * t;
            }
            var /= static_cast<double>(m);
            lt.mean[j] = static_cast<T>(mean);
            lt.var[j] = static_cast<T>(var);
            double unbiased = var * static_cast<double>(m) / static_cast<double>(m - 1);
            bn.rm[j] = static_cast<T>((1.0 - spec.bn_momentum) * static_cast<double>(bn.rm[j]) +
                                      spec.bn_momentum * mean);
            bn.rv[j] = static_cast<T>((1.0 - spec.bn_momentum) * static_cast<double>(bn.rv[j]) +
                                      spec.bn_momentum * unbiased);
        }
    } else {
        for (std::size_t j = 0; j < w; ++j) {
            lt.mean[j] = bn.rm[j];
            lt.var[j] = bn.rv[j];
        }
    }
    for (std::size_t j = 0; j < w; ++j) {
        double inv = 1.0 / std::sqrt(static_cast<double>(lt.var[j]) + spec.bn_eps);
        double mu = static_cast<double>(lt.mean[j]);
        double g = static_cast<double>(bn.gamma[j]);
        double be = static_cast<double>(bn.beta[j]);
        for (std::size_t i = 0; i < m; ++i) {
            double xh = (static_cast<double>(a(i, j)) - mu) * inv;
            lt.xhat(i, j) = static_cast<T>(xh);
            lt.y(i, j) = static_cast<T>(g * static_cast<double>(lt.xhat(i, j)) + be);
        }
    }
}

/* returns d_a */
template <class T>
Mat<T> bn_backward(const Mat<T>& d_y, const LayerTrace<T>& lt, const BnParams<T>& bn,
                   const NetworkSpec& spec, Mode mode, BnGrads<T>& grad) {
    std::size_t m = d_y.rows, w = d_y.cols;
    Mat<T> d_a(m, w);
    for (std::size_t j = 0; j < w; ++j) {
        double dgamma = 0.0, dbeta = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double dy = static_cast<double>(d_y(i, j));
            dgamma += dy * static_cast<double>(lt.xhat(i, j));
            dbeta += dy;
        }
        grad.gamma[j] = static_cast<T>(dgamma);
        grad.beta[j] = static_cast<T>(dbeta);
        double g = static_cast<double>(bn.gamma[j]);
        double inv = 1.0 / std::sqrt(static_cast<double>(lt.var[j]) + spec.bn_eps);
        if (mode == Mode::Eval) {
            for (std::size_t i = 0; i < m; ++i)
                d_a(i, j) = static_cast<T>(static_cast<double>(d_y(i, j)) * g * inv);
        } else {
            double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double dxh = static_cast<double>(d_y(i, j)) * g;
                sum_dxhat += dxh;
                sum_dxhat_xhat += dxh * static_cast<double>(lt.xhat(i, j));
            }
            double invm = 1.0 / static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i) {
                double dxh = static_cast<double>(d_y(i, j)) * g;
                double da = inv * (dxh - sum_dxhat * invm -
                                   static_cast<double>(lt.xhat(i, j)) * sum_dxhat_xhat * invm);
                d_a(i, j) = static_cast<T>(da);
            }
        }
    }
    return d_a;
}

template <class T>
void leaky_forward(const Mat<T>& y, double slope, Mat<T>& h) {
    h = Mat<T>(y.rows, y.cols);
    for (std::size_t i = 0; i < y.size(); ++i) {
        T v = y.data()[i];
        h.data()[i] = v >= T(0) ? v : static_cast<T>(slope * static_cast<double>(v));
    }
}

template <class T>
Mat<T> leaky_backward(const Mat<T>& d_h, const Mat<T>& y, double slope) {
    Mat<T> d_y(y.rows, y.cols);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double dh = static_cast<double>(d_h.data()[i]);
        d_y.data()[i] = static_cast<T>(y.data()[i] >= T(0) ? dh : slope * dh);
    }
    return d_y;
}

double softplus(double a) {
    if (a > 30.0) return a;
    if (a < -30.0) return std::exp(a);
    return std::log1p(std::exp(a));
}

double logistic(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    double e = std::exp(a);
    return e / (1.0 + e);
}

template <class T>
void layer_stack_forward(VaeParams<T>& params, std::vector<Affine<T>>& aff,
                         std::vector<BnParams<T>>& bns, const Mat<T>& input, Mode mode,
                         Rng& rng, const char* stack, std::vector<LayerTrace<T>>& out) {
    const NetworkSpec& spec = params.spec;
    const Mat<T>* cur = &input;
    out.resize(aff.size());
    for (std::size_t li = 0; li < aff.size(); ++li) {
        LayerTrace<T>& lt = out[li];
        std::string name = std::string(stack) + " layer " + std::to_string(li + 1);
        affine_forward(*cur, aff[li], lt.a);
        check_finite(lt.a, (name + " affine").c_str());
        bn_forward(lt.a, bns[li], spec, mode, lt);
        check_finite(lt.y, (name + " batchnorm").c_str());
        leaky_forward(lt.y, spec.leaky_slope, lt.h);
        if (mode == Mode::Train) {
            lt.mask = Mat<T>(lt.h.rows, lt.h.cols);
            double keep_scale = 1.0 / (1.0 - spec.dropout_p);
            for (std::size_t i = 0; i < lt.mask.rows; ++i)
                for (std::size_t j = 0; j < lt.mask.cols; ++j)
                    lt.mask(i, j) = rng.uniform() < spec.dropout_p
                                        ? T(0)
                                        : static_cast<T>(keep_scale);
            lt.hd = Mat<T>(lt.h.rows, lt.h.cols);
            for (std::size_t i = 0; i < lt.h.size(); ++i)
                lt.hd.data()[i] = static_cast<T>(static_cast<double>(lt.h.data()[i]) *
                                                 static_cast<double>(lt.mask.data()[i]));
        } else {
            lt.hd = lt.h;
        }
        cur = &lt.hd;
    }
}

} // namespace

template <class T>
VaeParams<T> make_params(const NetworkSpec& spec) {
    spec.validate();
    VaeParams<T> p;
    p.spec = spec;
    auto zero_affine = [](int out_dim, int in_dim) {
        Affine<T> a;
        a.W = Mat<T>(static_cast<std::size_t>(out_dim), static_cast<std::size_t>(in_dim));
        a.b.assign(static_cast<std::size_t>(out_dim), T(0));
        return a;
    };
    int in = spec.input_dim();
    for (int h : spec.encoder_hidden) {
        p.enc.push_back(zero_affine(h, in));
        p.enc_bn.push_back(make_bn<T>(h));
        in = h;
    }
    p.mu = zero_affine(spec.latent_dim, in);
    p.sig = zero_affine(spec.latent_dim, in);
    in = spec.latent_dim;
    for (int h : spec.decoder_hidden()) {
        p.dec.push_back(zero_affine(h, in));
        p.dec_bn.push_back(make_bn<T>(h));
        in = h;
    }
    p.split = zero_affine(spec.s + spec.tnf_dim, in);
    return p;
}

template <class T>
VaeParams<T> init_params(const NetworkSpec& spec, Rng& rng) {
    spec.validate();
    VaeParams<T> p;
    p.spec = spec;
    int in = spec.input_dim();
    for (int h : spec.encoder_hidden) {
        p.enc.push_back(make_affine<T>(h, in, rng));
        p.enc_bn.push_back(make_bn<T>(h));
        in = h;
    }
    p.mu = make_affine<T>(spec.latent_dim, in, rng);
    p.sig = make_affine<T>(spec.latent_dim, in, rng);
    in = spec.latent_dim;
    for (int h : spec.decoder_hidden()) {
        p.dec.push_back(make_affine<T>(h, in, rng));
        p.dec_bn.push_back(make_bn<T>(h));
        in = h;
    }
    p.split = make_affine<T>(spec.s + spec.tnf_dim, in, rng);
    return p;
}

template <class T>
ForwardTrace<T> forward(VaeParams<T>& params, const Mat<T>& batch, Mode mode, Rng& rng) {
    const NetworkSpec& spec = params.spec;
    if (batch.cols != static_cast<std::size_t>(spec.input_dim()))
        throw input_error("forward: batch width does not match network input");
    if (batch.rows == 0) throw input_error("forward: empty batch");
    if (mode == Mode::Train && batch.rows < 2)
        throw input_error("forward: Train mode needs at least 2 rows for batch norm");
    std::size_t m = batch.rows;
    std::size_t latent = static_cast<std::size_t>(spec.latent_dim);

    ForwardTrace<T> tr;
    tr.mode = mode;
    tr.input = batch;
    tr.z = Mat<T>(m, latent);
    if (mode == Mode::Train)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < latent; ++j) tr.z(i, j) = static_cast<T>(rng.normal());

    layer_stack_forward(params, params.enc, params.enc_bn, batch, mode, rng, "encoder",
                        tr.enc);
    const Mat<T>& henc = tr.enc.empty() ? batch : tr.enc.back().hd;

    affine_forward(henc, params.mu, tr.mu);
    check_finite(tr.mu, "mu head");
    affine_forward(henc, params.sig, tr.a_sig);
    check_finite(tr.a_sig, "sigma head");
    tr.sigma = Mat<T>(m, latent);
    for (std::size_t i = 0; i < tr.sigma.size(); ++i)
        tr.sigma.data()[i] = static_cast<T>(softplus(static_cast<double>(tr.a_sig.data()[i])));

    tr.l = Mat<T>(m, latent);
    for (std::size_t i = 0; i < tr.l.size(); ++i)
        tr.l.data()[i] = static_cast<T>(
            static_cast<double>(tr.mu.data()[i]) +
            std::sqrt(static_cast<double>(tr.sigma.data()[i])) *
                static_cast<double>(tr.z.data()[i]));

    layer_stack_forward(params, params.dec, params.dec_bn, tr.l, mode, rng, "decoder",
                        tr.dec);
    const Mat<T>& hdec = tr.dec.empty() ? tr.l : tr.dec.back().hd;

    affine_forward(hdec, params.split, tr.out);
    check_finite(tr.out, "output head");

    std::size_t s = static_cast<std::size_t>(spec.s);
    std::size_t tw = static_cast<std::size_t>(spec.tnf_dim);
    tr.A = Mat<T>(m, s);
    tr.Tnf = Mat<T>(m, tw);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = static_cast<double>(tr.out(i, 0));
        for (std::size_t j = 1; j < s; ++j)
            mx = std::max(mx, static_cast<double>(tr.out(i, j)));
        double denom = 0.0;
        for (std::size_t j = 0; j < s; ++j)
            denom += std::exp(static_cast<double>(tr.out(i, j)) - mx);
        for (std::size_t j = 0; j < s; ++j)
            tr.A(i, j) =
                static_cast<T>(std::exp(static_cast<double>(tr.out(i, j)) - mx) / denom);
        for (std::size_t j = 0; j < tw; ++j) tr.Tnf(i, j) = tr.out(i, s + j);
    }
    return tr;
}

namespace {

template <class T>
void check_grad_shape(const Mat<T>& g, std::size_t rows, std::size_t cols, const char* name) {
    if (g.rows == 0) return;
    if (g.rows != rows || g.cols != cols)
        throw input_error(std::string("backward: upstream gradient shape mismatch for ") +
                          name);
}

template <class T>
Mat<T> layer_stack_backward(const VaeParams<T>& params, const std::vector<Affine<T>>& aff,
                            const std::vector<LayerTrace<T>>& trace, const Mat<T>& stack_input,
                            Mode mode, Mat<T> d_out, std::vector<Affine<T>>& gaff,
                            std::vector<BnGrads<T>>& gbn, const std::vector<BnParams<T>>& bns) {
    const NetworkSpec& spec = params.spec;
    for (std::size_t ri = aff.size(); ri-- > 0;) {
        const LayerTrace<T>& lt = trace[ri];
        Mat<T> d_h;
        if (mode == Mode::Train) {
            d_h = Mat<T>(d_out.rows, d_out.cols);
            for (std::size_t i = 0; i < d_out.size(); ++i)
                d_h.data()[i] = static_cast<T>(static_cast<double>(d_out.data()[i]) *
                                               static_cast<double>(lt.mask.data()[i]));
        } else {
            d_h = std::move(d_out);
        }
        Mat<T> d_y = leaky_backward(d_h, lt.y, spec.leaky_slope);
        Mat<T> d_a = bn_backward(d_y, lt, bns[ri], spec, mode, gbn[ri]);
        const Mat<T>& in = ri == 0 ? stack_input : trace[ri - 1].hd;
        d_out = affine_backward(in, aff[ri], d_a, gaff[ri]);
    }
    return d_out;
}

} // namespace

template <class T>
VaeGrads<T> backward(const VaeParams<T>& params, const ForwardTrace<T>& trace,
                     const UpstreamGrads<T>& up) {
    const NetworkSpec& spec = params.spec;
    std::size_t m = trace.input.rows;
    std::size_t s = static_cast<std::size_t>(spec.s);
    std::size_t tw = static_cast<std::size_t>(spec.tnf_dim);
    std::size_t latent = static_cast<std::size_t>(spec.latent_dim);
    const Mat<T>& proj = trace.projection();
    check_grad_shape(up.dA, m, s, "A_out");
    check_grad_shape(up.dT, m, tw, "T_out");
    check_grad_shape(up.dmu, m, latent, "mu");
    check_grad_shape(up.dsigma, m, latent, "sigma");
    check_grad_shape(up.dx, m, proj.cols, "projection");

    VaeGrads<T> g = make_grads<T>(spec);

    // softmax backward for the abundance block, then assemble d(out)
    Mat<T> d_out(m, s + tw);
    if (up.dA.rows) {
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < s; ++j)
                dot += static_cast<double>(up.dA(i, j)) * static_cast<double>(trace.A(i, j));
            for (std::size_t j = 0; j < s; ++j)
                d_out(i, j) = static_cast<T>(static_cast<double>(trace.A(i, j)) *
                                             (static_cast<double>(up.dA(i, j)) - dot));
        }
    }
    if (up.dT.rows)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < tw; ++j) d_out(i, s + j) = up.dT(i, j);

    const Mat<T>& hdec = trace.dec.empty() ? trace.l : trace.dec.back().hd;
    Mat<T> d_hdec = affine_backward(hdec, params.split, d_out, g.split);
    if (up.dx.rows)
        for (std::size_t i = 0; i < d_hdec.size(); ++i)
            d_hdec.data()[i] = static_cast<T>(static_cast<double>(d_hdec.data()[i]) +
                                              static_cast<double>(up.dx.data()[i]));

    Mat<T> d_l = layer_stack_backward(params, params.dec, trace.dec, trace.l, trace.mode,
                                      std::move(d_hdec), g.dec, g.dec_bn, params.dec_bn);

    Mat<T> d_mu(m, latent), d_sigma(m, latent);
    for (std::size_t i = 0; i < d_mu.size(); ++i) {
        double dl = static_cast<double>(d_l.data()[i]);
        double dmu = dl + (up.dmu.rows ? static_cast<double>(up.dmu.data()[i]) : 0.0);
        double sig = static_cast<double>(trace.sigma.data()[i]);
        double z = static_cast<double>(trace.z.data()[i]);
        double dsig = (up.dsigma.rows ? static_cast<double>(up.dsigma.data()[i]) : 0.0);
        if (z != 0.0) dsig += dl * z / (2.0 * std::sqrt(sig));
        d_mu.data()[i] = static_cast<T>(dmu);
        d_sigma.data()[i] = static_cast<T>(dsig);
    }

    Mat<T> d_a_sig(m, latent);
    for (std::size_t i = 0; i < d_a_sig.size(); ++i)
        d_a_sig.data()[i] = static_cast<T>(
            static_cast<double>(d_sigma.data()[i]) *
            logistic(static_cast<double>(trace.a_sig.data()[i])));

    const Mat<T>& henc = trace.enc.empty() ? trace.input : trace.enc.back().hd;
    Mat<T> d_henc = affine_backward(henc, params.mu, d_mu, g.mu);
    Mat<T> d_henc_sig = affine_backward(henc, params.sig, d_a_sig, g.sig);
    for (std::size_t i = 0; i < d_henc.size(); ++i)
        d_henc.data()[i] = static_cast<T>(static_cast<double>(d_henc.data()[i]) +
                                          static_cast<double>(d_henc_sig.data()[i]));

    layer_stack_backward(params, params.enc, trace.enc, trace.input, trace.mode,
                         std::move(d_henc), g.enc, g.enc_bn, params.enc_bn);
    return g;
}

template <class T>
Mat<T> encode(const VaeParams<T>& params, const Mat<T>& batch) {
    const NetworkSpec& spec = params.spec;
    if (batch.cols != static_cast<std::size_t>(spec.input_dim()))
        throw input_error("encode: batch width does not match network input");
    Mat<T> cur = batch;
    for (std::size_t li = 0; li < params.enc.size(); ++li) {
        Mat<T> a;
        affine_forward(cur, params.enc[li], a);
        const BnParams<T>& bn = params.enc_bn[li];
        for (std::size_t j = 0; j < a.cols; ++j) {
            double inv = 1.0 / std::sqrt(static_cast<double>(bn.rv[j]) + spec.bn_eps);
            double mu = static_cast<double>(bn.rm[j]);
            double gm = static_cast<double>(bn.gamma[j]);
            double be = static_cast<double>(bn.beta[j]);
            for (std::size_t i = 0; i < a.rows; ++i) {
                double y = gm * (static_cast<double>(a(i, j)) - mu) * inv + be;
                a(i, j) = static_cast<T>(y >= 0.0 ? y : spec.leaky_slope * y);
            }
        }
        cur = std::move(a);
    }
    Mat<T> mu;
    affine_forward(cur, params.mu, mu);
    check_finite(mu, "encode output");
    return mu;
}

template <class T>
VaeGrads<T> make_grads(const NetworkSpec& spec) {
    VaeGrads<T> g;
    auto zero_affine = [](int out_dim, int in_dim) {
        Affine<T> a;
        a.W = Mat<T>(static_cast<std::size_t>(out_dim), static_cast<std::size_t>(in_dim));
        a.b.assign(static_cast<std::size_t>(out_dim), T(0));
        return a;
    };
    int in = spec.input_dim();
    for (int h : spec.encoder_hidden) {
        g.enc.push_back(zero_affine(h, in));
        g.enc_bn.push_back(BnGrads<T>{std::vector<T>(static_cast<std::size_t>(h), T(0)),
                                      std::vector<T>(static_cast<std::size_t>(h), T(0))});
        in = h;
    }
    g.mu = zero_affine(spec.latent_dim, in);
    g.sig = zero_affine(spec.latent_dim, in);
    in = spec.latent_dim;
    for (int h : spec.decoder_hidden()) {
        g.dec.push_back(zero_affine(h, in));
        g.dec_bn.push_back(BnGrads<T>{std::vector<T>(static_cast<std::size_t>(h), T(0)),
                                      std::vector<T>(static_cast<std::size_t>(h), T(0))});
        in = h;
    }
    g.split = zero_affine(spec.s + spec.tnf_dim, in);
    return g;
}

template <class T>
std::vector<ParamView<T>> param_views(VaeParams<T>& p) {
    std::vector<ParamView<T>> v;
    auto add = [&v](std::vector<T>& x) { v.push_back({x.data(), x.size()}); };
    auto addm = [&v](Mat<T>& m) { v.push_back({m.data(), m.size()}); };
    for (std::size_t i = 0; i < p.enc.size(); ++i) {
        addm(p.enc[i].W);
        add(p.enc[i].b);
        add(p.enc_bn[i].gamma);
        add(p.enc_bn[i].beta);
    }
    addm(p.mu.W);
    add(p.mu.b);
    addm(p.sig.W);
    add(p.sig.b);
    for (std::size_t i = 0; i < p.dec.size(); ++i) {
        addm(p.dec[i].W);
        add(p.dec[i].b);
        add(p.dec_bn[i].gamma);
        add(p.dec_bn[i].beta);
    }
    addm(p.split.W);
    add(p.split.b);
    return v;
}

template <class T>
std::vector<ParamView<T>> running_views(VaeParams<T>& p) {
    std::vector<ParamView<T>> v;
    for (std::size_t i = 0; i < p.enc_bn.size(); ++i) {
        v.push_back({p.enc_bn[i].rm.data(), p.enc_bn[i].rm.size()});
        v.push_back({p.enc_bn[i].rv.data(), p.enc_bn[i].rv.size()});
    }
    for (std::size_t i = 0; i < p.dec_bn.size(); ++i) {
        v.push_back({p.dec_bn[i].rm.data(), p.dec_bn[i].rm.size()});
        v.push_back({p.dec_bn[i].rv.data(), p.dec_bn[i].rv.size()});
    }
    return v;
}

template <class T>
std::vector<ParamView<T>> grad_views(VaeGrads<T>& g) {
    std::vector<ParamView<T>> v;
    auto add = [&v](std::vector<T>& x) { v.push_back({x.data(), x.size()}); };
    auto addm = [&v](Mat<T>& m) { v.push_back({m.data(), m.size()}); };
    for (std::size_t i = 0; i < g.enc.size(); ++i) {
        addm(g.enc[i].W);
        add(g.enc[i].b);
        add(g.enc_bn[i].gamma);
        add(g.enc_bn[i].beta);
    }
    addm(g.mu.W);
    add(g.mu.b);
    addm(g.sig.W);
    add(g.sig.b);
    for (std::size_t i = 0; i < g.dec.size(); ++i) {
        addm(g.dec[i].W);
        add(g.dec[i].b);
        add(g.dec_bn[i].gamma);
        add(g.dec_bn[i].beta);
    }
    addm(g.split.W);
    add(g.split.b);
    return v;
}

std::size_t param_count(const NetworkSpec& spec) {
    std::size_t total = 0;
    auto affine = [&total](int out_dim, int in_dim) {
        total += static_cast<std::size_t>(out_dim) * static_cast<std::size_t>(in_dim);
        total += static_cast<std::size_t>(out_dim);
    };
    int in = spec.input_dim();
    for (int h : spec.encoder_hidden) {
        affine(h, in);
        total += 2 * static_cast<std::size_t>(h);
        in = h;
    }
    affine(spec.latent_dim, in);
    affine(spec.latent_dim, in);
    in = spec.latent_dim;
    for (int h : spec.decoder_hidden()) {
        affine(h, in);
        total += 2 * static_cast<std::size_t>(h);
        in = h;
    }
    affine(spec.s + spec.tnf_dim, in);
    return total;
}

#define CLMB_NN_INSTANTIATE(T)                                                            \
    template VaeParams<T> make_params<T>(const NetworkSpec&);                             \
    template VaeParams<T> init_params<T>(const NetworkSpec&, Rng&);                       \
    template ForwardTrace<T> forward<T>(VaeParams<T>&, const Mat<T>&, Mode, Rng&);        \
    template VaeGrads<T> backward<T>(const VaeParams<T>&, const ForwardTrace<T>&,         \
                                     const UpstreamGrads<T>&);                            \
    template Mat<T> encode<T>(const VaeParams<T>&, const Mat<T>&);                        \
    template VaeGrads<T> make_grads<T>(const NetworkSpec&);                               \
    template std::vector<ParamView<T>> param_views<T>(VaeParams<T>&);                     \
    template std::vector<ParamView<T>> running_views<T>(VaeParams<T>&);                   \
    template std::vector<ParamView<T>> grad_views<T>(VaeGrads<T>&);

CLMB_NN_INSTANTIATE(float)
CLMB_NN_INSTANTIATE(double)

} // namespace clmb
