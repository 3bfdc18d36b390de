#ifndef CLMB_NN_HPP
#define CLMB_NN_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "clmb/matrix.hpp"
#include "clmb/rng.hpp"

namespace clmb {

struct NetworkSpec {
    int s = 0;
    int tnf_dim = 103;
    std::vector<int> encoder_hidden = {512, 512};
    int latent_dim = 32;
    double dropout_p = 0.2;
    double leaky_slope = 0.01;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;

    int input_dim() const { return s + tnf_dim; }
    std::vector<int> decoder_hidden() const {
        return {encoder_hidden.rbegin(), encoder_hidden.rend()};
    }
    void validate() const;
};

template <class T>
struct Affine {
    Mat<T> W; // out x in
    std::vector<T> b;
};

template <class T>
struct BnParams {
    std::vector<T> gamma, beta, rm, rv;
};

/* Trainable parameters plus batch-norm running statistics. Running stats
   mutate during Train forwards; everything else only through updates. */
template <class T>
struct VaeParams {
    NetworkSpec spec;
    std::vector<Affine<T>> enc;
    std::vector<BnParams<T>> enc_bn;
    Affine<T> mu, sig;
    std::vector<Affine<T>> dec;
    std::vector<BnParams<T>> dec_bn;
    Affine<T> split;
};

template <class T>
struct BnGrads {
    std::vector<T> gamma, beta;
};

template <class T>
struct VaeGrads {
    std::vector<Affine<T>> enc;
    std::vector<BnGrads<T>> enc_bn;
    Affine<T> mu, sig;
    std::vector<Affine<T>> dec;
    std::vector<BnGrads<T>> dec_bn;
    Affine<T> split;
};

enum class Mode { Train, Eval };

template <class T>
struct LayerTrace {
    Mat<T> a;    // affine output
    Mat<T> xhat; // batch-norm normalized
    Mat<T> y;    // batch-norm output
    Mat<T> h;    // after leaky relu
    Mat<T> hd;   // after dropout (Train), == h in Eval
    Mat<T> mask; // dropout keep/scale factors (Train only)
    std::vector<T> mean, var; // statistics used for normalization
};

template <class T>
struct ForwardTrace {
    Mode mode = Mode::Train;
    Mat<T> input;
    std::vector<LayerTrace<T>> enc;
    Mat<T> mu, a_sig, sigma, z, l;
    std::vector<LayerTrace<T>> dec;
    Mat<T> out; // split affine output, pre-softmax
    Mat<T> A, Tnf;

    /* contrastive projection: last decoder hidden activation (the f_s input) */
    const Mat<T>& projection() const { return dec.empty() ? l : dec.back().hd; }
};

/* Upstream gradients for backward; a member with zero rows stands for zero.
   dx is the gradient on the projection rows. */
template <class T>
struct UpstreamGrads {
    Mat<T> dA, dT, dmu, dsigma, dx;
};

/* Allocated with zero weights and default batch-norm state (gamma 1, rv 1). */
template <class T>
VaeParams<T> make_params(const NetworkSpec& spec);

template <class T>
VaeParams<T> init_params(const NetworkSpec& spec, Rng& rng);

/* Train mode draws, in order: z row-major, encoder dropout masks per layer
   row-major, decoder dropout masks. Eval consumes no randomness. Train mode
   updates the running statistics in `params`. */
template <class T>
ForwardTrace<T> forward(VaeParams<T>& params, const Mat<T>& batch, Mode mode, Rng& rng);

template <class T>
VaeGrads<T> backward(const VaeParams<T>& params, const ForwardTrace<T>& trace,
                     const UpstreamGrads<T>& up);

/* Eval encoder + mu head only; deterministic, accepts single rows. */
template <class T>
Mat<T> encode(const VaeParams<T>& params, const Mat<T>& batch);

template <class T>
VaeGrads<T> make_grads(const NetworkSpec& spec);

template <class T>
struct ParamView {
    T* data;
    std::size_t n;
};

/* Flat enumeration of trainable parameters in declaration order:
   per encoder layer W, b, gamma, beta; mu W, b; sig W, b; per decoder layer
   W, b, gamma, beta; split W, b. grad_views matches element for element. */
template <class T>
std::vector<ParamView<T>> param_views(VaeParams<T>& p);
template <class T>
std::vector<ParamView<T>> running_views(VaeParams<T>& p);
template <class T>
std::vector<ParamView<T>> grad_views(VaeGrads<T>& g);

std::size_t param_count(const NetworkSpec& spec);

} // namespace clmb

#endif
