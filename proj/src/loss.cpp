#include "clmb/loss.hpp"

#include <cmath>
#include <vector>

#include "clmb/common.hpp"

namespace clmb {

LossWeights LossWeights::make(int s, int latent_dim) {
    if (s < 1) throw input_error("loss weights: sample count must be >= 1");
    if (latent_dim < 1) throw input_error("loss weights: latent_dim must be >= 1");
    LossWeights w;
    w.s = s;
    w.latent_dim = latent_dim;
    w.w_A = s > 1 ? 0.85 / std::log(static_cast<double>(s)) : 0.85;
    w.w_T = 0.15 / 103.0;
    return w;
}

template <class T>
double reconstruction_loss(const Mat<T>& A_out, const Mat<T>& T_out, const Mat<T>& A_in,
                           const Mat<T>& T_in, const LossWeights& w, Mat<T>* dA, Mat<T>* dT) {
    if (A_out.rows != T_out.rows || A_in.rows != T_in.rows)
        throw input_error("reconstruction: abundance and composition row counts differ");
    if (A_out.rows != 2 * A_in.rows)
        throw input_error("reconstruction: output rows must be twice the target rows");
    if (A_out.cols != A_in.cols || T_out.cols != T_in.cols)
        throw input_error("reconstruction: output and target widths differ");

    std::size_t m = A_out.rows;
    std::size_t s = A_out.cols;
    std::size_t tw = T_out.cols;
    if (dA) *dA = Mat<T>(m, s);
    if (dT) *dT = Mat<T>(m, tw);

    double ce = 0.0, sse = 0.0;
    const bool single_sample = w.s == 1;
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t t = k / 2;
        for (std::size_t j = 0; j < s; ++j) {
            double out = static_cast<double>(A_out(k, j));
            double in = static_cast<double>(A_in(t, j));
            if (out < 0.0)
                throw input_error("reconstruction: negative abundance output entry");
            if (single_sample) {
                double diff = out - in;
                ce += diff * diff;
                if (dA) (*dA)(k, j) = static_cast<T>(2.0 * w.w_A * diff);
            } else {
                ce -= in * std::log(out + 1e-9);
                if (dA) (*dA)(k, j) = static_cast<T>(-w.w_A * in / (out + 1e-9));
            }
        }
        for (std::size_t j = 0; j < tw; ++j) {
            double diff = static_cast<double>(T_out(k, j)) - static_cast<double>(T_in(t, j));
            sse += diff * diff;
            if (dT) (*dT)(k, j) = static_cast<T>(2.0 * w.w_T * diff);
        }
    }
    return w.w_A * ce + w.w_T * sse;
}

template <class T>
double kl_loss(const Mat<T>& mu, const Mat<T>& sigma, Mat<T>* dmu, Mat<T>* dsigma) {
    if (mu.rows != sigma.rows || mu.cols != sigma.cols)
        throw input_error("kl: mu and sigma shapes differ");
    if (dmu) *dmu = Mat<T>(mu.rows, mu.cols);
    if (dsigma) *dsigma = Mat<T>(mu.rows, mu.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double m = static_cast<double>(mu.data()[i]);
        double v = static_cast<double>(sigma.data()[i]);
        if (v <= 0.0) throw numeric_error("kl: sigma must be positive");
        total -= 0.5 * (1.0 + std::log(v) - m * m - v);
        if (dmu) dmu->data()[i] = static_cast<T>(m);
        if (dsigma) dsigma->data()[i] = static_cast<T>(-0.5 * (1.0 / v - 1.0));
    }
    return total;
}

namespace {

/* cosine similarity matrix and row norms, in double */
template <class T>
void cosine_matrix(const Mat<T>& X, std::vector<double>& norms, std::vector<double>& S) {
    std::size_t n = X.rows, d = X.cols;
    norms.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double v = static_cast<double>(X(i, j));
            acc += v * v;
        }
        norms[i] = std::sqrt(acc);
        if (norms[i] == 0.0)
            throw numeric_error("contrastive: zero-norm projection row");
    }
    S.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                dot += static_cast<double>(X(i, k)) * static_cast<double>(X(j, k));
            double c = dot / (norms[i] * norms[j]);
            S[i * n + j] = c;
            S[j * n + i] = c;
        }
    }
}

} // namespace

template <class T>
double ntxent_pair(std::size_t i, std::size_t j, const Mat<T>& X, double tau) {
    if (i == j) throw input_error("ntxent: i and j must differ");
    if (i >= X.rows || j >= X.rows) throw input_error("ntxent: row index out of range");
    std::vector<double> norms, S;
    cosine_matrix(X, norms, S);
    std::size_t n = X.rows;
    double mx = -1.0 / 0.0;
    for (std::size_t s = 0; s < n; ++s)
        if (s != i) mx = std::max(mx, S[i * n + s] / tau);
    double z = 0.0;
    for (std::size_t s = 0; s < n; ++s)
        if (s != i) z += std::exp(S[i * n + s] / tau - mx);
    return -(S[i * n + j] / tau - mx - std::log(z));
}

template <class T>
double contrastive_loss(const Mat<T>& X, double tau, Mat<T>* dX) {
    std::size_t n = X.rows;
    if (n < 2 || n % 2 != 0)
        throw input_error("contrastive: row count must be even and >= 2");
    if (tau <= 0.0) throw input_error("contrastive: tau must be positive");
    std::vector<double> norms, S;
    cosine_matrix(X, norms, S);

    double total = 0.0;
    std::vector<double> dS(dX ? n * n : 0, 0.0);
    double inv2n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = i ^ 1;
        double mx = -1.0 / 0.0;
        for (std::size_t s = 0; s < n; ++s)
            if (s != i) mx = std::max(mx, S[i * n + s] / tau);
        double z = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            if (s != i) z += std::exp(S[i * n + s] / tau - mx);
        total += -(S[i * n + p] / tau - mx - std::log(z));
        if (dX) {
            for (std::size_t s = 0; s < n; ++s) {
                if (s == i) continue;
                double soft = std::exp(S[i * n + s] / tau - mx) / z;
                double delta = s == p ? 1.0 : 0.0;
                dS[i * n + s] += inv2n * (soft - delta) / tau;
            }
        }
    }
    total *= inv2n;

    if (dX) {
        *dX = Mat<T>(n, X.cols);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double g = dS[i * n + j] + dS[j * n + i];
                if (g == 0.0) continue;
                double inv_ni = 1.0 / norms[i];
                double inv_nj = 1.0 / norms[j];
                double sij = S[i * n + j];
                for (std::size_t k = 0; k < X.cols; ++k) {
                    double term = (static_cast<double>(X(j, k)) * inv_nj -
                                   sij * static_cast<double>(X(i, k)) * inv_ni) *
                                  inv_ni;
                    (*dX)(i, k) = static_cast<T>(static_cast<double>((*dX)(i, k)) + g * term);
                }
            }
        }
    }
    return total;
}

LossBreakdown combine(double L1, double L2, double L3, LossWeights& w,
                      bool calibration_phase) {
    if (calibration_phase && !w.calibrated) {
        if (L2 == 0.0 || L3 == 0.0)
            throw numeric_error("loss calibration hit a degenerate batch (zero L2 or L3)");
        w.L1_0 = L1;
        w.L2_0 = L2;
        w.L3_0 = L3;
        w.w2 = (w.L1_0 / w.L2_0) / (2e5 * static_cast<double>(w.latent_dim));
        w.w3 = 1.35 * w.L1_0 / w.L3_0;
        w.calibrated = true;
    }
    LossBreakdown b;
    b.L1 = L1;
    b.L2 = L2;
    b.L3 = L3;
    b.total = L1 + w.w2 * L2 + w.w3 * L3;
    return b;
}

#define CLMB_LOSS_INSTANTIATE(T)                                                           \
    template double reconstruction_loss<T>(const Mat<T>&, const Mat<T>&, const Mat<T>&,    \
                                           const Mat<T>&, const LossWeights&, Mat<T>*,     \
                                           Mat<T>*);                                       \
    template double kl_loss<T>(const Mat<T>&, const Mat<T>&, Mat<T>*, Mat<T>*);            \
    template double ntxent_pair<T>(std::size_t, std::size_t, const Mat<T>&, double);       \
    template double contrastive_loss<T>(const Mat<T>&, double, Mat<T>*);

CLMB_LOSS_INSTANTIATE(float)
CLMB_LOSS_INSTANTIATE(double)

} // namespace clmb
