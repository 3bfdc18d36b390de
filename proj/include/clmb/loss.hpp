#ifndef CLMB_LOSS_HPP
#define CLMB_LOSS_HPP

#include <cstddef>

#include "clmb/matrix.hpp"

namespace clmb {

/* Static weights plus the one-shot calibration state. w2/w3 start at 1 and
   are frozen from the first qualifying minibatch's loss values. */
struct LossWeights {
    double w_A = 0.0;
    double w_T = 0.0;
    double tau = 0.1;
    double w2 = 1.0;
    double w3 = 1.0;
    bool calibrated = false;
    double L1_0 = 1.0;
    double L2_0 = 1.0;
    double L3_0 = 1.0;
    int s = 0;
    int latent_dim = 0;

    static LossWeights make(int s, int latent_dim);
};

struct LossBreakdown {
    double L1 = 0.0, L2 = 0.0, L3 = 0.0, total = 0.0;
};

/* Denoising reconstruction: output row k reconstructs clean target row k/2,
   so outputs must have exactly twice the target rows. Cross-entropy on the
   abundance block (SSE when s == 1), SSE on the composition block. Gradient
   outputs are optional. */
template <class T>
double reconstruction_loss(const Mat<T>& A_out, const Mat<T>& T_out, const Mat<T>& A_in,
                           const Mat<T>& T_in, const LossWeights& w, Mat<T>* dA, Mat<T>* dT);

/* L2 = sum of -1/2 (1 + ln sigma - mu^2 - sigma), sigma holding variances. */
template <class T>
double kl_loss(const Mat<T>& mu, const Mat<T>& sigma, Mat<T>* dmu, Mat<T>* dsigma);

/* Directed NT-Xent term for one ordered pair of rows. */
template <class T>
double ntxent_pair(std::size_t i, std::size_t j, const Mat<T>& X, double tau);

/* L3 over interleaved positive pairs (2k, 2k+1), averaged over all 2N
   directed terms; gradients through cosine and the stabilized log-sum-exp. */
template <class T>
double contrastive_loss(const Mat<T>& X, double tau, Mat<T>* dX);

/* Applies calibration on the first call with calibration_phase set (then
   freezes w2/w3) and forms total = L1 + w2 L2 + w3 L3. */
LossBreakdown combine(double L1, double L2, double L3, LossWeights& w,
                      bool calibration_phase);

} // namespace clmb

#endif
