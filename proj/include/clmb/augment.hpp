#ifndef CLMB_AUGMENT_HPP
#define CLMB_AUGMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clmb/matrix.hpp"
#include "clmb/rng.hpp"

namespace clmb {

enum class AugForm { Gaussian, Mask, Shift };

struct FormPair {
    AugForm first;
    AugForm second;
};

const char* form_name(AugForm f);
std::string form_pair_name(FormPair p);

struct AugmentConfig {
    double gaussian_scale = 0.15;
    double mask_p = 0.01;
    double shift_fraction = 0.01;
    bool gaussian_literal_mu = false;
};

/* Per-dimension minibatch statistics (population variance). */
struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> var;
};

FeatureStats batch_stats(const Mat<float>& batch);

/* Row operators work in double; the batch wrapper casts to float at the end.
   `out` must not alias `in`. */
void gaussian_noise(const double* in, double* out, std::size_t d,
                    const FeatureStats& stats, const AugmentConfig& cfg, Rng& rng);
void random_mask(const double* in, double* out, std::size_t d, double p, Rng& rng);
void random_shift(const double* in, double* out, std::size_t d, double fraction, Rng& rng);
void apply_form(AugForm f, const double* in, double* out, std::size_t d,
                const FeatureStats& stats, const AugmentConfig& cfg, Rng& rng);

/* Uniform over the six unordered combinations, presented as ordered pairs
   GG GM GS MM MS SS. */
FormPair sample_form_pair(Rng& rng);

/* N input rows -> 2N output rows; rows (2k, 2k+1) are the two distortions of
   input row k. Each output row draws from its own substream keyed on
   (epoch, row_offset + k, which), so results do not depend on thread count
   and resuming mid-training replays identical noise. */
Mat<float> augment_batch(const Mat<float>& batch, FormPair pair,
                         const AugmentConfig& cfg,
                         std::uint64_t aug_base, std::uint64_t epoch,
                         std::uint64_t row_offset);

} // namespace clmb

#endif
