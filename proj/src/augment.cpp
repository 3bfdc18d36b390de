#include "clmb/augment.hpp"

#include <cmath>

#include "clmb/common.hpp"

namespace clmb {

const char* form_name(AugForm f) {
    switch (f) {
        case AugForm::Gaussian: return "gaussian";
        case AugForm::Mask: return "mask";
        case AugForm::Shift: return "shift";
    }
    return "?";
}

std::string form_pair_name(FormPair p) {
    auto letter = [](AugForm f) {
        switch (f) {
            case AugForm::Gaussian: return 'G';
            case AugForm::Mask: return 'M';
            case AugForm::Shift: return 'S';
        }
        return '?';
    };
    return std::string{letter(p.first), letter(p.second)};
}

FeatureStats batch_stats(const Mat<float>& batch) {
    FeatureStats st;
    st.mean.assign(batch.cols, 0.0);
    st.var.assign(batch.cols, 0.0);
    if (batch.rows == 0) return st;
    double inv_n = 1.0 / static_cast<double>(batch.rows);
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const float* r = batch.row(i);
        for (std::size_t j = 0; j < batch.cols; ++j) st.mean[j] += r[j];
    }
    for (std::size_t j = 0; j < batch.cols; ++j) st.mean[j] *= inv_n;
    for (std::size_t i = 0; i < batch.rows; ++i) {
        const float* r = batch.row(i);
        for (std::size_t j = 0; j < batch.cols; ++j) {
            double t = r[j] - st.mean[j];
            st.var[j] += t * t;
        }
    }
    for (std::size_t j = 0; j < batch.cols; ++j) {
        st.var[j] *= inv_n;
        if (st.var[j] < 0.0) st.var[j] = 0.0;
    }
    return st;
}

void gaussian_noise(const double* in, double* out, std::size_t d,
                    const FeatureStats& stats, const AugmentConfig& cfg, Rng& rng) {
    for (std::size_t j = 0; j < d; ++j) {
        double eps = rng.normal() * std::sqrt(stats.var[j]);
        double scale = cfg.gaussian_literal_mu ? cfg.gaussian_scale * stats.mean[j]
                                               : cfg.gaussian_scale;
        out[j] = in[j] + scale * eps;
    }
}

void random_mask(const double* in, double* out, std::size_t d, double p, Rng& rng) {
    for (std::size_t j = 0; j < d; ++j)
        out[j] = rng.uniform() < p ? 0.0 : in[j];
}

void random_shift(const double* in, double* out, std::size_t d, double fraction, Rng& rng) {
    for (std::size_t j = 0; j < d; ++j) out[j] = in[j];
    if (d < 2) return;
    std::size_t pairs = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(d)));
    if (pairs < 1) pairs = 1;
    if (2 * pairs > d) pairs = d / 2;
    std::vector<std::size_t> idx = rng.choose(d, 2 * pairs);
    for (std::size_t t = 0; t < pairs; ++t) {
        std::size_t i = idx[2 * t];
        std::size_t j = idx[2 * t + 1];
        double old = out[i];
        out[i] = 0.9 * old;
        // transfer the exact remainder so the pair sum is preserved in double
        out[j] += old - out[i];
    }
}

void apply_form(AugForm f, const double* in, double* out, std::size_t d,
                const FeatureStats& stats, const AugmentConfig& cfg, Rng& rng) {
    switch (f) {
        case AugForm::Gaussian: gaussian_noise(in, out, d, stats, cfg, rng); return;
        case AugForm::Mask: random_mask(in, out, d, cfg.mask_p, rng); return;
        case AugForm::Shift: random_shift(in, out, d, cfg.shift_fraction, rng); return;
    }
}

FormPair sample_form_pair(Rng& rng) {
    static constexpr AugForm table[6][2] = {
        {AugForm::Gaussian, AugForm::Gaussian}, {AugForm::Gaussian, AugForm::Mask},
        {AugForm::Gaussian, AugForm::Shift},    {AugForm::Mask, AugForm::Mask},
        {AugForm::Mask, AugForm::Shift},        {AugForm::Shift, AugForm::Shift}};
    std::uint64_t k = rng.uniform_below(6);
    return FormPair{table[k][0], table[k][1]};
}

Mat<float> augment_batch(const Mat<float>& batch, FormPair pair,
                         const AugmentConfig& cfg,
                         std::uint64_t aug_base, std::uint64_t epoch,
                         std::uint64_t row_offset) {
    FeatureStats stats = batch_stats(batch);
    std::size_t n = batch.rows;
    std::size_t d = batch.cols;
    Mat<float> out(2 * n, d);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel_enabled())
#endif
    for (long long r = 0; r < static_cast<long long>(2 * n); ++r) {
        std::size_t k = static_cast<std::size_t>(r) / 2;
        std::uint64_t which = static_cast<std::uint64_t>(r) % 2;
        Rng rng(derive(aug_base, epoch, row_offset + k, which));
        AugForm form = which == 0 ? pair.first : pair.second;
        std::vector<double> in(d), dist(d);
        const float* src = batch.row(k);
        for (std::size_t j = 0; j < d; ++j) in[j] = src[j];
        apply_form(form, in.data(), dist.data(), d, stats, cfg, rng);
        float* dst = out.row(static_cast<std::size_t>(r));
        for (std::size_t j = 0; j < d; ++j) dst[j] = static_cast<float>(dist[j]);
    }
    return out;
}

} // namespace clmb
