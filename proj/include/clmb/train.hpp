#ifndef CLMB_TRAIN_HPP
#define CLMB_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "clmb/augment.hpp"
#include "clmb/features.hpp"
#include "clmb/loss.hpp"
#include "clmb/nn.hpp"

namespace clmb {

struct TrainConfig {
    int batch_size = 4096;
    int epochs = 600;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    AugmentConfig aug;
    bool contrast_on_split = false;

    void validate() const;
};

/* Flat moment accumulators over param_views order. */
struct AdamState {
    std::vector<float> m, v;
    std::int64_t step = 0;
};

void adam_step(std::vector<ParamView<float>>& params,
               std::vector<ParamView<float>>& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps);

struct EpochLoss {
    int epoch = 0;
    double L1 = 0.0, L2 = 0.0, L3 = 0.0, total = 0.0;
    double w2 = 1.0, w3 = 1.0;
};

/* Everything needed to continue training exactly where it stopped. The rng
   streams are keyed on absolute (epoch, minibatch) indices, so no generator
   state needs to be carried. */
struct Checkpoint {
    VaeParams<float> params;
    AdamState adam;
    LossWeights weights;
    int next_epoch = 0;
};

struct TrainResult {
    Checkpoint state;
    std::vector<EpochLoss> log;
};

TrainResult train_vae(const FeatureMatrix& features, const NetworkSpec& spec,
                      const TrainConfig& cfg);
TrainResult resume_training(const FeatureMatrix& features, const TrainConfig& cfg,
                            Checkpoint start);

void save_checkpoint(const std::string& path, Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

void write_loss_log(const std::string& path, const std::vector<EpochLoss>& log);

} // namespace clmb

#endif
