#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>

#include "stwarp/dataset.hpp"
#include "stwarp/metrics.hpp"
#include "stwarp/pipeline.hpp"

namespace stwarp {

struct TrainConfig {
    int epochs = 30;
    int batchSize = 4;
    double initialLR = 1e-3;
    double lrDecay = 0.8;
    int lrStepEpochs = 100;
    double beta1 = 0.8;  // adaptive-moment "momentum"
    double beta2 = 0.999;
    double adamEps = 1e-8;
    uint64_t seed = 0;
    int sequenceLength = kDefaultSequenceLength;
    Spacing spacing = Spacing::Regular;
    int deltaMax = kDefaultDeltaMax;
    PoseSource poseSource = PoseSource::Wheel;
    int validateEvery = 5;
    double weightEpsilon = kDefaultWeightEpsilon;
    bool verbose = false;

    double lrAtEpoch(int epoch) const {
        return initialLR * std::pow(lrDecay, epoch / lrStepEpochs);
    }
};

struct EpochLog {
    int epoch = 0;
    double meanLoss = 0.0;
    double valMiou = -1.0;  // <0 when no validation ran this epoch
};

/// Adam over a model's parameter views. Moment buffers are keyed by parameter
/// order, which is fixed per model.
template <typename T>
class AdamOptimizer {
public:
    AdamOptimizer(double beta1, double beta2, double eps)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<typename Model<T>::ParamView>& params, double lr) {
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.emplace_back(p.value->size(), 0.0);
                v_.emplace_back(p.value->size(), 0.0);
            }
        }
        ++t_;
        const double corr1 = 1.0 - std::pow(beta1_, t_);
        const double corr2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            auto& value = *params[i].value;
            auto& grad = *params[i].grad;
            for (size_t j = 0; j < value.size(); ++j) {
                const double g = double(grad[j]);
                m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
                v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
                const double mh = m_[i][j] / corr1;
                const double vh = v_[i][j] / corr2;
                value[j] -= T(lr * mh / (std::sqrt(vh) + eps_));
            }
        }
    }

private:
    double beta1_, beta2_, eps_;
    int t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

template <typename T>
double sequenceLoss(Model<T>& model, const SequenceSample& s, const CameraIntrinsics& k,
                    const std::vector<double>& weights, bool backward) {
    std::vector<Tensor4<T>> frames;
    frames.reserve(s.rgb.size());
    for (const auto& img : s.rgb) frames.push_back(rgbToTensor<T>(img));

    std::vector<FrameCache<T>> caches;
    Tensor4<T> logits =
        model.forwardSequence(frames, s.depth, s.poses, k, backward ? &caches : nullptr);
    auto ce = weightedCrossEntropy(logits, s.labels, weights, backward);
    if (backward) model.backwardSequence(caches, ce.gradLogits);
    return ce.loss;
}

/// Evaluate a model over a dataset split: one confusion matrix accumulated
/// over every sample's last frame.
template <typename T>
IoUReport evaluateModel(Model<T>& model, const Dataset& data, Split split, Spacing spacing,
                        int n, int deltaMax, uint64_t seed,
                        PoseSource source = PoseSource::Wheel,
                        double weightEpsilon = kDefaultWeightEpsilon) {
    std::mt19937_64 rng(seed ^ 0xe7a1c0deull);
    ConfusionMatrix cm(model.config().numClasses);
    for (int last : data.splitFrames(split)) {
        const SequenceSample s = data.sample(last, n, spacing, deltaMax, rng, source);
        std::vector<Tensor4<T>> frames;
        for (const auto& img : s.rgb) frames.push_back(rgbToTensor<T>(img));
        Tensor4<T> logits = model.forwardSequence(frames, s.depth, s.poses,
                                                  data.intrinsics(), nullptr);
        cm.addImage(s.labels, argmaxLabels(logits));
    }
    return iouFromConfusion(cm, weightEpsilon);
}

struct TrainResult {
    std::vector<EpochLog> log;
    double bestValMiou = -1.0;
    int bestEpoch = -1;
};

/// Minimize the weighted cross-entropy on last-frame predictions with Adam
/// and a step learning-rate schedule; validates every `validateEvery` epochs
/// and restores the best-validation parameters at the end.
template <typename T>
TrainResult trainToy(Model<T>& model, const Dataset& data, const TrainConfig& cfg) {
    std::vector<int> trainFrames = data.splitFrames(Split::Train);
    if (trainFrames.empty()) throw std::invalid_argument("trainToy: empty training split");

    const std::vector<double> weights =
        classWeights(data.classAreas(Split::Train, model.config().numClasses),
                     cfg.weightEpsilon);

    std::mt19937_64 rng(cfg.seed ^ 0x72a117ull);
    AdamOptimizer<T> opt(cfg.beta1, cfg.beta2, cfg.adamEps);
    auto params = model.params();

    TrainResult result;
    std::vector<float> bestParams;
    auto snapshot = [&] {
        bestParams.clear();
        for (const auto& p : params)
            for (const T v : *p.value) bestParams.push_back(float(v));
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(trainFrames.begin(), trainFrames.end(), rng);
        const double lr = cfg.lrAtEpoch(epoch);

        double lossSum = 0.0;
        int pending = 0;
        model.zeroGrads();
        for (size_t i = 0; i < trainFrames.size(); ++i) {
            const SequenceSample s = data.sample(trainFrames[i], cfg.sequenceLength, cfg.spacing,
                                                 cfg.deltaMax, rng, cfg.poseSource);
            lossSum += sequenceLoss(model, s, data.intrinsics(), weights, true);
            if (++pending == cfg.batchSize || i + 1 == trainFrames.size()) {
                opt.step(params, lr);
                model.zeroGrads();
                pending = 0;
            }
        }

        EpochLog log;
        log.epoch = epoch;
        log.meanLoss = lossSum / double(trainFrames.size());
        if ((epoch + 1) % cfg.validateEvery == 0 || epoch + 1 == cfg.epochs) {
            log.valMiou = evaluateModel(model, data, Split::Val, cfg.spacing,
                                        cfg.sequenceLength, cfg.deltaMax, cfg.seed,
                                        cfg.poseSource, cfg.weightEpsilon)
                              .miou;
            if (log.valMiou > result.bestValMiou) {
                result.bestValMiou = log.valMiou;
                result.bestEpoch = epoch;
                snapshot();
            }
        }
        if (cfg.verbose)
            std::cerr << "epoch " << epoch << " loss " << log.meanLoss << " val "
                      << log.valMiou << "\n";
        result.log.push_back(log);
    }

    if (!bestParams.empty()) {
        size_t idx = 0;
        for (const auto& p : params)
            for (T& v : *p.value) v = T(bestParams[idx++]);
    }
    return result;
}

}  // namespace stwarp
