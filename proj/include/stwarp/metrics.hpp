#pragma once

#include <cstdint>
#include <vector>

#include "stwarp/tensor.hpp"

namespace stwarp {

inline constexpr double kDefaultWeightEpsilon = 1.02;

/// Inverse-log-frequency class weights: w_c = 1 / ln(f_c + eps) with
/// f_c = a_c / sum(a). eps defaults to 1.02 so the log argument stays above 1
/// and every weight is positive.
std::vector<double> classWeights(const std::vector<uint64_t>& pixelAreas,
                                 double epsilon = kDefaultWeightEpsilon);

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int numClasses);

    int numClasses() const { return c_; }
    uint64_t& at(int gt, int pred) { return counts_[size_t(gt) * c_ + pred]; }
    uint64_t at(int gt, int pred) const { return counts_[size_t(gt) * c_ + pred]; }
    uint64_t total() const;

    void add(int gt, int pred) { ++at(gt, pred); }
    void addImage(const Grid<uint8_t>& gt, const Grid<uint8_t>& pred);
    void merge(const ConfusionMatrix& other);

private:
    int c_;
    std::vector<uint64_t> counts_;
};

struct IoUReport {
    std::vector<double> perClass;  // percent; NaN where undefined
    std::vector<uint64_t> pixelCounts;
    std::vector<double> weights;  // Eq-style weights normalized to sum 1
    double miou = 0.0;
    double wiou = 0.0;
    double epsilon = kDefaultWeightEpsilon;
};

/// Per-class IoU percentages plus unweighted and frequency-weighted means.
/// Classes absent from both ground truth and prediction are excluded.
IoUReport iouFromConfusion(const ConfusionMatrix& cm,
                           double epsilon = kDefaultWeightEpsilon);

/// Frequency-weighted cross-entropy over per-pixel softmax, mean over pixels.
/// logits: 1 x C x H x W; labels: H x W class indices.
template <typename T>
struct CrossEntropyResult {
    double loss = 0.0;
    Tensor4<T> gradLogits;
};

template <typename T>
CrossEntropyResult<T> weightedCrossEntropy(const Tensor4<T>& logits, const Grid<uint8_t>& labels,
                                           const std::vector<double>& weights,
                                           bool wantGrad = true) {
    const int c = logits.channels(), h = logits.height(), w = logits.width();
    if (logits.batch() != 1 || labels.height() != h || labels.width() != w)
        throw ShapeError("weightedCrossEntropy: shape mismatch");
    if (int(weights.size()) != c) throw ShapeError("weightedCrossEntropy: weight count mismatch");

    CrossEntropyResult<T> res;
    if (wantGrad) res.gradLogits = Tensor4<T>(1, c, h, w);

    const double invN = 1.0 / (double(h) * w);
    double loss = 0.0;
    std::vector<double> p(c);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int label = labels.at(y, x);
            if (label >= c) throw ShapeError("weightedCrossEntropy: label index out of range");
            double maxv = double(logits.at(0, 0, y, x));
            for (int ch = 1; ch < c; ++ch) maxv = std::max(maxv, double(logits.at(0, ch, y, x)));
            double sum = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                p[ch] = std::exp(double(logits.at(0, ch, y, x)) - maxv);
                sum += p[ch];
            }
            const double wl = weights[label];
            loss += -wl * std::log(p[label] / sum);
            if (wantGrad) {
                for (int ch = 0; ch < c; ++ch) {
                    const double soft = p[ch] / sum;
                    res.gradLogits.at(0, ch, y, x) =
                        T(wl * (soft - (ch == label ? 1.0 : 0.0)) * invN);
                }
            }
        }
    }
    res.loss = loss * invN;
    return res;
}

}  // namespace stwarp
