#include "stwarp/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace stwarp {

std::vector<double> classWeights(const std::vector<uint64_t>& pixelAreas, double epsilon) {
    uint64_t total = 0;
    for (uint64_t a : pixelAreas) total += a;
    if (total == 0) throw std::invalid_argument("classWeights: zero total area");

    std::vector<double> w(pixelAreas.size());
    for (size_t c = 0; c < pixelAreas.size(); ++c) {
        const double freq = double(pixelAreas[c]) / double(total);
        w[c] = 1.0 / std::log(freq + epsilon);
    }
    return w;
}

ConfusionMatrix::ConfusionMatrix(int numClasses)
    : c_(numClasses), counts_(size_t(numClasses) * numClasses, 0) {
    if (numClasses <= 0) throw std::invalid_argument("ConfusionMatrix: non-positive class count");
}

uint64_t ConfusionMatrix::total() const {
    uint64_t t = 0;
    for (uint64_t v : counts_) t += v;
    return t;
}

void ConfusionMatrix::addImage(const Grid<uint8_t>& gt, const Grid<uint8_t>& pred) {
    if (gt.height() != pred.height() || gt.width() != pred.width())
        throw ShapeError("ConfusionMatrix::addImage: shape mismatch");
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x) add(gt.at(y, x), pred.at(y, x));
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.c_ != c_) throw ShapeError("ConfusionMatrix::merge: class count mismatch");
    for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

IoUReport iouFromConfusion(const ConfusionMatrix& cm, double epsilon) {
    const int c = cm.numClasses();
    IoUReport rep;
    rep.epsilon = epsilon;
    rep.perClass.assign(c, std::nan(""));
    rep.pixelCounts.assign(c, 0);

    for (int i = 0; i < c; ++i) {
        uint64_t tp = cm.at(i, i), fn = 0, fp = 0;
        for (int j = 0; j < c; ++j) {
            if (j == i) continue;
            fn += cm.at(i, j);
            fp += cm.at(j, i);
        }
        rep.pixelCounts[i] = tp + fn;
        const uint64_t denom = tp + fp + fn;
        if (denom > 0) rep.perClass[i] = 100.0 * double(tp) / double(denom);
    }

    std::vector<double> rawW = classWeights(
        [&] {
            // Classes with no ground-truth pixels get a unit placeholder area
            // so the weight formula stays defined; they are excluded below.
            std::vector<uint64_t> areas = rep.pixelCounts;
            for (auto& a : areas)
                if (a == 0) a = 1;
            return areas;
        }(),
        epsilon);

    double sumIoU = 0.0, sumW = 0.0, sumWIoU = 0.0;
    int defined = 0;
    for (int i = 0; i < c; ++i) {
        if (std::isnan(rep.perClass[i])) continue;
        ++defined;
        sumIoU += rep.perClass[i];
        sumW += rawW[i];
        sumWIoU += rawW[i] * rep.perClass[i];
    }
    rep.miou = defined > 0 ? sumIoU / defined : 0.0;
    rep.wiou = sumW > 0 ? sumWIoU / sumW : 0.0;

    rep.weights.assign(c, 0.0);
    for (int i = 0; i < c; ++i)
        if (!std::isnan(rep.perClass[i]) && sumW > 0) rep.weights[i] = rawW[i] / sumW;
    return rep;
}

}  // namespace stwarp
