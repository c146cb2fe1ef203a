#pragma once

#include <optional>

#include "stwarp/nn.hpp"
#include "stwarp/warp.hpp"

namespace stwarp {

/// Gradient accumulator matching a ConvParams layout.
template <typename T>
struct ConvParamGrads {
    std::vector<T> w, b;

    void ensure(const ConvParams<T>& p) {
        if (w.size() != p.weight.size()) w.assign(p.weight.size(), T{});
        if (b.size() != p.bias.size()) b.assign(p.bias.size(), T{});
    }
    void add(const ConvGrads<T>& g) {
        for (size_t i = 0; i < w.size(); ++i) w[i] += g.gradW[i];
        for (size_t i = 0; i < b.size(); ++i) b[i] += g.gradB[i];
    }
    void clear() {
        std::fill(w.begin(), w.end(), T{});
        std::fill(b.begin(), b.end(), T{});
    }
};

struct SsmaConfig {
    int channels = 0;
    int eta = 16;

    int bottleneck() const { return std::max(1, 2 * channels / eta); }
};

/// SSMA self-attention fusion: the 2C concatenation is bottlenecked, expanded
/// back through a sigmoid into a gate in (0,1), applied by Hadamard product,
/// and compressed to C output channels.
template <typename T>
struct SsmaParams {
    SsmaConfig cfg;
    ConvParams<T> compress1;  // 2C -> 2C/eta
    ConvParams<T> expand;     // 2C/eta -> 2C
    ConvParams<T> compress2;  // 2C -> C

    SsmaParams() = default;
    explicit SsmaParams(SsmaConfig c)
        : cfg(c), compress1(2 * c.channels, c.bottleneck()),
          expand(c.bottleneck(), 2 * c.channels), compress2(2 * c.channels, c.channels) {
        if (c.eta < 1 || c.bottleneck() < 1) throw ShapeError("SsmaParams: invalid eta");
    }

    static SsmaParams init(SsmaConfig c, std::mt19937_64& rng) {
        SsmaParams p(c);
        p.compress1 = ConvParams<T>::init(2 * c.channels, c.bottleneck(), rng);
        p.expand = ConvParams<T>::init(c.bottleneck(), 2 * c.channels, rng);
        p.compress2 = ConvParams<T>::init(2 * c.channels, c.channels, rng);
        return p;
    }
};

template <typename T>
struct SsmaCache {
    Tensor4<T> x, pre, act, gate, gated;
};

template <typename T>
struct SsmaParamGrads {
    ConvParamGrads<T> compress1, expand, compress2;
    void ensure(const SsmaParams<T>& p) {
        compress1.ensure(p.compress1);
        expand.ensure(p.expand);
        compress2.ensure(p.compress2);
    }
};

template <typename T>
Tensor4<T> ssmaForward(const Tensor4<T>& ft, const Tensor4<T>& fprior, const SsmaParams<T>& p,
                       SsmaCache<T>* cache = nullptr) {
    if (ft.channels() != p.cfg.channels || fprior.channels() != p.cfg.channels)
        throw ShapeError("ssmaForward: channel mismatch");
    Tensor4<T> x = concatChannels(ft, fprior);
    Tensor4<T> pre = conv2d(x, p.compress1);
    Tensor4<T> act = relu(pre);
    Tensor4<T> gate = sigmoid(conv2d(act, p.expand));
    Tensor4<T> gated = hadamard(x, gate);
    Tensor4<T> out = conv2d(gated, p.compress2);
    if (cache) *cache = {x, pre, act, gate, std::move(gated)};
    return out;
}

/// Returns (gradFt, gradFprior); parameter gradients accumulate into `g`.
template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> ssmaBackward(const SsmaParams<T>& p, const SsmaCache<T>& c,
                                               const Tensor4<T>& gradOut, SsmaParamGrads<T>& g) {
    g.ensure(p);
    ConvGrads<T> g2 = conv2dBackward(c.gated, p.compress2, gradOut);
    g.compress2.add(g2);

    // hadamard: grad wrt x (direct branch) and wrt gate
    Tensor4<T> gradX = hadamard(g2.gradX, c.gate);
    Tensor4<T> gradGate = hadamard(g2.gradX, c.x);

    Tensor4<T> gradPreGate = sigmoidBackward(c.gate, gradGate);
    ConvGrads<T> ge = conv2dBackward(c.act, p.expand, gradPreGate);
    g.expand.add(ge);

    Tensor4<T> gradPre = reluBackward(c.pre, ge.gradX);
    ConvGrads<T> g1 = conv2dBackward(c.x, p.compress1, gradPre);
    g.compress1.add(g1);

    gradX = add(gradX, g1.gradX);
    auto [gft, gprior] = concatChannelsBackward(gradX, p.cfg.channels);
    return {std::move(gft), std::move(gprior)};
}

/// ConvGRU cell: all six transforms are same-size 3x3 convolutions with
/// hidden width equal to input width. W-convolutions carry biases, the
/// recurrent U-convolutions do not.
template <typename T>
struct ConvGruParams {
    int channels = 0;
    ConvParams<T> wz, uz, wr, ur, wh, uh;

    ConvGruParams() = default;
    explicit ConvGruParams(int c)
        : channels(c), wz(c, c), uz(c, c, false), wr(c, c), ur(c, c, false), wh(c, c),
          uh(c, c, false) {}

    static ConvGruParams init(int c, std::mt19937_64& rng) {
        ConvGruParams p(c);
        p.wz = ConvParams<T>::init(c, c, rng);
        p.uz = ConvParams<T>::init(c, c, rng, false);
        p.wr = ConvParams<T>::init(c, c, rng);
        p.ur = ConvParams<T>::init(c, c, rng, false);
        p.wh = ConvParams<T>::init(c, c, rng);
        p.uh = ConvParams<T>::init(c, c, rng, false);
        return p;
    }
};

template <typename T>
struct ConvGruCache {
    Tensor4<T> x, hPrev, z, r, rh, hTilde;
};

template <typename T>
struct ConvGruParamGrads {
    ConvParamGrads<T> wz, uz, wr, ur, wh, uh;
    void ensure(const ConvGruParams<T>& p) {
        wz.ensure(p.wz);
        uz.ensure(p.uz);
        wr.ensure(p.wr);
        ur.ensure(p.ur);
        wh.ensure(p.wh);
        uh.ensure(p.uh);
    }
};

/// h = (1 - z) . h_prev + z . tanh(W*x + U*(r . h_prev))
template <typename T>
Tensor4<T> convGruStep(const Tensor4<T>& x, const Tensor4<T>& hPrev, const ConvGruParams<T>& p,
                       ConvGruCache<T>* cache = nullptr) {
    if (!x.sameShape(hPrev)) throw ShapeError("convGruStep: input/state shape mismatch");
    Tensor4<T> z = sigmoid(add(conv2d(x, p.wz), conv2d(hPrev, p.uz)));
    Tensor4<T> r = sigmoid(add(conv2d(x, p.wr), conv2d(hPrev, p.ur)));
    Tensor4<T> rh = hadamard(r, hPrev);
    Tensor4<T> hTilde = tanhOp(add(conv2d(x, p.wh), conv2d(rh, p.uh)));

    Tensor4<T> h = hPrev;
    for (size_t i = 0; i < h.size(); ++i) {
        const T zi = z.data()[i];
        h.data()[i] = (T(1) - zi) * hPrev.data()[i] + zi * hTilde.data()[i];
    }
    if (cache) *cache = {x, hPrev, z, r, std::move(rh), hTilde};
    return h;
}

/// Returns (gradX, gradHPrev); parameter gradients accumulate into `g`.
template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> convGruBackward(const ConvGruParams<T>& p,
                                                  const ConvGruCache<T>& c,
                                                  const Tensor4<T>& gradH,
                                                  ConvGruParamGrads<T>& g) {
    g.ensure(p);

    Tensor4<T> gradZpre = gradH, gradHt = gradH, gradHPrev = gradH;
    for (size_t i = 0; i < gradH.size(); ++i) {
        const T zi = c.z.data()[i];
        const T diff = c.hTilde.data()[i] - c.hPrev.data()[i];
        gradZpre.data()[i] = gradH.data()[i] * diff * zi * (T(1) - zi);
        gradHt.data()[i] = gradH.data()[i] * zi;
        gradHPrev.data()[i] = gradH.data()[i] * (T(1) - zi);
    }

    Tensor4<T> gradHtPre = tanhBackward(c.hTilde, gradHt);
    ConvGrads<T> gwh = conv2dBackward(c.x, p.wh, gradHtPre);
    ConvGrads<T> guh = conv2dBackward(c.rh, p.uh, gradHtPre);
    g.wh.add(gwh);
    g.uh.add(guh);

    Tensor4<T> gradR = hadamard(guh.gradX, c.hPrev);
    gradHPrev = add(gradHPrev, hadamard(guh.gradX, c.r));

    Tensor4<T> gradRpre = gradR;
    for (size_t i = 0; i < gradR.size(); ++i) {
        const T ri = c.r.data()[i];
        gradRpre.data()[i] = gradR.data()[i] * ri * (T(1) - ri);
    }

    ConvGrads<T> gwr = conv2dBackward(c.x, p.wr, gradRpre);
    ConvGrads<T> gur = conv2dBackward(c.hPrev, p.ur, gradRpre);
    ConvGrads<T> gwz = conv2dBackward(c.x, p.wz, gradZpre);
    ConvGrads<T> guz = conv2dBackward(c.hPrev, p.uz, gradZpre);
    g.wr.add(gwr);
    g.ur.add(gur);
    g.wz.add(gwz);
    g.uz.add(guz);

    Tensor4<T> gradX = add(add(gwh.gradX, gwr.gradX), gwz.gradX);
    gradHPrev = add(gradHPrev, add(gur.gradX, guz.gradX));
    return {std::move(gradX), std::move(gradHPrev)};
}

enum class FusionCellKind { Ssma, ConvGru };

/// Recurrent state threaded through a sequence at one decoder level.
template <typename T>
struct FusionState {
    FeatureMap<T> hidden;  // empty before the first frame
    int frameIndex = -1;
};

/// One spatial-temporal fusion step: the recurrent state is registered into
/// the current frame (spatial variants) or used as-is (temporal-only), then
/// combined with the current features by the fusion cell. The new state is
/// the cell output.
template <typename T>
std::pair<FeatureMap<T>, FusionState<T>> stFusionStep(
    const FeatureMap<T>& ft, const FusionState<T>& state, const DepthImage& depthFull,
    const Pose& tc, const CameraIntrinsics& k, bool spatial, const SsmaParams<T>* ssma,
    const ConvGruParams<T>* gru) {
    FeatureMap<T> prior;
    if (state.hidden.empty()) {
        prior = FeatureMap<T>(ft.height(), ft.width(), ft.channels(), T(kRegisterFillValue));
    } else if (spatial) {
        prior = registerPrior(state.hidden, depthFull, tc, k).map;
    } else {
        prior = state.hidden;
    }

    Tensor4<T> out;
    if (ssma)
        out = ssmaForward(toTensor(ft), toTensor(prior), *ssma);
    else
        out = convGruStep(toTensor(ft), toTensor(prior), *gru);

    FeatureMap<T> fused = toFeatureMap(out);
    FusionState<T> next{fused, state.frameIndex + 1};
    return {std::move(fused), std::move(next)};
}

}  // namespace stwarp
