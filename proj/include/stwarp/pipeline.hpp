#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "stwarp/checkpoint.hpp"
#include "stwarp/fusion.hpp"
#include "stwarp/io.hpp"

namespace stwarp {

enum class Variant { BL, TGru, STGru, TAtte, STAtte };

inline bool variantHasFusion(Variant v) { return v != Variant::BL; }
inline bool variantSpatial(Variant v) { return v == Variant::STGru || v == Variant::STAtte; }
inline bool variantSsma(Variant v) { return v == Variant::TAtte || v == Variant::STAtte; }

inline std::string variantName(Variant v) {
    switch (v) {
        case Variant::BL: return "bl";
        case Variant::TGru: return "t-gru";
        case Variant::STGru: return "st-gru";
        case Variant::TAtte: return "t-atte";
        case Variant::STAtte: return "st-atte";
    }
    return "?";
}

inline Variant parseVariant(const std::string& s) {
    if (s == "bl") return Variant::BL;
    if (s == "t-gru") return Variant::TGru;
    if (s == "st-gru") return Variant::STGru;
    if (s == "t-atte") return Variant::TAtte;
    if (s == "st-atte") return Variant::STAtte;
    throw std::invalid_argument("unknown variant: " + s);
}

/// Toy encoder-decoder: 3 encoder levels with stride-2 pooling, a symmetric
/// skip-connected decoder, and recurrent fusion cells at the configured
/// decoder levels (0 = full resolution, 1 = half, 2 = bottleneck).
struct ModelConfig {
    Variant variant = Variant::BL;
    std::vector<int> encoderChannels{8, 16, 32};
    int inChannels = 3;
    int numClasses = 3;
    std::vector<int> fusionLevels;  // empty -> per-variant default
    int eta = 16;

    /// GRU variants fuse 2 decoder levels, attention variants all 3.
    std::vector<int> effectiveFusionLevels() const {
        if (!variantHasFusion(variant)) return {};
        if (!fusionLevels.empty()) {
            for (int l : fusionLevels)
                if (l < 0 || l > 2) throw std::invalid_argument("fusion level out of range");
            return fusionLevels;
        }
        return variantSsma(variant) ? std::vector<int>{0, 1, 2} : std::vector<int>{0, 1};
    }

    nlohmann::json toJson() const {
        return {{"variant", variantName(variant)},
                {"encoder_channels", encoderChannels},
                {"in_channels", inChannels},
                {"num_classes", numClasses},
                {"fusion_levels", effectiveFusionLevels()},
                {"eta", eta}};
    }
    static ModelConfig fromJson(const nlohmann::json& j) {
        ModelConfig c;
        c.variant = parseVariant(j.at("variant"));
        c.encoderChannels = j.at("encoder_channels").get<std::vector<int>>();
        c.inChannels = j.at("in_channels");
        c.numClasses = j.at("num_classes");
        c.fusionLevels = j.at("fusion_levels").get<std::vector<int>>();
        c.eta = j.at("eta");
        return c;
    }
};

template <typename T>
struct ConvLayer {
    ConvParams<T> p;
    ConvParamGrads<T> g;
};

template <typename T>
struct FrameCache {
    Tensor4<T> x, pre0, e0, pool0, pre1, e1, pool1, pre2, e2;
    Tensor4<T> f2, up2, cat1, preD1, d1, f1, up1, cat0, preD0, d0, f0;
    Tensor4<T> logits;  // last frame only
    std::array<Tensor4<T>, 3> prior;
    std::array<std::optional<SsmaCache<T>>, 3> ssmaCache;
    std::array<std::optional<ConvGruCache<T>>, 3> gruCache;
    std::array<std::optional<Grid<int32_t>>, 3> regIndex;  // set when registered
    std::array<bool, 3> priorFromState{false, false, false};
};

template <typename T>
class Model {
public:
    Model() = default;

    Model(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
        const auto& ec = cfg.encoderChannels;
        if (ec.size() != 3) throw std::invalid_argument("Model: expected 3 encoder levels");
        std::mt19937_64 rng(seed ^ 0x5eedc0ffeeull);
        enc0_.p = ConvParams<T>::init(cfg.inChannels, ec[0], rng);
        enc1_.p = ConvParams<T>::init(ec[0], ec[1], rng);
        enc2_.p = ConvParams<T>::init(ec[1], ec[2], rng);
        dec1_.p = ConvParams<T>::init(ec[2] + ec[1], ec[1], rng);
        dec0_.p = ConvParams<T>::init(ec[1] + ec[0], ec[0], rng);
        head_.p = ConvParams<T>::init(ec[0], cfg.numClasses, rng);

        for (int l : cfg.effectiveFusionLevels()) {
            const int c = ec[l];
            if (variantSsma(cfg.variant))
                ssma_[l] = SsmaParams<T>::init({c, cfg.eta}, rng);
            else
                gru_[l] = ConvGruParams<T>::init(c, rng);
        }
    }

    const ModelConfig& config() const { return cfg_; }
    int levelChannels(int l) const { return cfg_.encoderChannels[l]; }

    /// Process a frame sequence and return last-frame logits. BL ignores all
    /// frames but the last. Caches, when requested, hold everything the
    /// backward pass needs (one entry per processed frame).
    Tensor4<T> forwardSequence(const std::vector<Tensor4<T>>& frames,
                               const std::vector<DepthImage>& depths,
                               const std::vector<Pose>& poses, const CameraIntrinsics& k,
                               std::vector<FrameCache<T>>* caches = nullptr) const {
        if (frames.empty()) throw std::invalid_argument("forwardSequence: empty sequence");
        if (frames.size() != poses.size() || frames.size() != depths.size())
            throw std::invalid_argument("forwardSequence: frame/pose/depth count mismatch");

        const size_t first = cfg_.variant == Variant::BL ? frames.size() - 1 : 0;
        std::array<Tensor4<T>, 3> state;  // empty until first fused frame
        if (caches) caches->clear();

        Tensor4<T> logits;
        for (size_t t = first; t < frames.size(); ++t) {
            FrameCache<T> cache;
            const bool last = t + 1 == frames.size();
            const DepthImage* prevDepth = t > first ? &depths[t - 1] : nullptr;
            Pose tc;
            if (t > first) {
                const Pose tr = poses[t].inverse() * poses[t - 1];
                tc = composeCameraTransform(tr, extrinsics_);
            }
            logits = forwardFrame(frames[t], state, prevDepth, tc, k, last, cache);
            if (caches) caches->push_back(std::move(cache));
        }
        return logits;
    }

    /// BPTT through the cached sequence. Parameter gradients accumulate into
    /// the layer grad buffers; call zeroGrads() between samples/batches.
    void backwardSequence(std::vector<FrameCache<T>>& caches, const Tensor4<T>& gradLogits) {
        std::array<Tensor4<T>, 3> gradState;  // empty == zero
        for (int t = int(caches.size()) - 1; t >= 0; --t)
            backwardFrame(caches[t], t + 1 == int(caches.size()) ? &gradLogits : nullptr,
                          gradState);
    }

    void zeroGrads() {
        forEachLayer([](ConvLayer<T>& l) {
            l.g.ensure(l.p);
            l.g.clear();
        });
        for (int l = 0; l < 3; ++l) {
            if (ssma_[l]) {
                ssmaG_[l].ensure(*ssma_[l]);
                auto clear3 = [](ConvParamGrads<T>& g) { g.clear(); };
                clear3(ssmaG_[l].compress1);
                clear3(ssmaG_[l].expand);
                clear3(ssmaG_[l].compress2);
            }
            if (gru_[l]) {
                gruG_[l].ensure(*gru_[l]);
                for (auto* g : {&gruG_[l].wz, &gruG_[l].uz, &gruG_[l].wr, &gruG_[l].ur,
                                &gruG_[l].wh, &gruG_[l].uh})
                    g->clear();
            }
        }
    }

    struct ParamView {
        std::string name;
        std::vector<T>* value;
        std::vector<T>* grad;
        std::vector<int> shape;
    };

    /// All parameters in a fixed serialization order.
    std::vector<ParamView> params() {
        std::vector<ParamView> out;
        auto addConv = [&](const std::string& name, ConvLayer<T>& l) {
            l.g.ensure(l.p);
            out.push_back({name + ".w", &l.p.weight, &l.g.w, {l.p.outC, l.p.inC, 3, 3}});
            if (l.p.hasBias()) out.push_back({name + ".b", &l.p.bias, &l.g.b, {l.p.outC}});
        };
        addConv("enc0", enc0_);
        addConv("enc1", enc1_);
        addConv("enc2", enc2_);
        addConv("dec1", dec1_);
        addConv("dec0", dec0_);
        addConv("head", head_);

        auto addRaw = [&](const std::string& name, ConvParams<T>& p, ConvParamGrads<T>& g,
                          bool bias) {
            g.ensure(p);
            out.push_back({name + ".w", &p.weight, &g.w, {p.outC, p.inC, 3, 3}});
            if (bias && p.hasBias()) out.push_back({name + ".b", &p.bias, &g.b, {p.outC}});
        };
        for (int l = 0; l < 3; ++l) {
            const std::string lvl = std::to_string(l);
            if (ssma_[l]) {
                ssmaG_[l].ensure(*ssma_[l]);
                addRaw("ssma." + lvl + ".compress1", ssma_[l]->compress1, ssmaG_[l].compress1,
                       true);
                addRaw("ssma." + lvl + ".expand", ssma_[l]->expand, ssmaG_[l].expand, true);
                addRaw("ssma." + lvl + ".compress2", ssma_[l]->compress2, ssmaG_[l].compress2,
                       true);
            }
            if (gru_[l]) {
                gruG_[l].ensure(*gru_[l]);
                addRaw("gru." + lvl + ".wz", gru_[l]->wz, gruG_[l].wz, true);
                addRaw("gru." + lvl + ".uz", gru_[l]->uz, gruG_[l].uz, false);
                addRaw("gru." + lvl + ".wr", gru_[l]->wr, gruG_[l].wr, true);
                addRaw("gru." + lvl + ".ur", gru_[l]->ur, gruG_[l].ur, false);
                addRaw("gru." + lvl + ".wh", gru_[l]->wh, gruG_[l].wh, true);
                addRaw("gru." + lvl + ".uh", gru_[l]->uh, gruG_[l].uh, false);
            }
        }
        return out;
    }

    size_t parameterCount() {
        size_t n = 0;
        for (const auto& p : params()) n += p.value->size();
        return n;
    }

    void save(const std::filesystem::path& path, const nlohmann::json& extraMeta = {}) {
        std::vector<ParamBlob> blobs;
        for (const auto& p : params()) {
            ParamBlob b;
            b.name = p.name;
            b.shape = p.shape;
            b.values.resize(p.value->size());
            for (size_t i = 0; i < b.values.size(); ++i) b.values[i] = float((*p.value)[i]);
            blobs.push_back(std::move(b));
        }
        nlohmann::json meta = extraMeta.is_null() ? nlohmann::json::object() : extraMeta;
        meta["model"] = cfg_.toJson();
        writeCheckpoint(path, blobs, meta);
    }

    static Model load(const std::filesystem::path& path, nlohmann::json* metaOut = nullptr) {
        Checkpoint ckpt = readCheckpoint(path);
        Model m(ModelConfig::fromJson(ckpt.meta.at("model")), 0);
        auto views = m.params();
        if (views.size() != ckpt.params.size())
            throw IoError("checkpoint parameter count mismatch");
        for (size_t i = 0; i < views.size(); ++i) {
            if (ckpt.params[i].name != views[i].name ||
                ckpt.params[i].values.size() != views[i].value->size())
                throw IoError("checkpoint parameter mismatch at " + ckpt.params[i].name);
            for (size_t j = 0; j < views[i].value->size(); ++j)
                (*views[i].value)[j] = T(ckpt.params[i].values[j]);
        }
        if (metaOut) *metaOut = ckpt.meta;
        return m;
    }

private:
    template <typename F>
    void forEachLayer(F f) {
        f(enc0_);
        f(enc1_);
        f(enc2_);
        f(dec1_);
        f(dec0_);
        f(head_);
    }

    bool fused(int level) const {
        for (int l : cfg_.effectiveFusionLevels())
            if (l == level) return true;
        return false;
    }

    /// Registered (or pass-through) prior for one fused level; updates cache
    /// bookkeeping so the backward pass can route state gradients.
    Tensor4<T> makePrior(int level, const Tensor4<T>& like, const Tensor4<T>& state,
                         const DepthImage* prevDepth, const Pose& tc, const CameraIntrinsics& k,
                         FrameCache<T>& cache) const {
        if (state.empty()) {
            cache.priorFromState[level] = false;
            return Tensor4<T>(1, like.channels(), like.height(), like.width(),
                              T(kRegisterFillValue));
        }
        cache.priorFromState[level] = true;
        if (!variantSpatial(cfg_.variant) || prevDepth == nullptr) return state;
        RegisteredMap<T> reg = registerPrior(toFeatureMap(state), *prevDepth, tc, k);
        cache.regIndex[level] = std::move(reg.sourceIndex);
        return toTensor(reg.map);
    }

    Tensor4<T> applyFusion(int level, const Tensor4<T>& features, std::array<Tensor4<T>, 3>& state,
                           const DepthImage* prevDepth, const Pose& tc,
                           const CameraIntrinsics& k, FrameCache<T>& cache) const {
        if (!fused(level)) return features;
        cache.prior[level] =
            makePrior(level, features, state[level], prevDepth, tc, k, cache);
        Tensor4<T> out;
        if (ssma_[level]) {
            cache.ssmaCache[level].emplace();
            out = ssmaForward(features, cache.prior[level], *ssma_[level],
                              &*cache.ssmaCache[level]);
        } else {
            cache.gruCache[level].emplace();
            out = convGruStep(features, cache.prior[level], *gru_[level],
                              &*cache.gruCache[level]);
        }
        state[level] = out;
        return out;
    }

    Tensor4<T> forwardFrame(const Tensor4<T>& x, std::array<Tensor4<T>, 3>& state,
                            const DepthImage* prevDepth, const Pose& tc,
                            const CameraIntrinsics& k, bool computeHead,
                            FrameCache<T>& c) const {
        c.x = x;
        c.pre0 = conv2d(x, enc0_.p);
        c.e0 = relu(c.pre0);
        c.pool0 = avgPool2(c.e0);
        c.pre1 = conv2d(c.pool0, enc1_.p);
        c.e1 = relu(c.pre1);
        c.pool1 = avgPool2(c.e1);
        c.pre2 = conv2d(c.pool1, enc2_.p);
        c.e2 = relu(c.pre2);

        c.f2 = applyFusion(2, c.e2, state, prevDepth, tc, k, c);
        c.up2 = upsample2(c.f2);
        c.cat1 = concatChannels(c.up2, c.e1);
        c.preD1 = conv2d(c.cat1, dec1_.p);
        c.d1 = relu(c.preD1);
        c.f1 = applyFusion(1, c.d1, state, prevDepth, tc, k, c);
        c.up1 = upsample2(c.f1);
        c.cat0 = concatChannels(c.up1, c.e0);
        c.preD0 = conv2d(c.cat0, dec0_.p);
        c.d0 = relu(c.preD0);
        c.f0 = applyFusion(0, c.d0, state, prevDepth, tc, k, c);

        if (computeHead) c.logits = conv2d(c.f0, head_.p);
        return c.logits;
    }

    /// Backward through one fused level. Consumes the incoming feature
    /// gradient plus the recurrent state gradient, emits the gradient for the
    /// pre-fusion features, and rewrites gradState[level] for the previous
    /// frame (through the registration gather-transpose for spatial variants).
    Tensor4<T> backwardFusion(int level, FrameCache<T>& c, Tensor4<T> gradF,
                              std::array<Tensor4<T>, 3>& gradState) {
        if (!fused(level)) return gradF;
        if (!gradState[level].empty()) gradF = add(gradF, gradState[level]);

        Tensor4<T> gradFeatures, gradPrior;
        if (ssma_[level]) {
            auto [gf, gp] = ssmaBackward(*ssma_[level], *c.ssmaCache[level], gradF,
                                         ssmaG_[level]);
            gradFeatures = std::move(gf);
            gradPrior = std::move(gp);
        } else {
            auto [gf, gp] =
                convGruBackward(*gru_[level], *c.gruCache[level], gradF, gruG_[level]);
            gradFeatures = std::move(gf);
            gradPrior = std::move(gp);
        }

        if (!c.priorFromState[level]) {
            gradState[level] = Tensor4<T>();  // first frame: prior was a constant
        } else if (c.regIndex[level]) {
            gradState[level] = toTensor(
                registerFeatureMapBackward(*c.regIndex[level], toFeatureMap(gradPrior)));
        } else {
            gradState[level] = std::move(gradPrior);
        }
        return gradFeatures;
    }

    void backwardFrame(FrameCache<T>& c, const Tensor4<T>* gradLogits,
                       std::array<Tensor4<T>, 3>& gradState) {
        Tensor4<T> gradF0(1, c.f0.channels(), c.f0.height(), c.f0.width());
        if (gradLogits) {
            ConvGrads<T> gh = conv2dBackward(c.f0, head_.p, *gradLogits);
            head_.g.add(gh);
            gradF0 = std::move(gh.gradX);
        }

        Tensor4<T> gradD0 = backwardFusion(0, c, std::move(gradF0), gradState);
        ConvGrads<T> gd0 = conv2dBackward(c.cat0, dec0_.p, reluBackward(c.preD0, gradD0));
        dec0_.g.add(gd0);
        auto [gradUp1, gradE0skip] = concatChannelsBackward(gd0.gradX, c.up1.channels());
        Tensor4<T> gradF1 = upsample2Backward(gradUp1);

        Tensor4<T> gradD1 = backwardFusion(1, c, std::move(gradF1), gradState);
        ConvGrads<T> gd1 = conv2dBackward(c.cat1, dec1_.p, reluBackward(c.preD1, gradD1));
        dec1_.g.add(gd1);
        auto [gradUp2, gradE1skip] = concatChannelsBackward(gd1.gradX, c.up2.channels());
        Tensor4<T> gradF2 = upsample2Backward(gradUp2);

        Tensor4<T> gradE2 = backwardFusion(2, c, std::move(gradF2), gradState);
        ConvGrads<T> ge2 = conv2dBackward(c.pool1, enc2_.p, reluBackward(c.pre2, gradE2));
        enc2_.g.add(ge2);
        Tensor4<T> gradE1 =
            add(gradE1skip, avgPool2Backward(ge2.gradX, c.e1.height(), c.e1.width()));

        ConvGrads<T> ge1 = conv2dBackward(c.pool0, enc1_.p, reluBackward(c.pre1, gradE1));
        enc1_.g.add(ge1);
        Tensor4<T> gradE0 =
            add(gradE0skip, avgPool2Backward(ge1.gradX, c.e0.height(), c.e0.width()));

        ConvGrads<T> ge0 = conv2dBackward(c.x, enc0_.p, reluBackward(c.pre0, gradE0));
        enc0_.g.add(ge0);
    }

    ModelConfig cfg_;
    Pose extrinsics_;  // camera-to-robot; identity for the synthetic platform
    ConvLayer<T> enc0_, enc1_, enc2_, dec1_, dec0_, head_;
    std::array<std::optional<SsmaParams<T>>, 3> ssma_;
    std::array<std::optional<ConvGruParams<T>>, 3> gru_;
    std::array<SsmaParamGrads<T>, 3> ssmaG_;
    std::array<ConvGruParamGrads<T>, 3> gruG_;
};

/// Normalize an 8-bit RGB image into a 1x3xHxW tensor in [0,1].
template <typename T>
Tensor4<T> rgbToTensor(const RgbImage& img) {
    Tensor4<T> t(1, 3, img.height(), img.width());
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                t.at(0, c, y, x) = T(img.at(y, x)[c] / 255.0);
    return t;
}

/// Per-pixel argmax over channels.
template <typename T>
Grid<uint8_t> argmaxLabels(const Tensor4<T>& logits) {
    Grid<uint8_t> out(logits.height(), logits.width());
    for (int y = 0; y < logits.height(); ++y)
        for (int x = 0; x < logits.width(); ++x) {
            int best = 0;
            for (int c = 1; c < logits.channels(); ++c)
                if (logits.at(0, c, y, x) > logits.at(0, best, y, x)) best = c;
            out.at(y, x) = uint8_t(best);
        }
    return out;
}

}  // namespace stwarp
