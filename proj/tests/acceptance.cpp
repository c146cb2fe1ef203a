// Acceptance suite: one criterion per invocation, one PASS/FAIL line each.
// `acceptance setup` trains the checkpoints criteria 9-11 share; artifacts
// live under ./acceptance_artifacts (relative to the working directory).

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>

#include "stwarp/dataset.hpp"
#include "stwarp/gradcheck.hpp"
#include "stwarp/synthscene.hpp"
#include "stwarp/trainer.hpp"

using namespace stwarp;
namespace fs = std::filesystem;

namespace {

using TensorD = Tensor4<double>;
using clock_t_ = std::chrono::steady_clock;

const fs::path kArtifacts = "acceptance_artifacts";
constexpr uint64_t kSeeds[] = {1, 2, 3};
constexpr int kEpochs = 20;

double seconds(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

double dot(const TensorD& a, const TensorD& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

bool report(int criterion, bool pass, const std::string& detail) {
    printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    return pass;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ------------------------------------------------------------ fixtures ----

const fs::path& datasetDir() {
    static fs::path dir = [] {
        const fs::path d = kArtifacts / "sb";
        if (!fs::exists(d / "trajectory.txt")) {
            SceneConfig cfg = presetConfig("sb");
            cfg.seed = 1;
            generateSequence(cfg, d);
        }
        return d;
    }();
    return dir;
}

ModelConfig toyConfig(Variant v) {
    ModelConfig cfg;
    cfg.variant = v;
    cfg.encoderChannels = {4, 8, 16};
    return cfg;
}

/// Train (or reload) one variant; checkpoints are cached on disk so reruns
/// and later criteria are cheap.
Model<float> trainedModel(const Dataset& data, Variant v, Spacing spacing, uint64_t seed) {
    const fs::path ckpt =
        kArtifacts / fmt("%s-%s-s%llu.ckpt", variantName(v).c_str(),
                         spacing == Spacing::Regular ? "regular" : "random",
                         (unsigned long long)seed);
    if (fs::exists(ckpt)) return Model<float>::load(ckpt);

    Model<float> model(toyConfig(v), seed);
    TrainConfig tc;
    tc.epochs = kEpochs;
    tc.batchSize = 4;
    tc.seed = seed;
    tc.spacing = spacing;
    tc.poseSource = PoseSource::Wheel;
    const auto t0 = clock_t_::now();
    trainToy(model, data, tc);
    fprintf(stderr, "trained %s/%s seed %llu in %.0f s\n", variantName(v).c_str(),
            spacing == Spacing::Regular ? "regular" : "random", (unsigned long long)seed,
            seconds(t0));
    model.save(ckpt);
    return model;
}

double evalMiou(Model<float>& m, const Dataset& data, Spacing spacing, PoseSource source,
                uint64_t seed) {
    return evaluateModel(m, data, Split::Eval, spacing, kDefaultSequenceLength, kDefaultDeltaMax,
                         seed, source)
        .miou;
}

int runSetup() {
    const Dataset data(datasetDir());
    for (uint64_t seed : kSeeds) {
        for (Variant v : {Variant::BL, Variant::TGru, Variant::STGru, Variant::TAtte,
                          Variant::STAtte})
            trainedModel(data, v, Spacing::Regular, seed);
        for (Variant v : {Variant::BL, Variant::STAtte})
            trainedModel(data, v, Spacing::Random, seed);
    }
    printf("setup: all checkpoints ready under %s\n", kArtifacts.string().c_str());
    return 0;
}

// -------------------------------------------------- criteria 1-3: warp ----

/// Independent scalar double-loop oracle (same contract as the library
/// reference, written from the scatter definition).
FeatureMap<float> scatterOracle(const FeatureMap<float>& f, const ShiftMatrix& delta,
                                const Grid<float>& td, float fill) {
    const int h = f.height(), w = f.width();
    FeatureMap<float> out(h, w, f.channels(), fill);
    Grid<float> best(h, w, std::numeric_limits<float>::infinity());
    Grid<uint8_t> hit(h, w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!delta.valid.at(y, x)) continue;
            const int dx = int(std::floor(x + double(delta.du.at(y, x)) + 0.5));
            const int dy = int(std::floor(y + double(delta.dv.at(y, x)) + 0.5));
            if (dx < 0 || dx >= w || dy < 0 || dy >= h) continue;
            if (hit.at(dy, dx) && !(td.at(y, x) < best.at(dy, dx))) continue;
            best.at(dy, dx) = td.at(y, x);
            hit.at(dy, dx) = 1;
            for (int c = 0; c < f.channels(); ++c) out.at(dy, dx, c) = f.at(y, x, c);
        }
    return out;
}

int criterion1() {
    const auto t0 = clock_t_::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<float> df(0.5f, 3.0f), ff(-1.0f, 1.0f);
    std::uniform_real_distribution<double> dp(-0.05, 0.05);

    bool equal = true;
    for (int trial = 0; trial < 100 && equal; ++trial) {
        const int w = 16 + int(rng() % 81);  // up to 96
        const int h = 16 + int(rng() % 49);  // up to 64
        const int c = 1 + int(rng() % 8);
        const CameraIntrinsics k(80.0, 80.0, w / 2.0, h / 2.0, w, h);

        DepthImage depth(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                depth.at(y, x) = (rng() % 20 == 0) ? 0.0f : df(rng);
        FeatureMap<float> f(h, w, c);
        for (size_t i = 0; i < f.size(); ++i) f.data()[i] = ff(rng);
        const Pose tc = Pose::fromAxisAngle({dp(rng), dp(rng), dp(rng)},
                                            {dp(rng), dp(rng), dp(rng)});

        const ShiftMatrix delta = computeShiftMatrix(depth, tc, k);
        const Grid<float> td = transformedDepth(depth, tc, k);
        const auto vec = registerFeatureMap(f, delta, td, float(kRegisterFillValue));
        equal = vec.map == scatterOracle(f, delta, td, float(kRegisterFillValue));
    }
    const double dt = seconds(t0);
    return report(1, equal && dt < 30.0,
                  fmt("vectorized scatter bitwise equal to scalar oracle on 100 triples "
                      "(%.1f s < 30 s)",
                      dt))
               ? 0
               : 1;
}

int criterion2() {
    const CameraIntrinsics k(100.0, 100.0, 32.0, 24.0, 64, 48);
    const Pose tc = Pose(Eigen::Quaterniond::Identity(), {0.1, 0, 0}).inverse();
    const DepthImage depth(48, 64, 1.0f);

    const ShiftMatrix delta = computeShiftMatrix(depth, tc, k);
    double worstFull = 0.0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x) {
            if (!delta.valid.at(y, x)) return report(2, false, "invalid shift on plane") ? 0 : 1;
            worstFull = std::max({worstFull, std::abs(delta.du.at(y, x) + 10.0),
                                  std::abs(double(delta.dv.at(y, x)))});
        }

    const ShiftMatrix half = resizeShiftMatrix(delta, 24, 32);
    double worstHalf = 0.0;
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x)
            worstHalf = std::max({worstHalf, std::abs(half.du.at(y, x) + 5.0),
                                  std::abs(double(half.dv.at(y, x)))});

    const bool pass = worstFull < 0.5 && worstHalf < 0.5;
    return report(2, pass,
                  fmt("plane shift (-10,0) max dev %.2e px; half-res (-5,0) max dev %.2e px",
                      worstFull, worstHalf))
               ? 0
               : 1;
}

int criterion3() {
    // two source pixels collide; nearer target depth must win whole vector
    FeatureMap<float> f(1, 2, 3);
    for (int c = 0; c < 3; ++c) {
        f.at(0, 0, c) = 10.0f + c;
        f.at(0, 1, c) = 20.0f + c;
    }
    ShiftMatrix delta(1, 2);
    delta.du.at(0, 0) = 1.0f;
    delta.du.at(0, 1) = 0.0f;
    delta.valid.at(0, 0) = delta.valid.at(0, 1) = 1;
    Grid<float> td(1, 2);
    td.at(0, 0) = 1.0f;
    td.at(0, 1) = 2.0f;

    const auto reg = registerFeatureMap(f, delta, td, 0.0f);
    bool pass = reg.targetDepth.at(0, 1) == 1.0f;
    for (int c = 0; c < 3; ++c) pass = pass && reg.map.at(0, 1, c) == 10.0f + c;

    // swapped depths flip the winner
    td.at(0, 0) = 2.0f;
    td.at(0, 1) = 1.0f;
    const auto reg2 = registerFeatureMap(f, delta, td, 0.0f);
    for (int c = 0; c < 3; ++c) pass = pass && reg2.map.at(0, 1, c) == 20.0f + c;

    return report(3, pass, "z-buffer keeps the smaller target depth's channel vector exactly")
               ? 0
               : 1;
}

// ------------------------------------------------ criterion 4: gradients ----

int criterion4() {
    const auto t0 = clock_t_::now();
    std::mt19937_64 rng(401);
    double primWorst = 0.0, cellWorst = 0.0, pipeWorst = 0.0;

    {  // conv2d
        TensorD x = TensorD::randomUniform(1, 3, 6, 6, -1, 1, rng);
        auto p = ConvParams<double>::init(3, 4, rng);
        const TensorD proj = TensorD::randomUniform(1, 4, 6, 6, -1, 1, rng);
        const auto loss = [&] { return dot(conv2d(x, p), proj); };
        const auto g = conv2dBackward(x, p, proj);
        primWorst = std::max(primWorst,
                             gradCheck(loss, {x.data(), x.size()},
                                       {g.gradX.data(), g.gradX.size()})
                                 .maxRelError);
        primWorst = std::max(primWorst, gradCheck(loss, p.weight, g.gradW).maxRelError);
        primWorst = std::max(primWorst, gradCheck(loss, p.bias, g.gradB).maxRelError);
    }
    {  // activations, pooling, upsampling
        TensorD x = TensorD::randomUniform(1, 2, 6, 6, -2, 2, rng);
        const TensorD proj = TensorD::randomUniform(1, 2, 6, 6, -1, 1, rng);
        {
            const auto loss = [&] { return dot(sigmoid(x), proj); };
            const TensorD g = sigmoidBackward(sigmoid(x), proj);
            primWorst = std::max(primWorst, gradCheck(loss, {x.data(), x.size()},
                                                      {g.data(), g.size()})
                                                .maxRelError);
        }
        {
            const auto loss = [&] { return dot(tanhOp(x), proj); };
            const TensorD g = tanhBackward(tanhOp(x), proj);
            primWorst = std::max(primWorst, gradCheck(loss, {x.data(), x.size()},
                                                      {g.data(), g.size()})
                                                .maxRelError);
        }
        {
            const auto loss = [&] { return dot(relu(x), proj); };
            const TensorD g = reluBackward(x, proj);
            primWorst = std::max(primWorst, gradCheck(loss, {x.data(), x.size()},
                                                      {g.data(), g.size()})
                                                .maxRelError);
        }
        {
            const TensorD pproj = TensorD::randomUniform(1, 2, 3, 3, -1, 1, rng);
            const auto loss = [&] { return dot(avgPool2(x), pproj); };
            const TensorD g = avgPool2Backward(pproj, 6, 6);
            primWorst = std::max(primWorst, gradCheck(loss, {x.data(), x.size()},
                                                      {g.data(), g.size()})
                                                .maxRelError);
        }
        {
            const TensorD uproj = TensorD::randomUniform(1, 2, 12, 12, -1, 1, rng);
            const auto loss = [&] { return dot(upsample2(x), uproj); };
            const TensorD g = upsample2Backward(uproj);
            primWorst = std::max(primWorst, gradCheck(loss, {x.data(), x.size()},
                                                      {g.data(), g.size()})
                                                .maxRelError);
        }
    }
    {  // full SSMA graph
        TensorD ft = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        TensorD fp = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        auto p = SsmaParams<double>::init({4, 4}, rng);
        const TensorD proj = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        const auto loss = [&] { return dot(ssmaForward(ft, fp, p), proj); };
        SsmaCache<double> cache;
        ssmaForward(ft, fp, p, &cache);
        SsmaParamGrads<double> g;
        auto [gft, gfp] = ssmaBackward(p, cache, proj, g);
        cellWorst = std::max(cellWorst, gradCheck(loss, {ft.data(), ft.size()},
                                                  {gft.data(), gft.size()})
                                            .maxRelError);
        cellWorst =
            std::max(cellWorst, gradCheck(loss, p.compress1.weight, g.compress1.w).maxRelError);
        cellWorst = std::max(cellWorst, gradCheck(loss, p.expand.weight, g.expand.w).maxRelError);
        cellWorst =
            std::max(cellWorst, gradCheck(loss, p.compress2.weight, g.compress2.w).maxRelError);
    }
    {  // 3-step ConvGRU chain
        std::vector<TensorD> xs;
        for (int t = 0; t < 3; ++t) xs.push_back(TensorD::randomUniform(1, 2, 4, 4, -1, 1, rng));
        const TensorD h0 = TensorD::randomUniform(1, 2, 4, 4, -0.5, 0.5, rng);
        auto p = ConvGruParams<double>::init(2, rng);
        const TensorD proj = TensorD::randomUniform(1, 2, 4, 4, -1, 1, rng);
        const auto loss = [&] {
            TensorD h = h0;
            for (const auto& x : xs) h = convGruStep(x, h, p);
            return dot(h, proj);
        };
        std::vector<ConvGruCache<double>> caches(3);
        TensorD h = h0;
        for (int t = 0; t < 3; ++t) h = convGruStep(xs[t], h, p, &caches[t]);
        ConvGruParamGrads<double> g;
        TensorD gradH = proj;
        std::vector<TensorD> gradXs(3);
        for (int t = 2; t >= 0; --t) {
            auto [gx, gh] = convGruBackward(p, caches[t], gradH, g);
            gradXs[t] = std::move(gx);
            gradH = std::move(gh);
        }
        for (int t = 0; t < 3; ++t)
            cellWorst = std::max(cellWorst, gradCheck(loss, {xs[t].data(), xs[t].size()},
                                                      {gradXs[t].data(), gradXs[t].size()})
                                                .maxRelError);
        cellWorst = std::max(cellWorst, gradCheck(loss, p.wh.weight, g.wh.w).maxRelError);
        cellWorst = std::max(cellWorst, gradCheck(loss, p.uz.weight, g.uz.w).maxRelError);
    }
    {  // full ST-Atte pipeline through the registration gather-transpose
        const CameraIntrinsics k(8, 8, 4, 4, 8, 8);
        std::vector<TensorD> frames;
        std::vector<DepthImage> depths;
        std::vector<Pose> poses;
        for (int t = 0; t < 3; ++t) {
            frames.push_back(TensorD::randomUniform(1, 3, 8, 8, 0, 1, rng));
            depths.emplace_back(8, 8, 1.0f);
            poses.emplace_back(Eigen::Quaterniond::Identity(),
                               Eigen::Vector3d(0.125 * t, 0, 0));
        }
        Grid<uint8_t> labels(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) labels.at(y, x) = uint8_t(rng() % 3);
        const auto weights = classWeights({40, 14, 10});
        ModelConfig cfg;
        cfg.variant = Variant::STAtte;
        cfg.encoderChannels = {2, 4, 8};
        cfg.eta = 4;
        Model<double> model(cfg, 11);
        const auto loss = [&] {
            return weightedCrossEntropy(model.forwardSequence(frames, depths, poses, k), labels,
                                        weights, false)
                .loss;
        };
        model.zeroGrads();
        std::vector<FrameCache<double>> caches;
        const TensorD logits = model.forwardSequence(frames, depths, poses, k, &caches);
        const auto ce = weightedCrossEntropy(logits, labels, weights, true);
        model.backwardSequence(caches, ce.gradLogits);
        for (auto& p : model.params())
            pipeWorst = std::max(pipeWorst, gradCheck(loss, *p.value, *p.grad).maxRelError);
    }

    const double dt = seconds(t0);
    const bool pass = primWorst < 1e-6 && cellWorst < 1e-4 && pipeWorst < 1e-3 && dt < 120.0;
    return report(4, pass,
                  fmt("primitives %.2e<1e-6, cells %.2e<1e-4, pipeline %.2e<1e-3 (%.0f s < 120 s)",
                      primWorst, cellWorst, pipeWorst, dt))
               ? 0
               : 1;
}

// ----------------------------------------- criteria 5-7: analytic checks ----

int criterion5() {
    std::mt19937_64 rng(501);
    const TensorD ft = TensorD::randomUniform(1, 4, 6, 6, -1, 1, rng);
    const TensorD fp = TensorD::randomUniform(1, 4, 6, 6, -1, 1, rng);
    const TensorD out = ssmaForward(ft, fp, SsmaParams<double>(SsmaConfig{4, 4}));
    double ssmaDev = 0;
    for (size_t i = 0; i < out.size(); ++i) ssmaDev = std::max(ssmaDev, std::abs(out.data()[i]));

    const TensorD h = convGruStep(ft, fp, ConvGruParams<double>(4));
    double gruDev = 0;
    for (size_t i = 0; i < h.size(); ++i)
        gruDev = std::max(gruDev, std::abs(h.data()[i] - 0.5 * fp.data()[i]));

    const bool pass = ssmaDev < 1e-12 && gruDev < 1e-12;
    return report(5, pass,
                  fmt("zero-param SSMA |out| %.1e, zero-param GRU |h-0.5*h_prev| %.1e (< 1e-12)",
                      ssmaDev, gruDev))
               ? 0
               : 1;
}

int criterion6() {
    Tensor4<double> logits(1, 3, 4, 4, 0.25);
    Grid<uint8_t> labels(4, 4, uint8_t(2));
    const double ce = weightedCrossEntropy(logits, labels, {1.0, 1.0, 1.0}, false).loss;
    const bool ceOk = std::abs(ce - std::log(3.0)) < 1e-9;

    ConfusionMatrix cm(3);
    for (int i = 0; i < 3; ++i) cm.at(i, i) = 100 + i;
    const IoUReport r = iouFromConfusion(cm);
    bool iouOk = std::abs(r.miou - 100.0) < 1e-12 && std::abs(r.wiou - 100.0) < 1e-12;
    for (double v : r.perClass) iouOk = iouOk && std::abs(v - 100.0) < 1e-12;

    const auto w = classWeights({1000, 300, 50}, 1.02);
    bool wOk = true;
    for (double v : w) wOk = wOk && v > 0;
    wOk = wOk && w[0] < w[1] && w[1] < w[2];

    const bool pass = ceOk && iouOk && wOk;
    return report(6, pass,
                  fmt("uniform CE dev %.1e<1e-9; diagonal IoU 100; weights positive, monotone",
                      std::abs(ce - std::log(3.0))))
               ? 0
               : 1;
}

int criterion7() {
    std::mt19937_64 rng(701);
    bool gapsOk = true;
    std::vector<long> counts(7, 0);
    const int sequences = 15000;  // 4 gaps each -> 60,000 draws
    for (int t = 0; t < sequences; ++t) {
        const auto idx = sampleRandom(100000, 5, 6, rng);
        for (size_t i = 1; i < idx.size(); ++i) {
            const int gap = idx[i] - idx[i - 1];
            gapsOk = gapsOk && gap >= 1 && gap <= 6;
            ++counts[gap];
        }
    }
    const double n = 4.0 * sequences, p = 1.0 / 6.0;
    const double sigma = std::sqrt(n * p * (1 - p));
    double worstZ = 0;
    for (int g = 1; g <= 6; ++g) worstZ = std::max(worstZ, std::abs(counts[g] - n * p) / sigma);

    std::mt19937_64 rng2(702);
    const bool degenerate = sampleRandom(500, 5, 1, rng2) == sampleRegular(500, 5);

    const bool pass = gapsOk && worstZ < 3.0 && degenerate;
    return report(7, pass,
                  fmt("gaps in [1,6]; uniformity worst |z| %.2f < 3 over 60000 draws; "
                      "deltaMax=1 == regular",
                      worstZ))
               ? 0
               : 1;
}

// -------------------------------------------- criterion 8: ICP refinement ----

int criterion8() {
    SceneConfig cfg;
    cfg.frames = 12;
    cfg.seed = 8;
    const Scene scene = buildScene(cfg);
    const DepthImage di = renderFrame(scene, 5).depth;
    const DepthImage dj = renderFrame(scene, 6).depth;
    const Pose truth = scene.poses[6].inverse() * scene.poses[5];

    const RefineResult ident = refineWithDepth(Pose::identity(), di, di, scene.intrinsics);
    const double identErr = ident.pose.translation().norm() +
                            Eigen::AngleAxisd(ident.pose.rotation()).angle();

    double injectedSum = 0, refinedSum = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(900 + seed);
        const Pose init = injectNoise(truth, NoiseSpec(0.01, 0.5), rng);
        const double injected = (init.translation() - truth.translation()).norm() +
                                truth.rotation().angularDistance(init.rotation());
        const RefineResult r = refineWithDepth(init, di, dj, scene.intrinsics);
        const double refined = (r.pose.translation() - truth.translation()).norm() +
                               truth.rotation().angularDistance(r.pose.rotation());
        injectedSum += injected;
        refinedSum += refined;
    }

    const bool pass = identErr < 1e-9 && refinedSum <= 0.5 * injectedSum;
    return report(8, pass,
                  fmt("identity-pair error %.1e < 1e-9; mean refined error %.2f mm = %.0f%% of "
                      "injected %.2f mm (<= 50%%)",
                      identErr, refinedSum / 20 * 1e3, 100.0 * refinedSum / injectedSum,
                      injectedSum / 20 * 1e3))
               ? 0
               : 1;
}

// ------------------------------------------- criteria 9-11: toy trends ----

int criterion9() {
    const Dataset data(datasetDir());
    double bl = 0, st = 0;
    for (uint64_t seed : kSeeds) {
        Model<float> b = trainedModel(data, Variant::BL, Spacing::Random, seed);
        Model<float> s = trainedModel(data, Variant::STAtte, Spacing::Random, seed);
        bl += evalMiou(b, data, Spacing::Random, PoseSource::Wheel, seed);
        st += evalMiou(s, data, Spacing::Random, PoseSource::Wheel, seed);
    }
    bl /= 3;
    st /= 3;
    const bool pass = st >= bl + 1.0;
    return report(9, pass,
                  fmt("random-spacing mIoU: st-atte %.2f vs baseline %.2f (gain %+.2f >= +1.0, "
                      "3-seed mean)",
                      st, bl, st - bl))
               ? 0
               : 1;
}

int criterion10() {
    const Dataset data(datasetDir());
    auto degradation = [&](Variant v) {
        double d = 0;
        for (uint64_t seed : kSeeds) {
            Model<float> m = trainedModel(data, v, Spacing::Regular, seed);
            const double reg = evalMiou(m, data, Spacing::Regular, PoseSource::Wheel, seed);
            const double rnd = evalMiou(m, data, Spacing::Random, PoseSource::Wheel, seed);
            d += std::abs(reg - rnd);
        }
        return d / 3;
    };
    const double tGru = degradation(Variant::TGru);
    const double stGru = degradation(Variant::STGru);
    const double tAtte = degradation(Variant::TAtte);
    const double stAtte = degradation(Variant::STAtte);

    const bool pass = stGru < tGru && stAtte < tAtte;
    return report(10, pass,
                  fmt("|reg-rnd| degradation: st-gru %.2f < t-gru %.2f; st-atte %.2f < t-atte "
                      "%.2f (3-seed means)",
                      stGru, tGru, stAtte, tAtte))
               ? 0
               : 1;
}

int criterion11() {
    const Dataset data(datasetDir());
    double bl = 0;
    for (uint64_t seed : kSeeds) {
        Model<float> b = trainedModel(data, Variant::BL, Spacing::Regular, seed);
        bl += evalMiou(b, data, Spacing::Regular, PoseSource::Wheel, seed);
    }
    bl /= 3;

    bool pass = true;
    std::string detail = fmt("baseline %.2f;", bl);
    for (Variant v : {Variant::STGru, Variant::STAtte}) {
        double wheel = 0, refined = 0;
        for (uint64_t seed : kSeeds) {
            Model<float> m = trainedModel(data, v, Spacing::Regular, seed);
            wheel += evalMiou(m, data, Spacing::Regular, PoseSource::Wheel, seed);
            refined += evalMiou(m, data, Spacing::Regular, PoseSource::Refined, seed);
        }
        wheel /= 3;
        refined /= 3;
        pass = pass && refined >= wheel && wheel > bl && refined > bl;
        detail += fmt(" %s wheel %.2f refined %.2f;", variantName(v).c_str(), wheel, refined);
    }
    return report(11, pass, detail + " refined >= wheel and both above baseline (3-seed means)")
               ? 0
               : 1;
}

// ------------------------------- criterion 12: renderer/warp consistency ----

int criterion12() {
    SceneConfig cfg = presetConfig("sb");
    cfg.frames = 60;
    cfg.seed = 12;
    const Scene scene = buildScene(cfg);

    double worstAgreement = 1.0;
    for (int gap = 1; gap <= 6; ++gap) {
        const int i = 40, j = 40 + gap;
        const RenderedFrame fi = renderFrame(scene, i);
        const RenderedFrame fj = renderFrame(scene, j);
        const Pose tc = scene.poses[j].inverse() * scene.poses[i];

        FeatureMap<float> lab(fi.labels.height(), fi.labels.width(), 1);
        for (int y = 0; y < lab.height(); ++y)
            for (int x = 0; x < lab.width(); ++x) lab.at(y, x, 0) = float(fi.labels.at(y, x));

        const ShiftMatrix delta = computeShiftMatrix(fi.depth, tc, scene.intrinsics);
        const Grid<float> td = transformedDepth(fi.depth, tc, scene.intrinsics);
        const auto reg = registerFeatureMap(lab, delta, td, -1.0f);

        long agree = 0, total = 0;
        for (int y = 0; y < lab.height(); ++y)
            for (int x = 0; x < lab.width(); ++x) {
                if (!reg.hitMask.at(y, x)) continue;
                ++total;
                if (int(std::lround(reg.map.at(y, x, 0))) == int(fj.labels.at(y, x))) ++agree;
            }
        worstAgreement = std::min(worstAgreement, double(agree) / double(total));
    }

    const bool pass = worstAgreement >= 0.98;
    return report(12, pass,
                  fmt("true-pose label warping: worst agreement %.2f%% over gaps 1..6 (>= 98%%)",
                      100.0 * worstAgreement))
               ? 0
               : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: acceptance {setup|1..12}\n");
        return 2;
    }
    fs::create_directories(kArtifacts);
    if (strcmp(argv[1], "setup") == 0) return runSetup();
    switch (atoi(argv[1])) {
        case 1: return criterion1();
        case 2: return criterion2();
        case 3: return criterion3();
        case 4: return criterion4();
        case 5: return criterion5();
        case 6: return criterion6();
        case 7: return criterion7();
        case 8: return criterion8();
        case 9: return criterion9();
        case 10: return criterion10();
        case 11: return criterion11();
        case 12: return criterion12();
    }
    fprintf(stderr, "unknown criterion\n");
    return 2;
}
