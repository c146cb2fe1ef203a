#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "stwarp/dataset.hpp"
#include "stwarp/gradcheck.hpp"
#include "stwarp/synthscene.hpp"
#include "stwarp/trainer.hpp"

using namespace stwarp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 verification failure, 2 usage/input error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

uint64_t fnv1a(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot hash artifact: " + path.string());
    uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount())
        for (std::streamsize i = 0; i < in.gcount(); ++i)
            h = (h ^ uint8_t(buf[i])) * 1099511628211ull;
    return h;
}

/// Collects per-run metadata and writes the manifest as the final artifact.
class RunManifest {
public:
    RunManifest(std::string command, json config, uint64_t seed)
        : start_(std::chrono::steady_clock::now()) {
        j_["command"] = std::move(command);
        j_["config"] = std::move(config);
        j_["seed"] = seed;
        j_["version"] = kVersion;
    }

    void addArtifact(const fs::path& path) {
        char hex[32];
        snprintf(hex, sizeof hex, "fnv1a:%016llx", (unsigned long long)fnv1a(path));
        j_["artifacts"][path.string()] = hex;
    }

    void write(const fs::path& path) {
        j_["wall_clock_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const fs::path tmp = path.string() + ".tmp";
        std::ofstream out(tmp);
        out << j_.dump(2) << "\n";
        out.close();
        fs::rename(tmp, path);
    }

private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

std::string joinArgs(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

fs::path dataRoot(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("STWARP_DATA")) return env;
    throw UsageError("no dataset: pass --data/--seq or set STWARP_DATA");
}

Spacing parseSpacing(const std::string& s) {
    if (s == "regular") return Spacing::Regular;
    if (s == "random") return Spacing::Random;
    throw UsageError("spacing must be regular or random");
}

PoseSource parsePoseSource(const std::string& s) {
    if (s == "wheel") return PoseSource::Wheel;
    if (s == "gt") return PoseSource::GroundTruth;
    if (s == "refined") return PoseSource::Refined;
    throw UsageError("pose source must be wheel, gt or refined");
}

std::string poseSourceName(PoseSource s) {
    switch (s) {
        case PoseSource::Wheel: return "wheel";
        case PoseSource::GroundTruth: return "gt";
        case PoseSource::Refined: return "refined";
    }
    return "?";
}

json iouToJson(const IoUReport& r, int samples) {
    json j;
    j["per_class_iou"] = r.perClass;
    j["miou"] = r.miou;
    j["wiou"] = r.wiou;
    j["pixel_counts"] = r.pixelCounts;
    j["weights"] = r.weights;
    j["epsilon"] = r.epsilon;
    j["sample_count"] = samples;
    return j;
}

// ---------------------------------------------------------------- synth ----

int cmdSynth(const std::string& cmdline, const std::string& preset, int frames, uint64_t seed,
             const fs::path& out) {
    SceneConfig cfg = presetConfig(preset);
    cfg.frames = frames;
    cfg.seed = seed;
    generateSequence(cfg, out);

    RunManifest manifest(cmdline,
                         json{{"preset", preset}, {"frames", frames}, {"out", out.string()}},
                         seed);
    for (const char* f : {"intrinsics.json", "scene.json", "trajectory.txt",
                          "groundtruth_trajectory.txt"})
        manifest.addArtifact(out / f);
    manifest.write(out / "run_manifest.json");
    std::cout << "wrote " << frames << " frames to " << out << "\n";
    return 0;
}

// ------------------------------------------------------------- register ----

int cmdRegister(const std::string& cmdline, const std::string& seq, int from, int to,
                const std::string& source, const fs::path& out, uint64_t seed) {
    const Dataset data(dataRoot(seq));
    if (from < 0 || from >= data.frameCount() || to < 0 || to >= data.frameCount())
        throw UsageError("--from/--to out of range");
    const PoseSource ps = parsePoseSource(source);

    const RgbImage rgb = data.rgb(from);
    FeatureMap<float> gray(rgb.height(), rgb.width(), 1);
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x) {
            const auto& p = rgb.at(y, x);
            gray.at(y, x, 0) = float((p[0] + p[1] + p[2]) / (3.0 * 255.0));
        }

    const Pose tr = data.pose(to, ps).inverse() * data.pose(from, ps);
    const RegisteredMap<float> reg =
        registerPrior(gray, data.depth(from), composeCameraTransform(tr, Pose::identity()),
                      data.intrinsics());

    Grid<float> field(reg.map.height(), reg.map.width());
    for (int y = 0; y < field.height(); ++y)
        for (int x = 0; x < field.width(); ++x) field.at(y, x) = reg.map.at(y, x, 0);
    writePpm(out, falseColor(field, &reg.hitMask));

    int hits = 0;
    for (int y = 0; y < reg.hitMask.height(); ++y)
        for (int x = 0; x < reg.hitMask.width(); ++x) hits += reg.hitMask.at(y, x);
    std::cout << "registered frame " << from << " -> " << to << ", coverage "
              << 100.0 * hits / (field.height() * field.width()) << "%\n";

    RunManifest manifest(cmdline,
                         json{{"seq", seq}, {"from", from}, {"to", to}, {"pose_source", source}},
                         seed);
    manifest.addArtifact(out);
    manifest.write(out.parent_path() / (out.stem().string() + ".manifest.json"));
    return 0;
}

// ------------------------------------------------------------ gradcheck ----

int cmdGradcheck(bool all) {
    if (!all) throw UsageError("gradcheck: pass --all");
    using TensorD = Tensor4<double>;
    std::mt19937_64 rng(12345);
    const auto dot = [](const TensorD& a, const TensorD& b) {
        double s = 0;
        for (size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
        return s;
    };

    struct Row {
        std::string name;
        double err;
        double threshold;
    };
    std::vector<Row> rows;

    {  // conv2d (x, w, b)
        TensorD x = TensorD::randomUniform(1, 3, 6, 6, -1, 1, rng);
        auto p = ConvParams<double>::init(3, 4, rng);
        const TensorD proj = TensorD::randomUniform(1, 4, 6, 6, -1, 1, rng);
        const auto loss = [&] { return dot(conv2d(x, p), proj); };
        const auto g = conv2dBackward(x, p, proj);
        rows.push_back({"conv2d.x",
                        gradCheck(loss, {x.data(), x.size()}, {g.gradX.data(), g.gradX.size()})
                            .maxRelError,
                        1e-6});
        rows.push_back({"conv2d.w", gradCheck(loss, p.weight, g.gradW).maxRelError, 1e-6});
        rows.push_back({"conv2d.b", gradCheck(loss, p.bias, g.gradB).maxRelError, 1e-6});
    }
    {  // activations
        TensorD x = TensorD::randomUniform(1, 2, 5, 5, -2, 2, rng);
        const TensorD proj = TensorD::randomUniform(1, 2, 5, 5, -1, 1, rng);
        {
            const auto loss = [&] { return dot(sigmoid(x), proj); };
            const TensorD g = sigmoidBackward(sigmoid(x), proj);
            rows.push_back(
                {"sigmoid",
                 gradCheck(loss, {x.data(), x.size()}, {g.data(), g.size()}).maxRelError, 1e-6});
        }
        {
            const auto loss = [&] { return dot(tanhOp(x), proj); };
            const TensorD g = tanhBackward(tanhOp(x), proj);
            rows.push_back(
                {"tanh", gradCheck(loss, {x.data(), x.size()}, {g.data(), g.size()}).maxRelError,
                 1e-6});
        }
        {
            const auto loss = [&] { return dot(relu(x), proj); };
            const TensorD g = reluBackward(x, proj);
            rows.push_back(
                {"relu", gradCheck(loss, {x.data(), x.size()}, {g.data(), g.size()}).maxRelError,
                 1e-6});
        }
    }
    {  // pooling / upsampling
        TensorD x = TensorD::randomUniform(1, 2, 6, 6, -1, 1, rng);
        const TensorD pproj = TensorD::randomUniform(1, 2, 3, 3, -1, 1, rng);
        const auto ploss = [&] { return dot(avgPool2(x), pproj); };
        const TensorD pg = avgPool2Backward(pproj, 6, 6);
        rows.push_back(
            {"avgPool2",
             gradCheck(ploss, {x.data(), x.size()}, {pg.data(), pg.size()}).maxRelError, 1e-6});

        const TensorD uproj = TensorD::randomUniform(1, 2, 12, 12, -1, 1, rng);
        const auto uloss = [&] { return dot(upsample2(x), uproj); };
        const TensorD ug = upsample2Backward(uproj);
        rows.push_back(
            {"upsample2",
             gradCheck(uloss, {x.data(), x.size()}, {ug.data(), ug.size()}).maxRelError, 1e-6});
    }
    {  // weighted cross-entropy
        TensorD logits = TensorD::randomUniform(1, 3, 4, 4, -2, 2, rng);
        Grid<uint8_t> labels(4, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) labels.at(y, x) = uint8_t(rng() % 3);
        const auto weights = classWeights({40, 14, 10});
        const auto loss = [&] {
            return weightedCrossEntropy(logits, labels, weights, false).loss;
        };
        const auto r = weightedCrossEntropy(logits, labels, weights, true);
        rows.push_back({"weightedCrossEntropy",
                        gradCheck(loss, {logits.data(), logits.size()},
                                  {r.gradLogits.data(), r.gradLogits.size()})
                            .maxRelError,
                        1e-6});
    }
    {  // SSMA full graph
        TensorD ft = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        TensorD fp = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        auto p = SsmaParams<double>::init({4, 4}, rng);
        const TensorD proj = TensorD::randomUniform(1, 4, 5, 5, -1, 1, rng);
        const auto loss = [&] { return dot(ssmaForward(ft, fp, p), proj); };
        SsmaCache<double> cache;
        ssmaForward(ft, fp, p, &cache);
        SsmaParamGrads<double> g;
        auto [gft, gfp] = ssmaBackward(p, cache, proj, g);
        double worst = 0;
        worst = std::max(worst, gradCheck(loss, {ft.data(), ft.size()},
                                          {gft.data(), gft.size()})
                                    .maxRelError);
        worst = std::max(worst, gradCheck(loss, p.compress1.weight, g.compress1.w).maxRelError);
        worst = std::max(worst, gradCheck(loss, p.expand.weight, g.expand.w).maxRelError);
        worst = std::max(worst, gradCheck(loss, p.compress2.weight, g.compress2.w).maxRelError);
        rows.push_back({"ssma.graph", worst, 1e-4});
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
        for (int t = 2; t >= 0; --t) gradH = convGruBackward(p, caches[t], gradH, g).second;
        double worst = 0;
        worst = std::max(worst, gradCheck(loss, p.wh.weight, g.wh.w).maxRelError);
        worst = std::max(worst, gradCheck(loss, p.uz.weight, g.uz.w).maxRelError);
        worst = std::max(worst, gradCheck(loss, p.wz.bias, g.wz.b).maxRelError);
        rows.push_back({"convgru.3step", worst, 1e-4});
    }
    {  // full toy pipeline through registration
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
        double worst = 0;
        for (auto& p : model.params())
            worst = std::max(worst, gradCheck(loss, *p.value, *p.grad).maxRelError);
        rows.push_back({"pipeline.st-atte", worst, 1e-3});
    }

    bool ok = true;
    for (const auto& r : rows) {
        const bool pass = r.err < r.threshold;
        ok = ok && pass;
        printf("%-22s max_rel_err %.3e  threshold %.0e  %s\n", r.name.c_str(), r.err,
               r.threshold, pass ? "ok" : "FAIL");
    }
    return ok ? 0 : 1;
}

// ----------------------------------------------------------- train/eval ----

struct TrainArgs {
    std::string variant = "bl";
    std::string data, spacing = "regular", poseSource = "wheel";
    std::vector<int> channels{8, 16, 32};
    int epochs = 30, batch = 4, seqLen = kDefaultSequenceLength, deltaMax = kDefaultDeltaMax;
    int eta = 16;
    double lr = 1e-3;
    uint64_t seed = 0;
    fs::path out;
};

template <typename T>
int runTrain(const std::string& cmdline, const TrainArgs& a) {
    const Dataset data(dataRoot(a.data));
    ModelConfig cfg;
    cfg.variant = parseVariant(a.variant);
    cfg.encoderChannels = a.channels;
    cfg.eta = a.eta;
    Model<T> model(cfg, a.seed);

    TrainConfig tc;
    tc.epochs = a.epochs;
    tc.batchSize = a.batch;
    tc.initialLR = a.lr;
    tc.seed = a.seed;
    tc.sequenceLength = a.seqLen;
    tc.spacing = parseSpacing(a.spacing);
    tc.deltaMax = a.deltaMax;
    tc.poseSource = parsePoseSource(a.poseSource);
    tc.verbose = true;

    const TrainResult r = trainToy(model, data, tc);

    fs::create_directories(a.out);
    const fs::path ckpt = a.out / (a.variant + ".ckpt");
    json trainMeta{{"spacing", a.spacing},
                   {"pose_source", a.poseSource},
                   {"epochs", a.epochs},
                   {"seed", a.seed},
                   {"best_val_miou", r.bestValMiou},
                   {"best_epoch", r.bestEpoch}};
    model.save(ckpt, {{"train", trainMeta}});

    json log = json::array();
    for (const auto& e : r.log)
        log.push_back({{"epoch", e.epoch}, {"loss", e.meanLoss}, {"val_miou", e.valMiou}});
    const fs::path logPath = a.out / (a.variant + "_training_log.json");
    std::ofstream(logPath) << json{{"train", trainMeta}, {"log", log}}.dump(2) << "\n";

    RunManifest manifest(cmdline, json{{"model", cfg.toJson()}, {"train", trainMeta}}, a.seed);
    manifest.addArtifact(ckpt);
    manifest.addArtifact(logPath);
    manifest.write(a.out / (a.variant + "_run_manifest.json"));
    std::cout << "best val mIoU " << r.bestValMiou << " (epoch " << r.bestEpoch << ") -> "
              << ckpt << "\n";
    return 0;
}

template <typename T>
IoUReport evalCheckpoint(const fs::path& ckpt, const Dataset& data, Spacing spacing,
                         PoseSource source, uint64_t seed, int seqLen, int deltaMax,
                         json* configEcho = nullptr) {
    nlohmann::json meta;
    Model<T> model = Model<T>::load(ckpt, &meta);
    if (configEcho) *configEcho = meta;
    return evaluateModel(model, data, Split::Eval, spacing, seqLen, deltaMax, seed, source);
}

int cmdEval(const std::string& cmdline, const fs::path& ckpt, const std::string& dataDir,
            const std::string& spacing, const std::string& source, const fs::path& report,
            uint64_t seed, int seqLen, int deltaMax, const std::string& precision) {
    const Dataset data(dataRoot(dataDir));
    json configEcho;
    const IoUReport r =
        precision == "f64"
            ? evalCheckpoint<double>(ckpt, data, parseSpacing(spacing),
                                     parsePoseSource(source), seed, seqLen, deltaMax,
                                     &configEcho)
            : evalCheckpoint<float>(ckpt, data, parseSpacing(spacing), parsePoseSource(source),
                                    seed, seqLen, deltaMax, &configEcho);
    const int samples = int(data.splitFrames(Split::Eval).size());

    json out = iouToJson(r, samples);
    out["config"] = configEcho;
    out["eval"] = {{"spacing", spacing}, {"pose_source", source}, {"seed", seed},
                   {"sequence_length", seqLen}, {"delta_max", deltaMax}};
    std::ofstream(report) << out.dump(2) << "\n";
    std::cout << "mIoU " << r.miou << "  wIoU " << r.wiou << " -> " << report << "\n";

    RunManifest manifest(cmdline, out["eval"], seed);
    manifest.addArtifact(report);
    manifest.write(report.parent_path() / (report.stem().string() + ".manifest.json"));
    return 0;
}

// ---------------------------------------------------------- refine-odom ----

int cmdRefineOdom(const std::string& cmdline, const std::string& seq, const fs::path& out,
                  uint64_t seed) {
    const fs::path root = dataRoot(seq);
    const Dataset data(root);
    const auto wheel = readTrajectory(root / "trajectory.txt");

    std::vector<OdometryReading> refined = wheel;
    int failures = 0;
    for (size_t i = 1; i < wheel.size(); ++i) {
        const Pose init = wheel[i].pose.inverse() * wheel[i - 1].pose;  // cam i-1 -> i
        Pose rel = init;
        try {
            rel = refineWithDepth(init, data.depth(int(i - 1)), data.depth(int(i)),
                                  data.intrinsics())
                      .pose;
        } catch (const DegenerateGeometryError&) {
            ++failures;
        }
        refined[i].pose = refined[i - 1].pose * rel.inverse();
    }
    writeTrajectory(out, refined);
    std::cout << "refined " << wheel.size() - 1 << " steps (" << failures
              << " degenerate, kept wheel) -> " << out << "\n";

    RunManifest manifest(cmdline, json{{"seq", root.string()}}, seed);
    manifest.addArtifact(out);
    manifest.write(out.parent_path() / (out.stem().string() + ".manifest.json"));
    return 0;
}

// --------------------------------------------------------------- ablate ----

int cmdAblate(const std::string& cmdline, bool framerate, bool odometry,
              const std::string& dataDir, const fs::path& ckptDir, const fs::path& out,
              uint64_t seed, int seqLen, int deltaMax) {
    if (framerate == odometry) throw UsageError("ablate: pass exactly one of --framerate/--odometry");
    const Dataset data(dataRoot(dataDir));

    auto require = [&](const std::string& variant) {
        const fs::path p = ckptDir / (variant + ".ckpt");
        if (!fs::exists(p)) throw UsageError("missing checkpoint: " + p.string());
        return p;
    };

    std::ofstream csv(out);
    if (framerate) {
        csv << "variant,train_spacing,test_spacing,miou\n";
        for (const std::string v : {"bl", "t-gru", "st-gru", "t-atte", "st-atte"}) {
            const fs::path ckpt = require(v);
            for (Spacing sp : {Spacing::Regular, Spacing::Random}) {
                const IoUReport r = evalCheckpoint<float>(ckpt, data, sp, PoseSource::Wheel,
                                                          seed, seqLen, deltaMax);
                csv << v << ",regular," << (sp == Spacing::Regular ? "regular" : "random") << ","
                    << r.miou << "\n";
            }
        }
    } else {
        csv << "variant,pose_source,miou\n";
        for (const std::string v : {"bl", "st-gru", "st-atte"}) {
            const fs::path ckpt = require(v);
            for (PoseSource src :
                 {PoseSource::GroundTruth, PoseSource::Wheel, PoseSource::Refined}) {
                const IoUReport r = evalCheckpoint<float>(ckpt, data, Spacing::Regular, src,
                                                          seed, seqLen, deltaMax);
                csv << v << "," << poseSourceName(src) << "," << r.miou << "\n";
            }
        }
    }
    csv.close();
    std::cout << "wrote " << out << "\n";

    RunManifest manifest(cmdline,
                         json{{"mode", framerate ? "framerate" : "odometry"},
                              {"ckpt_dir", ckptDir.string()}},
                         seed);
    manifest.addArtifact(out);
    manifest.write(out.parent_path() / (out.stem().string() + ".manifest.json"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial-temporal feature registration toolkit"};
    app.require_subcommand(1);
    const std::string cmdline = joinArgs(argc, argv);

    uint64_t seed = 0;
    int threads = 0;
    std::string precision = "f32";
    app.add_option("--seed", seed, "global RNG seed");
    app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
    app.add_option("--precision", precision, "f32 or f64")
        ->check(CLI::IsMember({"f32", "f64"}));

    auto* synth = app.add_subcommand("synth", "generate a synthetic RGB-D dataset");
    std::string preset = "sb";
    int frames = 600;
    std::string synthOut;
    synth->add_option("--preset", preset)->check(CLI::IsMember({"sb", "bup"}));
    synth->add_option("--frames", frames);
    synth->add_option("--out", synthOut)->required();

    auto* reg = app.add_subcommand("register", "warp a frame into another view");
    std::string regSeq, regSource = "gt", regOut;
    int regFrom = 0, regTo = 0;
    reg->add_option("--seq", regSeq);
    reg->add_option("--from", regFrom)->required();
    reg->add_option("--to", regTo)->required();
    reg->add_option("--pose-source", regSource);
    reg->add_option("--out", regOut)->required();

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    bool gcAll = false;
    gc->add_flag("--all", gcAll);

    auto* train = app.add_subcommand("train", "train a toy segmentation variant");
    TrainArgs ta;
    std::string trainOut;
    train->add_option("--variant", ta.variant)
        ->check(CLI::IsMember({"bl", "t-gru", "st-gru", "t-atte", "st-atte"}));
    train->add_option("--data", ta.data);
    train->add_option("--spacing", ta.spacing)->check(CLI::IsMember({"regular", "random"}));
    train->add_option("--pose-source", ta.poseSource)
        ->check(CLI::IsMember({"wheel", "gt", "refined"}));
    train->add_option("--channels", ta.channels, "encoder channels (3 values)")->expected(3);
    train->add_option("--epochs", ta.epochs);
    train->add_option("--batch", ta.batch);
    train->add_option("--lr", ta.lr);
    train->add_option("--eta", ta.eta);
    train->add_option("--seq-len", ta.seqLen);
    train->add_option("--delta-max", ta.deltaMax);
    train->add_option("--out", trainOut)->required();

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the eval split");
    std::string evalCkpt, evalData, evalSpacing = "regular", evalSource = "wheel", evalReport;
    int evalSeqLen = kDefaultSequenceLength, evalDeltaMax = kDefaultDeltaMax;
    eval->add_option("--ckpt", evalCkpt)->required();
    eval->add_option("--data", evalData);
    eval->add_option("--spacing", evalSpacing)->check(CLI::IsMember({"regular", "random"}));
    eval->add_option("--pose-source", evalSource)
        ->check(CLI::IsMember({"wheel", "gt", "refined"}));
    eval->add_option("--seq-len", evalSeqLen);
    eval->add_option("--delta-max", evalDeltaMax);
    eval->add_option("--report", evalReport)->required();

    auto* refine = app.add_subcommand("refine-odom", "ICP-refine the wheel trajectory");
    std::string refineSeq, refineOut;
    refine->add_option("--seq", refineSeq);
    refine->add_option("--out", refineOut)->required();

    auto* ablate = app.add_subcommand("ablate", "framerate / odometry ablation tables");
    bool abFramerate = false, abOdometry = false;
    std::string abData, abCkptDir, abOut;
    int abSeqLen = kDefaultSequenceLength, abDeltaMax = kDefaultDeltaMax;
    ablate->add_flag("--framerate", abFramerate);
    ablate->add_flag("--odometry", abOdometry);
    ablate->add_option("--data", abData);
    ablate->add_option("--ckpt-dir", abCkptDir)->required();
    ablate->add_option("--seq-len", abSeqLen);
    ablate->add_option("--delta-max", abDeltaMax);
    ablate->add_option("--out", abOut)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*synth) return cmdSynth(cmdline, preset, frames, seed, synthOut);
        if (*reg) return cmdRegister(cmdline, regSeq, regFrom, regTo, regSource, regOut, seed);
        if (*gc) return cmdGradcheck(gcAll);
        if (*train) {
            ta.seed = seed;
            ta.out = trainOut;
            return precision == "f64" ? runTrain<double>(cmdline, ta)
                                      : runTrain<float>(cmdline, ta);
        }
        if (*eval)
            return cmdEval(cmdline, evalCkpt, evalData, evalSpacing, evalSource, evalReport,
                           seed, evalSeqLen, evalDeltaMax, precision);
        if (*refine) return cmdRefineOdom(cmdline, refineSeq, refineOut, seed);
        if (*ablate)
            return cmdAblate(cmdline, abFramerate, abOdometry, abData, abCkptDir, abOut, seed,
                             abSeqLen, abDeltaMax);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
