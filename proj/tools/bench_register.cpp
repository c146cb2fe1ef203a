#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "stwarp/warp.hpp"

using namespace stwarp;

// Compares the OpenMP registration kernel against the serial reference on
// identical inputs and verifies bitwise equality while timing both.
int main(int argc, char** argv) {
    const int iterations = argc > 1 ? atoi(argv[1]) : 200;
    const CameraIntrinsics k(80.0, 80.0, 48.0, 32.0, 96, 64);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> df(0.5f, 3.0f), ff(-1.0f, 1.0f);
    std::uniform_real_distribution<double> dp(-0.05, 0.05);

    DepthImage depth(k.height, k.width);
    for (int y = 0; y < k.height; ++y)
        for (int x = 0; x < k.width; ++x) depth.at(y, x) = df(rng);
    FeatureMap<float> map(k.height, k.width, 32);
    for (size_t i = 0; i < map.size(); ++i) map.data()[i] = ff(rng);
    const Pose tc = Pose::fromAxisAngle({dp(rng), dp(rng), dp(rng)},
                                        {dp(rng), dp(rng), dp(rng)});

    const ShiftMatrix delta = computeShiftMatrix(depth, tc, k);
    const Grid<float> td = transformedDepth(depth, tc, k);

    using clock = std::chrono::steady_clock;
    auto bench = [&](auto&& fn) {
        fn();  // warm-up
        const auto t0 = clock::now();
        for (int i = 0; i < iterations; ++i) fn();
        return std::chrono::duration<double>(clock::now() - t0).count() / iterations;
    };

    const double serial =
        bench([&] { registerFeatureMapReference(map, delta, td, float(kRegisterFillValue)); });
    const double parallel =
        bench([&] { registerFeatureMap(map, delta, td, float(kRegisterFillValue)); });

    const auto a = registerFeatureMapReference(map, delta, td, float(kRegisterFillValue));
    const auto b = registerFeatureMap(map, delta, td, float(kRegisterFillValue));
    const bool equal = a.map == b.map && a.hitMask == b.hitMask && a.sourceIndex == b.sourceIndex;

    printf("register 96x64x32, %d iterations, %d threads\n", iterations, omp_get_max_threads());
    printf("  serial reference: %8.1f us/call\n", serial * 1e6);
    printf("  openmp kernel:    %8.1f us/call  (%.2fx)\n", parallel * 1e6, serial / parallel);
    printf("  bitwise equal:    %s\n", equal ? "yes" : "NO");
    return equal ? 0 : 1;
}
