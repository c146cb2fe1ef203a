#pragma once

#include <random>
#include <stdexcept>
#include <vector>

namespace stwarp {

struct SequencingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Spacing { Regular, Random };

inline constexpr int kDefaultSequenceLength = 5;
inline constexpr int kDefaultDeltaMax = 6;

/// N consecutive frame indices ending at lastIndex.
std::vector<int> sampleRegular(int lastIndex, int n);

/// N indices ending at lastIndex with random gaps delta ~ U{1..deltaMax}.
/// Draws that would index before frame 0 are rejected and redrawn (up to 100
/// attempts), then the sampler falls back to regular spacing.
std::vector<int> sampleRandom(int lastIndex, int n, int deltaMax, std::mt19937_64& rng);

std::vector<int> sampleIndices(Spacing spacing, int lastIndex, int n, int deltaMax,
                               std::mt19937_64& rng);

}  // namespace stwarp
