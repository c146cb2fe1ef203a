#include "stwarp/sequencing.hpp"

#include <algorithm>

namespace stwarp {

std::vector<int> sampleRegular(int lastIndex, int n) {
    if (n < 1) throw SequencingError("sampleRegular: n must be >= 1");
    if (lastIndex < n - 1) throw SequencingError("sampleRegular: insufficient history");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = lastIndex - (n - 1) + i;
    return idx;
}

std::vector<int> sampleRandom(int lastIndex, int n, int deltaMax, std::mt19937_64& rng) {
    if (n < 1) throw SequencingError("sampleRandom: n must be >= 1");
    if (deltaMax < 1) throw SequencingError("sampleRandom: deltaMax must be >= 1");
    if (lastIndex < n - 1) throw SequencingError("sampleRandom: insufficient history");

    std::uniform_int_distribution<int> gap(1, deltaMax);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<int> idx(n);
        idx[n - 1] = lastIndex;
        bool ok = true;
        for (int i = n - 2; i >= 0; --i) {
            idx[i] = idx[i + 1] - gap(rng);
            if (idx[i] < 0) {
                ok = false;
                break;
            }
        }
        if (ok) return idx;
    }
    return sampleRegular(lastIndex, n);
}

std::vector<int> sampleIndices(Spacing spacing, int lastIndex, int n, int deltaMax,
                               std::mt19937_64& rng) {
    return spacing == Spacing::Regular ? sampleRegular(lastIndex, n)
                                       : sampleRandom(lastIndex, n, deltaMax, rng);
}

}  // namespace stwarp
