#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "stwarp/tensor.hpp"

namespace stwarp {

/// 3x3 same-size convolution parameters (stride 1, zero padding 1).
template <typename T>
struct ConvParams {
    int inC = 0, outC = 0;
    std::vector<T> weight;  // outC * inC * 3 * 3
    std::vector<T> bias;    // outC; empty when the layer has no bias

    ConvParams() = default;
    ConvParams(int in, int out, bool hasBias = true)
        : inC(in), outC(out), weight(size_t(out) * in * 9, T{}),
          bias(hasBias ? std::vector<T>(out, T{}) : std::vector<T>{}) {}

    T& w(int oc, int ic, int ky, int kx) {
        return weight[((size_t(oc) * inC + ic) * 3 + ky) * 3 + kx];
    }
    const T& w(int oc, int ic, int ky, int kx) const {
        return weight[((size_t(oc) * inC + ic) * 3 + ky) * 3 + kx];
    }
    bool hasBias() const { return !bias.empty(); }

    /// Uniform init over +-sqrt(6 / fan_in), bias zero.
    static ConvParams init(int in, int out, std::mt19937_64& rng, bool hasBias = true) {
        ConvParams p(in, out, hasBias);
        const double bound = std::sqrt(6.0 / (in * 9));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : p.weight) v = T(dist(rng));
        return p;
    }

    template <typename U>
    ConvParams<U> cast() const {
        ConvParams<U> q(inC, outC, hasBias());
        for (size_t i = 0; i < weight.size(); ++i) q.weight[i] = U(weight[i]);
        for (size_t i = 0; i < bias.size(); ++i) q.bias[i] = U(bias[i]);
        return q;
    }
};

template <typename T>
struct ConvGrads {
    Tensor4<T> gradX;
    std::vector<T> gradW;
    std::vector<T> gradB;
};

template <typename T>
Tensor4<T> conv2d(const Tensor4<T>& x, const ConvParams<T>& p) {
    if (x.channels() != p.inC) throw ShapeError("conv2d: input channel mismatch");
    const int b = x.batch(), h = x.height(), w = x.width();
    Tensor4<T> y(b, p.outC, h, w);

#pragma omp parallel for collapse(2) schedule(static)
    for (int bi = 0; bi < b; ++bi) {
        for (int oc = 0; oc < p.outC; ++oc) {
            T* out = y.plane(bi, oc);
            const T biasV = p.hasBias() ? p.bias[oc] : T{};
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) out[yy * w + xx] = biasV;
            for (int ic = 0; ic < p.inC; ++ic) {
                const T* in = x.plane(bi, ic);
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const T wv = p.w(oc, ic, ky, kx);
                        if (wv == T{}) continue;
                        const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
                        const int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
                        for (int yy = y0; yy < y1; ++yy) {
                            const T* src = in + (yy + ky - 1) * w + (kx - 1);
                            T* dst = out + yy * w;
                            for (int xx = x0; xx < x1; ++xx) dst[xx] += wv * src[xx];
                        }
                    }
                }
            }
        }
    }
    return y;
}

template <typename T>
ConvGrads<T> conv2dBackward(const Tensor4<T>& x, const ConvParams<T>& p,
                            const Tensor4<T>& gradOut) {
    const int b = x.batch(), h = x.height(), w = x.width();
    if (gradOut.channels() != p.outC || gradOut.height() != h || gradOut.width() != w)
        throw ShapeError("conv2dBackward: gradient shape mismatch");

    ConvGrads<T> g;
    g.gradX = Tensor4<T>(b, p.inC, h, w);
    g.gradW.assign(p.weight.size(), T{});
    if (p.hasBias()) g.gradB.assign(size_t(p.outC), T{});

    for (int bi = 0; bi < b; ++bi) {
        for (int oc = 0; oc < p.outC; ++oc) {
            const T* go = gradOut.plane(bi, oc);
            if (p.hasBias()) {
                T acc{};
                for (int i = 0; i < h * w; ++i) acc += go[i];
                g.gradB[oc] += acc;
            }
            for (int ic = 0; ic < p.inC; ++ic) {
                const T* in = x.plane(bi, ic);
                T* gx = g.gradX.plane(bi, ic);
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const T wv = p.w(oc, ic, ky, kx);
                        T wacc{};
                        const int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
                        const int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
                        for (int yy = y0; yy < y1; ++yy) {
                            const T* src = in + (yy + ky - 1) * w + (kx - 1);
                            T* gsrc = gx + (yy + ky - 1) * w + (kx - 1);
                            const T* gr = go + yy * w;
                            for (int xx = x0; xx < x1; ++xx) {
                                wacc += gr[xx] * src[xx];
                                gsrc[xx] += gr[xx] * wv;
                            }
                        }
                        g.gradW[((size_t(oc) * p.inC + ic) * 3 + ky) * 3 + kx] += wacc;
                    }
                }
            }
        }
    }
    return g;
}

// Elementwise activations. Backward passes take the forward output where
// that is cheaper than recomputing.

template <typename T>
Tensor4<T> sigmoid(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    T* d = y.data();
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(y.size()); ++i) d[i] = T(1) / (T(1) + std::exp(-d[i]));
    return y;
}

template <typename T>
Tensor4<T> sigmoidBackward(const Tensor4<T>& y, const Tensor4<T>& gradOut) {
    Tensor4<T> g = gradOut;
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] *= y.data()[i] * (T(1) - y.data()[i]);
    return g;
}

template <typename T>
Tensor4<T> tanhOp(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    T* d = y.data();
#pragma omp parallel for schedule(static)
    for (ptrdiff_t i = 0; i < ptrdiff_t(y.size()); ++i) d[i] = std::tanh(d[i]);
    return y;
}

template <typename T>
Tensor4<T> tanhBackward(const Tensor4<T>& y, const Tensor4<T>& gradOut) {
    Tensor4<T> g = gradOut;
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] *= T(1) - y.data()[i] * y.data()[i];
    return g;
}

template <typename T>
Tensor4<T> relu(const Tensor4<T>& x) {
    Tensor4<T> y = x;
    for (auto* d = y.data(); d != y.data() + y.size(); ++d)
        if (*d < T{}) *d = T{};
    return y;
}

template <typename T>
Tensor4<T> reluBackward(const Tensor4<T>& x, const Tensor4<T>& gradOut) {
    Tensor4<T> g = gradOut;
    for (size_t i = 0; i < g.size(); ++i)
        if (x.data()[i] <= T{}) g.data()[i] = T{};
    return g;
}

template <typename T>
Tensor4<T> concatChannels(const Tensor4<T>& a, const Tensor4<T>& b) {
    if (a.batch() != b.batch() || a.height() != b.height() || a.width() != b.width())
        throw ShapeError("concatChannels: spatial/batch mismatch");
    Tensor4<T> y(a.batch(), a.channels() + b.channels(), a.height(), a.width());
    const size_t plane = size_t(a.height()) * a.width();
    for (int bi = 0; bi < a.batch(); ++bi) {
        std::copy(a.plane(bi, 0), a.plane(bi, 0) + a.channels() * plane, y.plane(bi, 0));
        std::copy(b.plane(bi, 0), b.plane(bi, 0) + b.channels() * plane,
                  y.plane(bi, a.channels()));
    }
    return y;
}

template <typename T>
std::pair<Tensor4<T>, Tensor4<T>> concatChannelsBackward(const Tensor4<T>& gradOut, int cA) {
    const int cB = gradOut.channels() - cA;
    Tensor4<T> ga(gradOut.batch(), cA, gradOut.height(), gradOut.width());
    Tensor4<T> gb(gradOut.batch(), cB, gradOut.height(), gradOut.width());
    const size_t plane = size_t(gradOut.height()) * gradOut.width();
    for (int bi = 0; bi < gradOut.batch(); ++bi) {
        std::copy(gradOut.plane(bi, 0), gradOut.plane(bi, 0) + cA * plane, ga.plane(bi, 0));
        std::copy(gradOut.plane(bi, cA), gradOut.plane(bi, cA) + cB * plane, gb.plane(bi, 0));
    }
    return {std::move(ga), std::move(gb)};
}

template <typename T>
Tensor4<T> hadamard(const Tensor4<T>& a, const Tensor4<T>& b) {
    if (!a.sameShape(b)) throw ShapeError("hadamard: shape mismatch");
    Tensor4<T> y = a;
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] *= b.data()[i];
    return y;
}

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
    if (!a.sameShape(b)) throw ShapeError("add: shape mismatch");
    Tensor4<T> y = a;
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] += b.data()[i];
    return y;
}

template <typename T>
Tensor4<T> scale(const Tensor4<T>& a, T s) {
    Tensor4<T> y = a;
    for (size_t i = 0; i < y.size(); ++i) y.data()[i] *= s;
    return y;
}

/// 2x2 average pooling, stride 2. Dimensions must be even.
template <typename T>
Tensor4<T> avgPool2(const Tensor4<T>& x) {
    if (x.height() % 2 || x.width() % 2) throw ShapeError("avgPool2: odd dimensions");
    const int h = x.height() / 2, w = x.width() / 2;
    Tensor4<T> y(x.batch(), x.channels(), h, w);
    for (int bi = 0; bi < x.batch(); ++bi)
        for (int c = 0; c < x.channels(); ++c) {
            const T* in = x.plane(bi, c);
            T* out = y.plane(bi, c);
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx) {
                    const T* p = in + 2 * yy * x.width() + 2 * xx;
                    out[yy * w + xx] =
                        T(0.25) * (p[0] + p[1] + p[x.width()] + p[x.width() + 1]);
                }
        }
    return y;
}

template <typename T>
Tensor4<T> avgPool2Backward(const Tensor4<T>& gradOut, int inH, int inW) {
    Tensor4<T> g(gradOut.batch(), gradOut.channels(), inH, inW);
    for (int bi = 0; bi < gradOut.batch(); ++bi)
        for (int c = 0; c < gradOut.channels(); ++c) {
            const T* go = gradOut.plane(bi, c);
            T* gx = g.plane(bi, c);
            for (int yy = 0; yy < gradOut.height(); ++yy)
                for (int xx = 0; xx < gradOut.width(); ++xx) {
                    const T v = T(0.25) * go[yy * gradOut.width() + xx];
                    T* p = gx + 2 * yy * inW + 2 * xx;
                    p[0] += v;
                    p[1] += v;
                    p[inW] += v;
                    p[inW + 1] += v;
                }
        }
    return g;
}

/// Nearest-neighbor 2x upsampling.
template <typename T>
Tensor4<T> upsample2(const Tensor4<T>& x) {
    const int h = x.height() * 2, w = x.width() * 2;
    Tensor4<T> y(x.batch(), x.channels(), h, w);
    for (int bi = 0; bi < x.batch(); ++bi)
        for (int c = 0; c < x.channels(); ++c) {
            const T* in = x.plane(bi, c);
            T* out = y.plane(bi, c);
            for (int yy = 0; yy < h; ++yy)
                for (int xx = 0; xx < w; ++xx)
                    out[yy * w + xx] = in[(yy / 2) * x.width() + (xx / 2)];
        }
    return y;
}

template <typename T>
Tensor4<T> upsample2Backward(const Tensor4<T>& gradOut) {
    if (gradOut.height() % 2 || gradOut.width() % 2)
        throw ShapeError("upsample2Backward: odd dimensions");
    const int h = gradOut.height() / 2, w = gradOut.width() / 2;
    Tensor4<T> g(gradOut.batch(), gradOut.channels(), h, w);
    for (int bi = 0; bi < gradOut.batch(); ++bi)
        for (int c = 0; c < gradOut.channels(); ++c) {
            const T* go = gradOut.plane(bi, c);
            T* gx = g.plane(bi, c);
            for (int yy = 0; yy < gradOut.height(); ++yy)
                for (int xx = 0; xx < gradOut.width(); ++xx)
                    gx[(yy / 2) * w + (xx / 2)] += go[yy * gradOut.width() + xx];
        }
    return g;
}

}  // namespace stwarp
