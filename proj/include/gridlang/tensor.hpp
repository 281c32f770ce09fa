#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace gridlang {

// Dense row-major tensor with up to three axes (h, w, c).
// Vectors are stored as (n, 1, 1); flat index = (i * w + j) * c + k.
struct Tensor {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int h_, int w_, int c_) : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, 0.0) {}

    static Tensor vec(int n) { return Tensor(n, 1, 1); }

    int numel() const { return h * w * c; }

    double& at(int i, int j, int k) { return v[(static_cast<size_t>(i) * w + j) * c + k]; }
    const double& at(int i, int j, int k) const {
        return v[(static_cast<size_t>(i) * w + j) * c + k];
    }

    // Same storage, new axis interpretation.
    Tensor reshaped(int nh, int nw, int nc) const {
        if (nh * nw * nc != numel()) throw std::invalid_argument("tensor reshape: element count mismatch");
        Tensor t = *this;
        t.h = nh; t.w = nw; t.c = nc;
        return t;
    }

    bool same_shape(const Tensor& o) const { return h == o.h && w == o.w && c == o.c; }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.h, t.w, t.c); }

inline double l2_norm(const Tensor& t) {
    double s = 0;
    for (double x : t.v) s += x * x;
    return std::sqrt(s);
}

inline double l2_norm(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x * x;
    return std::sqrt(s);
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("tensor subtraction: shape mismatch");
    Tensor r = a;
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] -= b.v[i];
    return r;
}

inline void add_scaled(Tensor& dst, const Tensor& src, double scale) {
    if (!dst.same_shape(src)) throw std::invalid_argument("tensor add_scaled: shape mismatch");
    for (size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += scale * src.v[i];
}

// Deterministic RNG used everywhere. Raw 64-bit output is mapped to doubles
// by hand so results do not depend on libstdc++'s distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform in {0, ..., n-1}
    int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

private:
    std::mt19937_64 gen_;
};

// splitmix64, used to derive independent stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace gridlang
