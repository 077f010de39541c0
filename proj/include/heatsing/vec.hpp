#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <span>

namespace heatsing {

/// Largest spatial dimension supported by the fixed-capacity point type.
inline constexpr int kMaxDim = 8;

/// A point or displacement in R^N, N <= kMaxDim.
///
/// Stored inline so that field and distance kernels, which evaluate
/// millions of points, never touch the heap.
class Vec {
public:
    Vec() = default;

    explicit Vec(int dim) : n_(dim) { assert(dim >= 0 && dim <= kMaxDim); }

    Vec(std::initializer_list<double> values) : n_(static_cast<int>(values.size())) {
        assert(n_ <= kMaxDim);
        std::copy(values.begin(), values.end(), c_.begin());
    }

    static Vec zeros(int dim) { return Vec(dim); }

    static Vec unit(int dim, int axis) {
        Vec v(dim);
        v[axis] = 1.0;
        return v;
    }

    static Vec from(std::span<const double> values) {
        Vec v(static_cast<int>(values.size()));
        std::copy(values.begin(), values.end(), v.c_.begin());
        return v;
    }

    int size() const { return n_; }

    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

    std::span<double> values() { return {c_.data(), static_cast<std::size_t>(n_)}; }
    std::span<const double> values() const { return {c_.data(), static_cast<std::size_t>(n_)}; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n_; ++i) c_[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator-(Vec a) { return a *= -1.0; }

    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDim> c_{};
    int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

/// Axis-aligned box [lo, hi] in R^N.
struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return lo.size(); }

    bool contains(const Vec& x) const {
        for (int i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    Box inflated(double by) const {
        Box b = *this;
        for (int i = 0; i < lo.size(); ++i) {
            b.lo[i] -= by;
            b.hi[i] += by;
        }
        return b;
    }
};

}  // namespace heatsing
