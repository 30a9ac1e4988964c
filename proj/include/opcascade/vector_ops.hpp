#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opcascade/error.hpp"

namespace opcascade {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline bool all_within(std::span<const double> v, double lo, double hi) {
    for (double x : v) {
        if (!(x >= lo && x <= hi)) return false;
    }
    return true;
}

// Scales `v` to unit Euclidean norm; throws NumericalError below `min_norm`.
inline void normalize_in_place(Vector& v, double min_norm = 1e-12) {
    const double n = norm2(v);
    if (!(n >= min_norm) || !std::isfinite(n)) {
        throw NumericalError("cannot normalize vector with norm " + std::to_string(n));
    }
    for (double& x : v) x /= n;
}

inline Vector normalized(Vector v, double min_norm = 1e-12) {
    normalize_in_place(v, min_norm);
    return v;
}

// Immutable, cheaply copyable vector. Message and memory payloads are shared
// between many agents' inboxes and episodic stores, so copies alias one buffer.
class SharedVector {
public:
    SharedVector() : data_(empty_buffer()) {}
    SharedVector(Vector values)  // NOLINT(google-explicit-constructor)
        : data_(std::make_shared<const Vector>(std::move(values))) {}
    SharedVector(std::initializer_list<double> values)
        : data_(std::make_shared<const Vector>(values)) {}

    std::span<const double> span() const noexcept { return *data_; }
    operator std::span<const double>() const noexcept { return *data_; }  // NOLINT
    const Vector& vec() const noexcept { return *data_; }
    std::size_t size() const noexcept { return data_->size(); }
    bool empty() const noexcept { return data_->empty(); }
    double operator[](std::size_t i) const { return (*data_)[i]; }
    auto begin() const noexcept { return data_->begin(); }
    auto end() const noexcept { return data_->end(); }

    friend bool operator==(const SharedVector& a, const SharedVector& b) {
        return a.data_ == b.data_ || *a.data_ == *b.data_;
    }

private:
    static const std::shared_ptr<const Vector>& empty_buffer() {
        static const auto e = std::make_shared<const Vector>();
        return e;
    }

    std::shared_ptr<const Vector> data_;
};

}  // namespace opcascade
