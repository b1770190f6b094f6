#pragma once

// SU(2) as unit quaternions: Haar sampling, characters and the signed
// edge weight (-1)^n Tr rho_n(h1 h2^{-1}).

#include "spinnet/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace spinnet {

/// Conjugacy angle in [0, pi].
struct Angle {
    double phi = 0.0;

    Angle() = default;
    explicit Angle(double radians) : phi(std::clamp(radians, 0.0, std::numbers::pi)) {}
};

/// Unit quaternion w + xi + yj + zk; w is half the trace of the element in
/// the defining representation.
class GroupElement {
public:
    GroupElement() = default;

    /// Renormalizes; the zero quaternion is rejected.
    GroupElement(double w, double x, double y, double z) {
        double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (!(n > 0.0) || !std::isfinite(n)) throw ComputationError("cannot normalize a zero or non-finite quaternion");
        q_ = {w / n, x / n, y / n, z / n};
    }

    static GroupElement identity() { return {}; }

    double w() const noexcept { return q_[0]; }
    double x() const noexcept { return q_[1]; }
    double y() const noexcept { return q_[2]; }
    double z() const noexcept { return q_[3]; }
    const std::array<double, 4>& components() const noexcept { return q_; }

    GroupElement inverse() const { return raw(q_[0], -q_[1], -q_[2], -q_[3]); }
    GroupElement operator-() const { return raw(-q_[0], -q_[1], -q_[2], -q_[3]); }

    friend GroupElement operator*(const GroupElement& a, const GroupElement& b) {
        const auto& p = a.q_;
        const auto& q = b.q_;
        return GroupElement(p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
                            p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
                            p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
                            p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]);
    }

    double norm() const noexcept { return std::sqrt(dot(*this, *this)); }

    /// Euclidean inner product in R^4; equals cos of the relative angle.
    friend double dot(const GroupElement& a, const GroupElement& b) noexcept {
        return a.q_[0] * b.q_[0] + a.q_[1] * b.q_[1] + a.q_[2] * b.q_[2] + a.q_[3] * b.q_[3];
    }

private:
    static GroupElement raw(double w, double x, double y, double z) {
        GroupElement g;
        g.q_ = {w, x, y, z};
        return g;
    }

    std::array<double, 4> q_{1.0, 0.0, 0.0, 0.0};
};

/// Uniform point of S^3: a normalized vector of four standard Gaussians.
template <class Rng>
GroupElement haar_sample(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        double w = normal(rng), x = normal(rng), y = normal(rng), z = normal(rng);
        if (w * w + x * x + y * y + z * z > 1e-300) return GroupElement(w, x, y, z);
    }
}

/// Angle between h1 and h2 as unit vectors of R^4. cos(phi) is half the
/// trace of h1 h2^{-1}.
inline Angle relative_angle(const GroupElement& h1, const GroupElement& h2) {
    return Angle(std::acos(std::clamp(dot(h1, h2), -1.0, 1.0)));
}

/// Chebyshev U_n(c) by the three-term recurrence; the spin-n character at
/// an element with half-trace c.
inline double character_from_cos(Spin n, double c) noexcept {
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 2.0 * c;
    for (Spin k = 1; k < n; ++k) {
        double next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// sin((n+1) phi) / sin(phi), with the removable singularities at 0 and pi
/// handled by the recurrence.
inline double character(Spin n, Angle a) noexcept { return character_from_cos(n, std::cos(a.phi)); }

/// (-1)^n Tr rho_n(h1 h2^{-1}); symmetric in its group arguments.
inline double edge_weight(Spin n, const GroupElement& h1, const GroupElement& h2) noexcept {
    double c = std::clamp(dot(h1, h2), -1.0, 1.0);
    return sign_power(n) * character_from_cos(n, c);
}

}  // namespace spinnet
