#pragma once

// Group elements as unit normals in R^4 and the 4-simplex they bound.
//
// Five normals n_i close a simplex when the 4x5 matrix [n_0 ... n_4] has a
// one-dimensional null space spanned by a vector of one sign; that vector,
// scaled to sum 1, gives the Minkowski facet weights.

#include "spinnet/error.hpp"
#include "spinnet/montecarlo.hpp"
#include "spinnet/su2.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinnet {

struct UnitVector4 {
    std::array<double, 4> components{1.0, 0.0, 0.0, 0.0};

    double norm() const { return std::sqrt(dot(*this, *this)); }

    friend double dot(const UnitVector4& a, const UnitVector4& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i) s += a.components[i] * b.components[i];
        return s;
    }
};

inline UnitVector4 to_unit_vector(const GroupElement& h) { return {h.components()}; }

/// Unit vector along v; throws on a zero vector.
inline UnitVector4 normalized(std::array<double, 4> v) {
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (!(n > 0.0)) throw GeometryError("cannot normalize a zero vector");
    for (double& x : v) x /= n;
    return {v};
}

inline Angle vector_angle(const UnitVector4& a, const UnitVector4& b) {
    return Angle(std::acos(std::clamp(dot(a, b), -1.0, 1.0)));
}

using AngleMatrix = std::vector<std::vector<Angle>>;

inline AngleMatrix angle_matrix(std::span<const UnitVector4> vs) {
    if (vs.size() < 2) throw GeometryError("angle matrix needs at least 2 vectors");
    AngleMatrix m(vs.size(), std::vector<Angle>(vs.size()));
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j) m[i][j] = m[j][i] = vector_angle(vs[i], vs[j]);
    return m;
}

inline AngleMatrix angle_matrix(std::span<const GroupElement> hs) {
    std::vector<UnitVector4> vs;
    vs.reserve(hs.size());
    for (const auto& h : hs) vs.push_back(to_unit_vector(h));
    return angle_matrix(std::span<const UnitVector4>(vs));
}

/// Vertex pairs of K5 in the order spins and angles are listed:
/// (0,1) (0,2) (0,3) (0,4) (1,2) (1,3) (1,4) (2,3) (2,4) (3,4).
inline constexpr std::array<std::array<std::size_t, 2>, 10> kK5Pairs{
    {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

struct SimplexGeometry {
    std::array<UnitVector4, 5> normals;
    /// Minkowski weights, all positive, summing to 1.
    std::array<double, 5> weights{};
    /// Pairwise vector angles between normals; zero diagonal.
    std::array<std::array<Angle, 5>, 5> angles{};

    /// The ten off-diagonal angles in K5 pair order.
    std::array<double, 10> dihedral_data() const {
        std::array<double, 10> out{};
        for (std::size_t k = 0; k < 10; ++k) out[k] = angles[kK5Pairs[k][0]][kK5Pairs[k][1]].phi;
        return out;
    }
};

enum class SimplexStatus { simplex, degenerate, non_simplex };

inline std::string_view to_string(SimplexStatus s) {
    switch (s) {
        case SimplexStatus::simplex: return "simplex";
        case SimplexStatus::degenerate: return "degenerate";
        case SimplexStatus::non_simplex: return "non_simplex";
    }
    return "unknown";
}

struct SimplexOutcome {
    SimplexStatus status = SimplexStatus::degenerate;
    /// Present only for a simplex.
    std::optional<SimplexGeometry> geometry;
    /// Null vector scaled to unit 1-norm with a nonnegative sum; all zero
    /// when the null space is not one-dimensional. Mixed signs are kept
    /// as found: no orientation is preferred.
    std::array<double, 5> null_vector{};
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kWeightTolerance = 1e-12;

/// Null space analysis without throwing. A null vector with a zero entry
/// means four of the normals are already dependent, which is reported as
/// degenerate.
inline SimplexOutcome try_reconstruct_simplex(const std::array<UnitVector4, 5>& normals) {
    Eigen::Matrix<double, 4, 5> m;
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 4; ++i) m(i, j) = normals[static_cast<std::size_t>(j)].components[static_cast<std::size_t>(i)];

    SimplexOutcome out;
    Eigen::JacobiSVD<Eigen::Matrix<double, 4, 5>> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(3) <= kRankTolerance * sv(0)) return out;

    Eigen::Matrix<double, 5, 1> v = svd.matrixV().col(4);
    double l1 = v.cwiseAbs().sum();
    v /= l1;
    if (v.sum() < 0.0) v = -v;
    for (int i = 0; i < 5; ++i) out.null_vector[static_cast<std::size_t>(i)] = v(i);

    bool pos = true, neg = true;
    for (int i = 0; i < 5; ++i) {
        if (std::abs(v(i)) <= kWeightTolerance) return out;
        pos = pos && v(i) > 0.0;
        neg = neg && v(i) < 0.0;
    }
    if (!pos && !neg) {
        out.status = SimplexStatus::non_simplex;
        return out;
    }

    SimplexGeometry geo;
    geo.normals = normals;
    double total = v.sum();
    for (std::size_t i = 0; i < 5; ++i) geo.weights[i] = v(static_cast<Eigen::Index>(i)) / total;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) geo.angles[i][j] = geo.angles[j][i] = vector_angle(normals[i], normals[j]);
    out.status = SimplexStatus::simplex;
    out.geometry = geo;
    return out;
}

inline SimplexGeometry reconstruct_simplex(const std::array<UnitVector4, 5>& normals) {
    auto r = try_reconstruct_simplex(normals);
    if (r.status == SimplexStatus::degenerate) throw GeometryError("degenerate: normals do not span R^4 in general position");
    if (r.status == SimplexStatus::non_simplex) throw GeometryError("non_simplex: null vector has mixed signs");
    return *r.geometry;
}

/// Outward normals of the regular 4-simplex: pairwise dot -1/4.
inline std::array<UnitVector4, 5> regular_simplex_normals() {
    // Centered basis vectors of R^5 expressed in an orthonormal basis of
    // the hyperplane orthogonal to (1,1,1,1,1).
    std::array<UnitVector4, 5> out;
    for (std::size_t i = 0; i < 5; ++i) {
        std::array<double, 4> c{};
        for (std::size_t k = 1; k <= 4; ++k) {
            // b_k = (1,...,1, -k, 0,...) / sqrt(k(k+1)) with k ones.
            double coord = i < k ? 1.0 : (i == k ? -static_cast<double>(k) : 0.0);
            c[k - 1] = coord / std::sqrt(static_cast<double>(k * (k + 1)));
        }
        out[i] = normalized(c);
    }
    return out;
}

struct GeometrySample {
    std::uint64_t index = 0;
    std::array<GroupElement, 5> elements;
    SimplexOutcome outcome;
    /// Signed product of the ten K5 edge weights.
    double integrand = 0.0;
};

inline double k5_integrand(const std::array<Spin, 10>& spins, const std::array<GroupElement, 5>& hs) {
    double prod = 1.0;
    for (std::size_t k = 0; k < 10; ++k) prod *= edge_weight(spins[k], hs[kK5Pairs[k][0]], hs[kK5Pairs[k][1]]);
    return prod;
}

inline LabeledGraph k5_graph(const std::array<Spin, 10>& spins) {
    LabeledGraph g;
    for (int i = 0; i < 5; ++i) g.add_vertex("v" + std::to_string(i));
    for (std::size_t k = 0; k < 10; ++k) g.add_edge(kK5Pairs[k][0], kK5Pairs[k][1], spins[k]);
    return g;
}

/// Samples of one chunk: five Haar elements per sample drawn from the
/// chunk's own stream, no vertex pinned.
inline std::vector<GeometrySample> geometry_chunk(const std::array<Spin, 10>& spins, std::uint64_t seed,
                                                  std::uint64_t chunk, std::uint64_t count, std::size_t chunk_size) {
    auto rng = chunk_stream(seed, chunk);
    std::vector<GeometrySample> out(count);
    for (std::uint64_t s = 0; s < count; ++s) {
        auto& g = out[s];
        g.index = chunk * chunk_size + s;
        for (auto& h : g.elements) h = haar_sample(rng);
        std::array<UnitVector4, 5> normals;
        for (std::size_t i = 0; i < 5; ++i) normals[i] = to_unit_vector(g.elements[i]);
        g.outcome = try_reconstruct_simplex(normals);
        g.integrand = k5_integrand(spins, g.elements);
    }
    return out;
}

/// Streams every sample to sink in index order. Chunks are computed
/// `workers` at a time in windows, so memory stays bounded.
template <class Sink>
void for_each_geometry(const std::array<Spin, 10>& spins, std::uint64_t n_samples, std::uint64_t seed,
                       std::size_t workers, Sink&& sink, std::size_t chunk_size = kDefaultChunkSize) {
    if (n_samples == 0) throw GeometryError("n_samples must be positive");
    if (chunk_size == 0) throw GeometryError("chunk size must be positive");
    for (Spin s : spins)
        if (s < 0) throw GraphError("negative spin");
    const std::uint64_t window_chunks = 4 * std::max<std::size_t>(1, workers);
    const std::uint64_t n_chunks = (n_samples + chunk_size - 1) / chunk_size;
    for (std::uint64_t base = 0; base < n_chunks; base += window_chunks) {
        std::uint64_t first_sample = base * chunk_size;
        std::uint64_t window_samples = std::min<std::uint64_t>(n_samples - first_sample, window_chunks * chunk_size);
        auto chunks = run_chunks(window_samples, chunk_size, workers, [&](std::uint64_t c, std::uint64_t count) {
            return geometry_chunk(spins, seed, base + c, count, chunk_size);
        });
        for (const auto& chunk : chunks)
            for (const auto& s : chunk) sink(s);
    }
}

struct GeometrySummary {
    /// Mean and standard error of the integrand, batched per chunk.
    MCEstimate integrand;
    std::uint64_t simplex = 0;
    std::uint64_t degenerate = 0;
    std::uint64_t non_simplex = 0;
};

inline GeometrySummary sample_geometries(const std::array<Spin, 10>& spins, std::uint64_t n_samples, std::uint64_t seed,
                                         std::size_t workers = 1, std::size_t chunk_size = kDefaultChunkSize) {
    GeometrySummary out;
    std::vector<BatchStats> batches;
    for_each_geometry(
        spins, n_samples, seed, workers,
        [&](const GeometrySample& s) {
            if (s.index % chunk_size == 0) batches.emplace_back();
            batches.back().add(s.integrand);
            switch (s.outcome.status) {
                case SimplexStatus::simplex: ++out.simplex; break;
                case SimplexStatus::degenerate: ++out.degenerate; break;
                case SimplexStatus::non_simplex: ++out.non_simplex; break;
            }
        },
        chunk_size);
    out.integrand = estimate_from_batches(batches, seed, chunk_size);
    return out;
}

}  // namespace spinnet
