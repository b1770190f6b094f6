#pragma once

// Direct Monte Carlo estimate of the invariant over SU(2)^V.
//
// Samples are processed in fixed-size chunks. Chunk i draws from its own
// generator seeded from (seed, i) and the per-chunk statistics are reduced
// in chunk order, so the result does not depend on the worker count.

#include "spinnet/graph.hpp"
#include "spinnet/su2.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace spinnet {

inline constexpr std::size_t kDefaultChunkSize = 4096;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
inline std::mt19937_64 chunk_stream(std::uint64_t seed, std::uint64_t chunk) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(chunk + 0x632be59bd9b4e019ULL)));
}

/// Count, mean and sum of squared deviations of one batch.
struct BatchStats {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    /// Pairwise merge; applied left to right over chunk index.
    void merge(const BatchStats& o) noexcept {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        double n = static_cast<double>(count + o.count);
        double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / n;
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
        count += o.count;
    }
};

/// Runs fn(chunk_index, chunk_samples) for every chunk on `workers`
/// threads and returns the results in chunk order.
template <class Fn>
auto run_chunks(std::uint64_t n_samples, std::size_t chunk_size, std::size_t workers, Fn&& fn)
    -> std::vector<decltype(fn(std::uint64_t{}, std::uint64_t{}))> {
    using Result = decltype(fn(std::uint64_t{}, std::uint64_t{}));
    if (chunk_size == 0) throw GraphError("chunk size must be positive");
    const std::uint64_t n_chunks = (n_samples + chunk_size - 1) / chunk_size;
    std::vector<Result> results(n_chunks);
    auto size_of = [&](std::uint64_t c) {
        return std::min<std::uint64_t>(chunk_size, n_samples - c * chunk_size);
    };

    workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, n_chunks));
    if (workers == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) results[c] = fn(c, size_of(c));
        return results;
    }

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t c = next++; c < n_chunks; c = next++) {
                try {
                    results[c] = fn(c, size_of(c));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n_chunks;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

/// Product of edge weights at one point of SU(2)^V; this already carries
/// the global (-1)^{sum of spins} sign.
inline double sample_integrand(std::span<const Edge> edges, std::span<const GroupElement> hs) noexcept {
    double prod = 1.0;
    for (const auto& e : edges) {
        // A loop sees h h^{-1} = 1 exactly; dot(h, h) would be 1 only up to rounding.
        prod *= e.is_loop() ? sign_power(e.spin) * (static_cast<double>(e.spin) + 1.0)
                            : edge_weight(e.spin, hs[e.end0], hs[e.end1]);
    }
    return prod;
}

inline double sample_integrand(const LabeledGraph& g, std::span<const GroupElement> hs) noexcept {
    return sample_integrand(std::span<const Edge>(g.edges()), hs);
}

/// Largest possible |integrand|: the product of representation dimensions.
inline double integrand_bound(std::span<const Edge> edges) noexcept {
    double b = 1.0;
    for (const auto& e : edges) b *= static_cast<double>(e.spin) + 1.0;
    return b;
}

struct MCOptions {
    std::size_t chunk_size = kDefaultChunkSize;
    /// Pin the first vertex of every connected component to the identity.
    bool gauge_fix = true;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t chunk_size = kDefaultChunkSize;
    std::vector<double> batch_means;
    std::vector<std::uint64_t> batch_sizes;
    /// Sum of squared deviations from the mean over all samples.
    double m2 = 0.0;
};

inline MCEstimate estimate_from_batches(const std::vector<BatchStats>& batches, std::uint64_t seed,
                                        std::size_t chunk_size) {
    MCEstimate est;
    est.seed = seed;
    est.chunk_size = chunk_size;
    BatchStats total;
    for (const auto& b : batches) {
        total.merge(b);
        est.batch_means.push_back(b.mean);
        est.batch_sizes.push_back(b.count);
    }
    est.mean = total.mean;
    est.n_samples = total.count;
    est.m2 = total.m2;
    if (total.count > 1) {
        double var = total.m2 / static_cast<double>(total.count - 1);
        est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(total.count));
    }
    return est;
}

inline MCEstimate mc_evaluate(const LabeledGraph& g, std::uint64_t n_samples, std::uint64_t seed,
                              std::size_t workers = 1, const MCOptions& opts = {}) {
    if (n_samples == 0) throw GraphError("n_samples must be positive");
    for (const auto& e : g.edges())
        if (e.end0 >= g.vertex_count() || e.end1 >= g.vertex_count())
            throw GraphError("edge endpoint outside the vertex set");

    const std::size_t nv = g.vertex_count();
    std::vector<bool> pinned(nv, false);
    if (opts.gauge_fix) {
        auto comp = connected_components(g);
        std::vector<bool> seen;
        for (VertexId v = 0; v < nv; ++v) {
            if (comp[v] >= seen.size()) seen.resize(comp[v] + 1, false);
            if (!seen[comp[v]]) {
                seen[comp[v]] = true;
                pinned[v] = true;
            }
        }
    }
    const std::vector<Edge> edges = g.edges();
    const double bound = integrand_bound(edges) * (1.0 + 1e-9);

    auto batches = run_chunks(n_samples, opts.chunk_size, workers, [&](std::uint64_t chunk, std::uint64_t count) {
        auto rng = chunk_stream(seed, chunk);
        std::vector<GroupElement> hs(nv);
        BatchStats stats;
        for (std::uint64_t s = 0; s < count; ++s) {
            for (VertexId v = 0; v < nv; ++v) hs[v] = pinned[v] ? GroupElement::identity() : haar_sample(rng);
            double x = sample_integrand(edges, hs);
            if (!(std::abs(x) <= bound)) throw ComputationError("integrand outside its a priori bound");
            stats.add(x);
        }
        return stats;
    });
    return estimate_from_batches(batches, seed, opts.chunk_size);
}

struct ConvergenceReport {
    std::vector<double> running_means;
    double batch_variance = 0.0;
    /// Every batch mean identical and zero spread: a constant integrand.
    bool exact_integrand = false;
    /// Last-quarter mean differs from the global mean by more than 5 stderr.
    bool non_stationary = false;
    double last_quarter_mean = 0.0;
    /// Further samples needed to bring the standard error to target_std_error.
    std::uint64_t suggested_additional_samples = 0;
};

inline ConvergenceReport convergence_report(const MCEstimate& est, double target_std_error = 1e-3) {
    const std::size_t nb = est.batch_means.size();
    if (nb < 2) throw GraphError("convergence report needs at least 2 batches");
    if (est.batch_sizes.size() != nb) throw GraphError("batch sizes and means disagree");

    ConvergenceReport r;
    double weighted = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        weighted += est.batch_means[i] * static_cast<double>(est.batch_sizes[i]);
        count += static_cast<double>(est.batch_sizes[i]);
        r.running_means.push_back(weighted / count);
    }

    double mean_of_batches = 0.0;
    for (double m : est.batch_means) mean_of_batches += m;
    mean_of_batches /= static_cast<double>(nb);
    for (double m : est.batch_means) r.batch_variance += (m - mean_of_batches) * (m - mean_of_batches);
    r.batch_variance /= static_cast<double>(nb - 1);
    r.exact_integrand = r.batch_variance == 0.0 && est.m2 == 0.0;

    const std::size_t quarter = std::max<std::size_t>(1, nb / 4);
    double tail = 0.0, tail_count = 0.0;
    for (std::size_t i = nb - quarter; i < nb; ++i) {
        tail += est.batch_means[i] * static_cast<double>(est.batch_sizes[i]);
        tail_count += static_cast<double>(est.batch_sizes[i]);
    }
    r.last_quarter_mean = tail / tail_count;
    r.non_stationary = std::abs(r.last_quarter_mean - est.mean) > 5.0 * est.std_error;

    if (est.std_error > target_std_error && target_std_error > 0.0) {
        double ratio = est.std_error / target_std_error;
        double needed = std::ceil(static_cast<double>(est.n_samples) * ratio * ratio);
        r.suggested_additional_samples = static_cast<std::uint64_t>(needed) - est.n_samples;
    }
    return r;
}

}  // namespace spinnet
