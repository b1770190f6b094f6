#pragma once

// Deterministic evaluation of the invariant as a contraction of one
// invariant-subspace projector per vertex.
//
// Each edge e contributes Tr rho(h_u) rho(h_w)^dagger, so its end at u
// carries the plain representation and its end at w the conjugate one.
// Integrating the vertex variable out replaces the product of all
// representation matrices meeting a vertex by the orthogonal projector
// onto the invariant subspace of their tensor product. An end's tensor
// index is the pair (m, m') of row and column indices of its matrix; an
// edge identifies the pair at end 0 with the pair at end 1.

#include "spinnet/graph.hpp"
#include "spinnet/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spinnet {

inline constexpr std::size_t kDefaultDimensionCap = 1'000'000;

/// SPINNET_DIM_CAP if set to a positive integer, else the default cap.
inline std::size_t dimension_cap_from_env() {
    const char* env = std::getenv("SPINNET_DIM_CAP");
    if (!env || !*env) return kDefaultDimensionCap;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || v == 0) throw GraphError("SPINNET_DIM_CAP must be a positive integer");
    return static_cast<std::size_t>(v);
}

/// Orthogonal projector onto the SU(2)-invariant vectors of a tensor
/// product of spin representations, some of them conjugated.
struct VertexTensor {
    std::vector<Spin> spins;
    std::vector<bool> dual_flags;
    /// Operator on the product space; rows and columns are multi-indices
    /// (i_1, ..., i_r) with the last end fastest, i_k = j_k - m_k.
    Eigen::MatrixXd projector;
    /// Orthonormal basis of the invariant subspace, one column per vector.
    Eigen::MatrixXd basis;

    std::size_t product_dimension() const { return static_cast<std::size_t>(projector.rows()); }
    std::size_t rank() const { return static_cast<std::size_t>(basis.cols()); }
    std::size_t entry_count() const { return product_dimension() * product_dimension(); }

    /// The projector as a tensor with one axis per end, axis k indexed by
    /// the pair (i_k, i'_k) of dimension (n_k + 1)^2.
    Tensor to_tensor(const std::vector<std::size_t>& labels) const {
        const std::size_t r = spins.size();
        if (labels.size() != r) throw ComputationError("one label per end required");
        std::vector<std::size_t> dims;
        for (Spin s : spins) dims.push_back(static_cast<std::size_t>(s) + 1);

        // Row-major [i_1..i_r, i'_1..i'_r] view of the operator.
        std::vector<double> flat(entry_count());
        const std::size_t d = product_dimension();
        for (std::size_t row = 0; row < d; ++row)
            for (std::size_t col = 0; col < d; ++col) flat[row * d + col] = projector(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        std::vector<std::size_t> axis_dims = dims;
        axis_dims.insert(axis_dims.end(), dims.begin(), dims.end());
        std::vector<std::size_t> axis_labels(2 * r);
        for (std::size_t k = 0; k < r; ++k) axis_labels[k] = axis_labels[r + k] = k;
        Tensor raw(axis_labels, axis_dims, std::move(flat));

        std::vector<std::size_t> order;
        for (std::size_t k = 0; k < r; ++k) {
            order.push_back(k);
            order.push_back(r + k);
        }
        Tensor interleaved = raw.permuted(order);

        std::vector<std::size_t> pair_dims;
        for (std::size_t k = 0; k < r; ++k) pair_dims.push_back(dims[k] * dims[k]);
        return Tensor(labels, pair_dims, std::vector<double>(interleaved.data()));
    }
};

namespace detail {

/// Doubled weight 2M of a multi-index, with conjugated ends counted negatively.
inline long doubled_weight(const std::vector<Spin>& spins, const std::vector<bool>& duals,
                           const std::vector<std::size_t>& digits) {
    long w = 0;
    for (std::size_t k = 0; k < spins.size(); ++k) {
        long m2 = spins[k] - 2L * static_cast<long>(digits[k]);
        w += duals[k] ? -m2 : m2;
    }
    return w;
}

}  // namespace detail

/// Builds the invariant projector from the joint null space of the total
/// J_z and raising operator. Throws DimensionCapError when the projector
/// would hold more than `cap` entries.
inline VertexTensor invariant_projector(const std::vector<Spin>& spins, const std::vector<bool>& dual_flags,
                                        std::size_t cap = kDefaultDimensionCap) {
    if (spins.empty()) throw GraphError("invariant_projector needs at least one end");
    if (dual_flags.size() != spins.size()) throw GraphError("one dual flag per end required");

    std::size_t dim = 1;
    for (Spin s : spins) {
        if (s < 0) throw GraphError("negative spin");
        std::size_t f = static_cast<std::size_t>(s) + 1;
        if (dim > std::numeric_limits<std::size_t>::max() / f) throw DimensionCapError(std::numeric_limits<std::size_t>::max(), cap);
        dim *= f;
    }
    if (dim > cap / dim) {
        bool overflow = dim > std::numeric_limits<std::size_t>::max() / dim;
        throw DimensionCapError(overflow ? std::numeric_limits<std::size_t>::max() : dim * dim, cap);
    }

    const std::size_t r = spins.size();
    std::vector<std::size_t> strides(r, 1);
    for (std::size_t k = r; k-- > 1;) strides[k - 1] = strides[k] * (static_cast<std::size_t>(spins[k]) + 1);

    // Enumerate weight-zero and weight-one states.
    std::vector<std::size_t> zero_states, one_states;
    std::vector<long> slot_of(dim, -1);
    std::vector<std::size_t> digits(r, 0);
    for (std::size_t flat = 0; flat < dim; ++flat) {
        long w = detail::doubled_weight(spins, dual_flags, digits);
        if (w == 0) {
            slot_of[flat] = static_cast<long>(zero_states.size());
            zero_states.push_back(flat);
        } else if (w == 2) {
            slot_of[flat] = static_cast<long>(one_states.size());
            one_states.push_back(flat);
        }
        for (std::size_t k = r; k-- > 0;) {
            if (++digits[k] <= static_cast<std::size_t>(spins[k])) break;
            digits[k] = 0;
        }
    }

    VertexTensor vt;
    vt.spins = spins;
    vt.dual_flags = dual_flags;
    vt.projector = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto nz = static_cast<Eigen::Index>(zero_states.size());
    if (nz == 0) {
        vt.basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), 0);
        return vt;
    }

    // Raising operator restricted to weight zero. On a plain end J_+ sends
    // i -> i-1 with coefficient sqrt(i (n-i+1)); on a conjugated end the
    // generator is -J_-, sending i -> i+1 with coefficient -sqrt((n-i)(i+1)).
    Eigen::MatrixXd raise = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(one_states.size()), nz);
    for (Eigen::Index c = 0; c < nz; ++c) {
        std::size_t flat = zero_states[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < r; ++k) {
            const long n = spins[k];
            const long i = static_cast<long>((flat / strides[k]) % (static_cast<std::size_t>(n) + 1));
            long target_i;
            double coeff;
            if (!dual_flags[k]) {
                if (i == 0) continue;
                target_i = i - 1;
                coeff = std::sqrt(static_cast<double>(i * (n - i + 1)));
            } else {
                if (i == n) continue;
                target_i = i + 1;
                coeff = -std::sqrt(static_cast<double>((n - i) * (i + 1)));
            }
            std::size_t target = target_i < i ? flat - strides[k] : flat + strides[k];
            long row = slot_of[target];
            if (row < 0) throw ComputationError("raising operator left the weight-one sector");
            raise(row, c) += coeff;
        }
    }

    Eigen::MatrixXd null_basis;
    if (raise.rows() == 0) {
        null_basis = Eigen::MatrixXd::Identity(nz, nz);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(raise.transpose() * raise);
        if (eig.info() != Eigen::Success) throw ComputationError("eigen-solve failed in invariant_projector");
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < nz; ++i)
            if (eig.eigenvalues()(i) < 1e-9) keep.push_back(i);
        null_basis.resize(nz, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) null_basis.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]);
    }

    vt.basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), null_basis.cols());
    for (Eigen::Index c = 0; c < nz; ++c)
        vt.basis.row(static_cast<Eigen::Index>(zero_states[static_cast<std::size_t>(c)])) = null_basis.row(c);
    vt.projector = vt.basis * vt.basis.transpose();
    return vt;
}

/// One pairwise merge in a contraction: the tensors at positions `left`
/// and `right` (left < right) of the current list are replaced by their
/// contraction at position `left`.
struct ContractionStep {
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t result_size = 0;
};

struct ContractionPlan {
    /// Entry counts of the initial tensors, one per non-isolated vertex.
    std::vector<std::size_t> initial_sizes;
    std::vector<ContractionStep> steps;
    std::size_t max_intermediate = 1;
};

namespace detail {

struct TensorShape {
    std::vector<std::size_t> labels;
    std::vector<std::size_t> dims;
    std::size_t size() const { return Tensor::entry_count(dims); }
};

/// Ends of every vertex in edge order: end 0 plain, end 1 conjugated.
struct VertexEnds {
    std::vector<Spin> spins;
    std::vector<bool> duals;
    std::vector<std::size_t> labels;
};

inline std::vector<VertexEnds> vertex_ends(const LabeledGraph& g) {
    std::vector<VertexEnds> out(g.vertex_count());
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const Edge& e = g.edge(i);
        out[e.end0].spins.push_back(e.spin);
        out[e.end0].duals.push_back(false);
        out[e.end0].labels.push_back(i);
        out[e.end1].spins.push_back(e.spin);
        out[e.end1].duals.push_back(true);
        out[e.end1].labels.push_back(i);
    }
    return out;
}

/// Shape after tracing loop labels.
inline TensorShape traced_shape(const VertexEnds& ends) {
    TensorShape s;
    for (std::size_t k = 0; k < ends.labels.size(); ++k) {
        auto count = std::count(ends.labels.begin(), ends.labels.end(), ends.labels[k]);
        if (count == 1) {
            std::size_t d = static_cast<std::size_t>(ends.spins[k]) + 1;
            s.labels.push_back(ends.labels[k]);
            s.dims.push_back(d * d);
        }
    }
    return s;
}

inline TensorShape merged_shape(const TensorShape& a, const TensorShape& b) {
    TensorShape out;
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        if (std::find(b.labels.begin(), b.labels.end(), a.labels[i]) == b.labels.end()) {
            out.labels.push_back(a.labels[i]);
            out.dims.push_back(a.dims[i]);
        }
    for (std::size_t i = 0; i < b.labels.size(); ++i)
        if (std::find(a.labels.begin(), a.labels.end(), b.labels[i]) == a.labels.end()) {
            out.labels.push_back(b.labels[i]);
            out.dims.push_back(b.dims[i]);
        }
    return out;
}

inline std::vector<TensorShape> initial_shapes(const LabeledGraph& g) {
    std::vector<TensorShape> shapes;
    for (const auto& ends : vertex_ends(g))
        if (!ends.spins.empty()) shapes.push_back(traced_shape(ends));
    return shapes;
}

}  // namespace detail

/// Greedy order: at each step merge the pair whose result is smallest,
/// breaking ties by smaller combined input size and then by position.
inline ContractionPlan plan_contraction(const LabeledGraph& g) {
    auto shapes = detail::initial_shapes(g);
    ContractionPlan plan;
    for (const auto& s : shapes) {
        plan.initial_sizes.push_back(s.size());
        plan.max_intermediate = std::max(plan.max_intermediate, s.size());
    }
    while (shapes.size() > 1) {
        std::size_t best_i = 0, best_j = 1;
        std::size_t best_size = std::numeric_limits<std::size_t>::max();
        std::size_t best_inputs = std::numeric_limits<std::size_t>::max();
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            for (std::size_t j = i + 1; j < shapes.size(); ++j) {
                std::size_t size = detail::merged_shape(shapes[i], shapes[j]).size();
                std::size_t inputs = shapes[i].size() + shapes[j].size();
                if (size < best_size || (size == best_size && inputs < best_inputs)) {
                    best_size = size;
                    best_inputs = inputs;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        shapes[best_i] = detail::merged_shape(shapes[best_i], shapes[best_j]);
        shapes.erase(shapes.begin() + static_cast<std::ptrdiff_t>(best_j));
        plan.steps.push_back({best_i, best_j, best_size});
        plan.max_intermediate = std::max(plan.max_intermediate, best_size);
    }
    return plan;
}

struct ContractOptions {
    std::size_t dimension_cap = kDefaultDimensionCap;
};

/// Vertex tensors in vertex order, isolated vertices skipped.
inline std::vector<Tensor> vertex_tensors(const LabeledGraph& g, const ContractOptions& opts = {}) {
    std::vector<Tensor> out;
    for (const auto& ends : detail::vertex_ends(g)) {
        if (ends.spins.empty()) continue;
        VertexTensor vt = invariant_projector(ends.spins, ends.duals, opts.dimension_cap);
        out.push_back(vt.to_tensor(ends.labels).traced());
    }
    return out;
}

/// Runs `plan` over the vertex tensors of g and applies the global sign.
inline double execute_plan(const LabeledGraph& g, const ContractionPlan& plan, const ContractOptions& opts = {}) {
    // Check the plan against the cap before building anything.
    if (plan.max_intermediate > opts.dimension_cap) throw DimensionCapError(plan.max_intermediate, opts.dimension_cap);
    auto tensors = vertex_tensors(g, opts);
    if (tensors.size() != plan.initial_sizes.size()) throw ComputationError("plan does not match the graph");
    for (const auto& t : tensors) {
        bool all_zero = std::all_of(t.data().begin(), t.data().end(), [](double x) { return x == 0.0; });
        if (all_zero) return 0.0;
    }
    for (const auto& step : plan.steps) {
        if (step.left >= step.right || step.right >= tensors.size()) throw ComputationError("invalid contraction step");
        auto shape = contracted_dims(tensors[step.left].labels(), tensors[step.left].dims(), tensors[step.right].labels(),
                                     tensors[step.right].dims());
        std::size_t size = Tensor::entry_count(shape);
        if (size > opts.dimension_cap) throw DimensionCapError(size, opts.dimension_cap);
        tensors[step.left] = contract(tensors[step.left], tensors[step.right]);
        tensors.erase(tensors.begin() + static_cast<std::ptrdiff_t>(step.right));
    }
    double value = tensors.empty() ? 1.0 : tensors.front().value();
    return g.global_sign() * value;
}

/// The invariant by full projector contraction along the greedy plan.
inline double contract_evaluate(const LabeledGraph& g, const ContractOptions& opts = {}) {
    return execute_plan(g, plan_contraction(g), opts);
}

}  // namespace spinnet
