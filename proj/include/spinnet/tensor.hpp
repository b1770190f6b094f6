#pragma once

// Dense real tensors with one label per axis. Two tensors contract over
// the labels they share.

#include "spinnet/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace spinnet {

class Tensor {
public:
    Tensor() : data_{1.0} {}

    Tensor(std::vector<std::size_t> labels, std::vector<std::size_t> dims, std::vector<double> data)
        : labels_(std::move(labels)), dims_(std::move(dims)), data_(std::move(data)) {
        if (labels_.size() != dims_.size()) throw ComputationError("tensor labels and dims differ in rank");
        if (data_.size() != entry_count(dims_)) throw ComputationError("tensor data does not match its shape");
    }

    static Tensor scalar(double v) {
        Tensor t;
        t.data_[0] = v;
        return t;
    }

    static std::size_t entry_count(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    const std::vector<std::size_t>& labels() const noexcept { return labels_; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    const std::vector<double>& data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t rank() const noexcept { return dims_.size(); }
    bool is_scalar() const noexcept { return dims_.empty(); }
    double value() const {
        if (!is_scalar()) throw ComputationError("tensor is not a scalar");
        return data_[0];
    }

    /// Reorders axes so that new axis k is old axis order[k].
    Tensor permuted(const std::vector<std::size_t>& order) const {
        const std::size_t r = rank();
        std::vector<std::size_t> new_dims(r), new_labels(r);
        for (std::size_t k = 0; k < r; ++k) {
            new_dims[k] = dims_[order[k]];
            new_labels[k] = labels_[order[k]];
        }
        std::vector<std::size_t> old_strides(r, 1);
        for (std::size_t k = r; k-- > 1;) old_strides[k - 1] = old_strides[k] * dims_[k];

        std::vector<double> out(data_.size());
        std::vector<std::size_t> idx(r, 0);
        std::size_t src = 0;
        for (std::size_t dst = 0; dst < out.size(); ++dst) {
            out[dst] = data_[src];
            for (std::size_t k = r; k-- > 0;) {
                src += old_strides[order[k]];
                if (++idx[k] < new_dims[k]) break;
                src -= old_strides[order[k]] * new_dims[k];
                idx[k] = 0;
            }
        }
        return Tensor(std::move(new_labels), std::move(new_dims), std::move(out));
    }

    /// Sums over every pair of axes that carry the same label.
    Tensor traced() const {
        std::vector<std::size_t> order;
        std::vector<std::size_t> pairs;
        std::vector<bool> used(rank(), false);
        for (std::size_t a = 0; a < rank(); ++a) {
            if (used[a]) continue;
            for (std::size_t b = a + 1; b < rank(); ++b) {
                if (!used[b] && labels_[a] == labels_[b]) {
                    if (dims_[a] != dims_[b]) throw ComputationError("traced axes differ in dimension");
                    used[a] = used[b] = true;
                    pairs.push_back(a);
                    pairs.push_back(b);
                    break;
                }
            }
        }
        if (pairs.empty()) return *this;
        for (std::size_t a = 0; a < rank(); ++a)
            if (!used[a]) order.push_back(a);
        const std::size_t free_count = order.size();
        order.insert(order.end(), pairs.begin(), pairs.end());
        Tensor p = permuted(order);

        std::vector<std::size_t> free_dims(p.dims_.begin(), p.dims_.begin() + static_cast<std::ptrdiff_t>(free_count));
        std::vector<std::size_t> free_labels(p.labels_.begin(),
                                             p.labels_.begin() + static_cast<std::ptrdiff_t>(free_count));
        std::vector<std::size_t> pair_dims;
        for (std::size_t k = free_count; k < p.rank(); k += 2) pair_dims.push_back(p.dims_[k]);

        const std::size_t block = entry_count(std::vector<std::size_t>(p.dims_.begin() + static_cast<std::ptrdiff_t>(free_count), p.dims_.end()));
        const std::size_t free_size = entry_count(free_dims);
        std::vector<double> out(free_size, 0.0);
        // Offsets of diagonal entries inside one block of paired axes.
        std::vector<std::size_t> diag{0};
        std::size_t stride = block;
        for (std::size_t d : pair_dims) {
            stride /= d * d;
            std::vector<std::size_t> next;
            for (std::size_t off : diag)
                for (std::size_t i = 0; i < d; ++i) next.push_back(off + i * (d + 1) * stride);
            diag = std::move(next);
        }
        for (std::size_t f = 0; f < free_size; ++f) {
            double s = 0.0;
            for (std::size_t off : diag) s += p.data_[f * block + off];
            out[f] = s;
        }
        return Tensor(std::move(free_labels), std::move(free_dims), std::move(out));
    }

private:
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// Shape that contracting a and b would produce: labels of a not in b,
/// then labels of b not in a.
inline std::vector<std::size_t> contracted_dims(const std::vector<std::size_t>& la, const std::vector<std::size_t>& da,
                                                const std::vector<std::size_t>& lb, const std::vector<std::size_t>& db) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < la.size(); ++i)
        if (std::find(lb.begin(), lb.end(), la[i]) == lb.end()) out.push_back(da[i]);
    for (std::size_t i = 0; i < lb.size(); ++i)
        if (std::find(la.begin(), la.end(), lb[i]) == la.end()) out.push_back(db[i]);
    return out;
}

/// Contracts every label shared by a and b (an outer product if none).
inline Tensor contract(const Tensor& a, const Tensor& b) {
    std::vector<std::size_t> free_a, shared_a, free_b, shared_b;
    for (std::size_t i = 0; i < a.rank(); ++i) {
        auto it = std::find(b.labels().begin(), b.labels().end(), a.labels()[i]);
        if (it == b.labels().end()) {
            free_a.push_back(i);
        } else {
            shared_a.push_back(i);
            shared_b.push_back(static_cast<std::size_t>(it - b.labels().begin()));
        }
    }
    for (std::size_t j = 0; j < b.rank(); ++j)
        if (std::find(shared_b.begin(), shared_b.end(), j) == shared_b.end()) free_b.push_back(j);

    std::size_t k = 1;
    for (std::size_t i = 0; i < shared_a.size(); ++i) {
        if (a.dims()[shared_a[i]] != b.dims()[shared_b[i]]) throw ComputationError("contracted axes differ in dimension");
        k *= a.dims()[shared_a[i]];
    }

    std::vector<std::size_t> order_a = free_a;
    order_a.insert(order_a.end(), shared_a.begin(), shared_a.end());
    std::vector<std::size_t> order_b = shared_b;
    order_b.insert(order_b.end(), free_b.begin(), free_b.end());
    Tensor pa = a.permuted(order_a);
    Tensor pb = b.permuted(order_b);

    const std::size_t rows = pa.size() / k;
    const std::size_t cols = pb.size() / k;
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> ma(pa.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
    Eigen::Map<const RowMat> mb(pb.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(cols));
    std::vector<double> out(rows * cols);
    Eigen::Map<RowMat> mc(out.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    mc.noalias() = ma * mb;

    std::vector<std::size_t> labels, dims;
    for (std::size_t i : free_a) {
        labels.push_back(a.labels()[i]);
        dims.push_back(a.dims()[i]);
    }
    for (std::size_t j : free_b) {
        labels.push_back(b.labels()[j]);
        dims.push_back(b.dims()[j]);
    }
    return Tensor(std::move(labels), std::move(dims), std::move(out));
}

}  // namespace spinnet
