#pragma once

//
// Dense tensor storage plus the kernels everything else is built on:
// permute, matricization, Frobenius norm, pairwise contraction, and
// deterministic economy SVD/QR. All values are 64-bit reals, stored
// row-major with respect to the tensor's index list.
//

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tnsynth/ids.hpp"

namespace tnsynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A named, sized mode. Ids identify shared modes across tensors in a
// network; names are for display and serialization only.
struct Index {
    IndexId id = 0;
    std::string name;
    std::size_t size = 0;

    friend bool operator==(const Index& a, const Index& b) {
        return a.id == b.id && a.name == b.name && a.size == b.size;
    }
};

class Tensor {
public:
    Tensor() = default;

    // Takes ownership of `data`, which must hold exactly the product of the
    // index sizes in row-major order. Index ids must be pairwise distinct
    // and sizes positive.
    Tensor(std::vector<Index> indices, std::vector<double> data);

    static Tensor zeros(std::vector<Index> indices);

    std::size_t order() const { return indices_.size(); }
    std::size_t element_count() const { return data_.size(); }
    const std::vector<Index>& indices() const { return indices_; }
    const Index& index_at(std::size_t pos) const { return indices_[pos]; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& mutable_data() { return data_; }

    // Sorted list of index ids.
    std::vector<IndexId> index_ids() const;
    bool has_index(IndexId id) const;
    const Index& index_by_id(IndexId id) const;
    std::size_t position_of(IndexId id) const;

    double at(std::span<const std::size_t> coords) const;
    double& at(std::span<const std::size_t> coords);

    // Row-major strides for the current index order.
    std::vector<std::size_t> strides() const;

private:
    std::size_t flat_offset(std::span<const std::size_t> coords) const;

    std::vector<Index> indices_;
    std::vector<double> data_;
};

// Reorders modes; element values are preserved under the coordinate
// relabeling. `order` must be a bijection over 0..d-1.
Tensor permute(const Tensor& t, std::span<const std::size_t> order);

// Convenience overload.
Tensor permute(const Tensor& t, const std::vector<std::size_t>& order);

// Permutes so that index ids ascend.
Tensor sort_indices(const Tensor& t);

double frobenius_norm(const Tensor& t);

// A tensor flattened to a matrix. Row indices and column indices are kept
// in ascending-id order; `source_order` remembers the original index ids so
// the operation can be inverted exactly.
struct MatricizedTensor {
    std::vector<Index> row_indices;
    std::vector<Index> col_indices;
    std::vector<IndexId> source_order;
    Matrix mat;
};

// Flattens `t` so the modes in `rows` become matrix rows (ascending id) and
// the complement becomes columns (ascending id). `rows` must be a proper,
// nonempty subset of the tensor's modes.
MatricizedTensor matricize(const Tensor& t, const std::vector<IndexId>& rows);

// Exact inverse of matricize: restores values and the original index order.
Tensor unmatricize(const MatricizedTensor& m);

// Builds a tensor whose index list is row_indices ++ col_indices from a
// row-major view of `mat`. Either side may be empty.
Tensor tensor_from_matrix(const Matrix& mat, std::vector<Index> row_indices,
                          std::vector<Index> col_indices);

// Internal-friendly flattening that allows an empty side (treated as an
// extent-1 dimension). Used by contraction and the network kernels.
Matrix to_matrix(const Tensor& t, std::span<const IndexId> row_ids,
                 std::span<const IndexId> col_ids);

// Sums over all shared index ids; the result carries the symmetric
// difference of the two index sets in ascending-id order. Tensors with no
// shared ids produce an outer product. Shared ids with mismatched sizes are
// a shape mismatch.
Tensor contract(const Tensor& a, const Tensor& b);

// Economy SVD with singular values sorted descending:
//   m == u * sigma.asDiagonal() * vt  (within 1e-10 * |m|_F)
struct SvdResult {
    Matrix u;
    Vector sigma;
    Matrix vt;
};

SvdResult svd(const Matrix& m);

// Singular values only (descending), skipping the factor computation.
Vector singular_values(const Matrix& m);

// Thin QR: q has orthonormal columns, q * r == m, r is k x cols with
// k = min(rows, cols).
struct QrResult {
    Matrix q;
    Matrix r;
};

QrResult qr(const Matrix& m);

}  // namespace tnsynth
