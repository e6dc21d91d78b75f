#include "tnsynth/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tnsynth/errors.hpp"

namespace tnsynth {

namespace {

std::size_t checked_element_count(const std::vector<Index>& indices) {
    std::size_t n = 1;
    for (const auto& ix : indices) {
        if (ix.size == 0)
            throw std::invalid_argument("index '" + ix.name + "' has size 0");
        n *= ix.size;
    }
    return n;
}

void check_distinct_ids(const std::vector<Index>& indices) {
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (std::size_t j = i + 1; j < indices.size(); ++j)
            if (indices[i].id == indices[j].id)
                throw std::invalid_argument("duplicate index id within tensor");
}

}  // namespace

Tensor::Tensor(std::vector<Index> indices, std::vector<double> data)
    : indices_(std::move(indices)), data_(std::move(data)) {
    check_distinct_ids(indices_);
    if (data_.size() != checked_element_count(indices_))
        throw std::invalid_argument("data length does not match index sizes");
}

Tensor Tensor::zeros(std::vector<Index> indices) {
    const std::size_t n = checked_element_count(indices);
    return Tensor(std::move(indices), std::vector<double>(n, 0.0));
}

std::vector<IndexId> Tensor::index_ids() const {
    std::vector<IndexId> out;
    out.reserve(indices_.size());
    for (const auto& ix : indices_) out.push_back(ix.id);
    ids::sort_unique(out);
    return out;
}

bool Tensor::has_index(IndexId id) const {
    for (const auto& ix : indices_)
        if (ix.id == id) return true;
    return false;
}

const Index& Tensor::index_by_id(IndexId id) const {
    for (const auto& ix : indices_)
        if (ix.id == id) return ix;
    throw std::invalid_argument("index id not present in tensor");
}

std::size_t Tensor::position_of(IndexId id) const {
    for (std::size_t i = 0; i < indices_.size(); ++i)
        if (indices_[i].id == id) return i;
    throw std::invalid_argument("index id not present in tensor");
}

std::vector<std::size_t> Tensor::strides() const {
    std::vector<std::size_t> s(indices_.size(), 1);
    for (std::size_t i = indices_.size(); i-- > 1;)
        s[i - 1] = s[i] * indices_[i].size;
    return s;
}

std::size_t Tensor::flat_offset(std::span<const std::size_t> coords) const {
    if (coords.size() != indices_.size())
        throw std::invalid_argument("coordinate arity mismatch");
    const auto s = strides();
    std::size_t off = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] >= indices_[i].size)
            throw std::out_of_range("coordinate out of range");
        off += coords[i] * s[i];
    }
    return off;
}

double Tensor::at(std::span<const std::size_t> coords) const { return data_[flat_offset(coords)]; }

double& Tensor::at(std::span<const std::size_t> coords) { return data_[flat_offset(coords)]; }

Tensor permute(const Tensor& t, std::span<const std::size_t> order) {
    const std::size_t d = t.order();
    if (order.size() != d)
        throw std::invalid_argument("permutation arity mismatch");
    std::vector<bool> seen(d, false);
    for (std::size_t p : order) {
        if (p >= d || seen[p])
            throw std::invalid_argument("order is not a permutation");
        seen[p] = true;
    }

    bool identity = true;
    for (std::size_t i = 0; i < d; ++i)
        if (order[i] != i) identity = false;
    if (identity) return t;

    std::vector<Index> out_indices(d);
    for (std::size_t i = 0; i < d; ++i) out_indices[i] = t.index_at(order[i]);

    const auto in_strides = t.strides();
    std::vector<std::size_t> mapped(d);      // input stride per output dim
    std::vector<std::size_t> extent(d);
    for (std::size_t i = 0; i < d; ++i) {
        mapped[i] = in_strides[order[i]];
        extent[i] = out_indices[i].size;
    }

    std::vector<double> out(t.element_count());
    const auto in = t.data();

    // Odometer walk over output coordinates carrying the input offset.
    std::vector<std::size_t> coord(d, 0);
    std::size_t in_off = 0;
    for (std::size_t o = 0; o < out.size(); ++o) {
        out[o] = in[in_off];
        for (std::size_t i = d; i-- > 0;) {
            in_off += mapped[i];
            if (++coord[i] < extent[i]) break;
            in_off -= mapped[i] * extent[i];
            coord[i] = 0;
        }
    }
    return Tensor(std::move(out_indices), std::move(out));
}

Tensor permute(const Tensor& t, const std::vector<std::size_t>& order) {
    return permute(t, std::span<const std::size_t>(order));
}

Tensor sort_indices(const Tensor& t) {
    std::vector<std::size_t> order(t.order());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return t.index_at(a).id < t.index_at(b).id;
    });
    return permute(t, order);
}

double frobenius_norm(const Tensor& t) {
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    return std::sqrt(sum);
}

namespace {

// Positions of the given ids within the tensor, ordered ascending by id.
std::vector<std::size_t> positions_ascending(const Tensor& t, std::span<const IndexId> group) {
    std::vector<IndexId> sorted(group.begin(), group.end());
    ids::sort_unique(sorted);
    if (sorted.size() != group.size())
        throw std::invalid_argument("duplicate ids in mode group");
    std::vector<std::size_t> pos;
    pos.reserve(sorted.size());
    for (IndexId id : sorted) pos.push_back(t.position_of(id));
    return pos;
}

}  // namespace

Matrix to_matrix(const Tensor& t, std::span<const IndexId> row_ids,
                 std::span<const IndexId> col_ids) {
    if (row_ids.size() + col_ids.size() != t.order())
        throw std::invalid_argument("mode groups do not cover the tensor");

    auto row_pos = positions_ascending(t, row_ids);
    auto col_pos = positions_ascending(t, col_ids);
    std::vector<std::size_t> order = row_pos;
    order.insert(order.end(), col_pos.begin(), col_pos.end());

    const Tensor p = permute(t, order);
    std::size_t rows = 1, cols = 1;
    for (std::size_t i = 0; i < row_pos.size(); ++i) rows *= p.index_at(i).size;
    for (std::size_t i = row_pos.size(); i < p.order(); ++i) cols *= p.index_at(i).size;

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(p.data().data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
}

MatricizedTensor matricize(const Tensor& t, const std::vector<IndexId>& rows) {
    if (rows.empty())
        throw std::invalid_argument("matricize: row set must be nonempty");
    if (rows.size() >= t.order())
        throw std::invalid_argument("matricize: row set must be a proper subset of the modes");
    for (IndexId id : rows)
        if (!t.has_index(id))
            throw std::invalid_argument("matricize: unknown index id");

    std::vector<IndexId> row_sorted(rows);
    ids::sort_unique(row_sorted);
    std::vector<IndexId> col_sorted = ids::set_difference(t.index_ids(), row_sorted);

    MatricizedTensor out;
    out.mat = to_matrix(t, row_sorted, col_sorted);
    for (IndexId id : row_sorted) out.row_indices.push_back(t.index_by_id(id));
    for (IndexId id : col_sorted) out.col_indices.push_back(t.index_by_id(id));
    for (const auto& ix : t.indices()) out.source_order.push_back(ix.id);
    return out;
}

Tensor tensor_from_matrix(const Matrix& mat, std::vector<Index> row_indices,
                          std::vector<Index> col_indices) {
    std::size_t rows = 1, cols = 1;
    for (const auto& ix : row_indices) rows *= ix.size;
    for (const auto& ix : col_indices) cols *= ix.size;
    if (rows != static_cast<std::size_t>(mat.rows()) ||
        cols != static_cast<std::size_t>(mat.cols()))
        throw std::invalid_argument("matrix shape does not match index sizes");

    std::vector<Index> indices = std::move(row_indices);
    indices.insert(indices.end(), col_indices.begin(), col_indices.end());

    std::vector<double> data(rows * cols);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMajor>(data.data(), mat.rows(), mat.cols()) = mat;
    return Tensor(std::move(indices), std::move(data));
}

Tensor unmatricize(const MatricizedTensor& m) {
    Tensor t = tensor_from_matrix(m.mat, m.row_indices, m.col_indices);
    std::vector<std::size_t> order;
    order.reserve(m.source_order.size());
    for (IndexId id : m.source_order) order.push_back(t.position_of(id));
    return permute(t, order);
}

Tensor contract(const Tensor& a, const Tensor& b) {
    const auto a_ids = a.index_ids();
    const auto b_ids = b.index_ids();
    const auto shared = ids::set_intersection(a_ids, b_ids);
    for (IndexId id : shared)
        if (a.index_by_id(id).size != b.index_by_id(id).size)
            throw std::invalid_argument("contract: shared index '" + a.index_by_id(id).name +
                                        "' has mismatched sizes");

    const auto a_only = ids::set_difference(a_ids, shared);
    const auto b_only = ids::set_difference(b_ids, shared);

    const Matrix am = to_matrix(a, a_only, shared);
    const Matrix bm = to_matrix(b, shared, b_only);
    const Matrix prod = am * bm;

    std::vector<Index> row_indices, col_indices;
    for (IndexId id : a_only) row_indices.push_back(a.index_by_id(id));
    for (IndexId id : b_only) col_indices.push_back(b.index_by_id(id));
    return sort_indices(tensor_from_matrix(prod, std::move(row_indices), std::move(col_indices)));
}

SvdResult svd(const Matrix& m) {
    if (!m.allFinite())
        throw std::invalid_argument("svd: non-finite entries");
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV().transpose()};
}

Vector singular_values(const Matrix& m) {
    if (!m.allFinite())
        throw std::invalid_argument("svd: non-finite entries");
    Eigen::BDCSVD<Matrix> dec(m);
    return dec.singularValues();
}

QrResult qr(const Matrix& m) {
    const Eigen::Index k = std::min(m.rows(), m.cols());
    Eigen::HouseholderQR<Matrix> dec(m);
    Matrix q = dec.householderQ() * Matrix::Identity(m.rows(), k);
    Matrix r = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return QrResult{std::move(q), std::move(r)};
}

}  // namespace tnsynth
