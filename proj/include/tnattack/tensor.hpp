#pragma once

// Dense complex tensors with integer axis labels. Data is row-major over the
// axes in `labels` order. Contraction sums over every label the two operands
// share and is done as permute + matrix product.

#include <algorithm>
#include <numeric>
#include <vector>

#include "tnattack/errors.hpp"
#include "tnattack/linalg.hpp"

namespace tnattack {

using RowMatrixC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Tensor {
  std::vector<int> labels;
  std::vector<Eigen::Index> dims;
  VectorC data;

  Tensor() = default;
  Tensor(std::vector<int> l, std::vector<Eigen::Index> d) : labels(std::move(l)), dims(std::move(d)) {
    if (labels.size() != dims.size()) throw ShapeError("Tensor: labels and dims differ in length");
    data = VectorC::Zero(count(dims));
  }

  static Eigen::Index count(const std::vector<Eigen::Index>& d) {
    return std::accumulate(d.begin(), d.end(), Eigen::Index{1}, std::multiplies<>());
  }

  std::size_t rank() const noexcept { return labels.size(); }
  Eigen::Index size() const noexcept { return data.size(); }

  std::size_t axis(int label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw NotFoundError("Tensor: no axis with label " + std::to_string(label));
    return static_cast<std::size_t>(it - labels.begin());
  }
  bool has(int label) const { return std::find(labels.begin(), labels.end(), label) != labels.end(); }
  Eigen::Index dim(int label) const { return dims[axis(label)]; }
};

// Reorders axes so that they follow `order` (a permutation of t.labels).
inline Tensor permute(const Tensor& t, const std::vector<int>& order) {
  if (order.size() != t.rank()) throw ShapeError("permute: label count mismatch");
  std::vector<std::size_t> src(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) src[i] = t.axis(order[i]);
  if (std::is_sorted(src.begin(), src.end())) {
    Tensor same = t;
    same.labels = order;
    return same;
  }
  std::vector<Eigen::Index> new_dims(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) new_dims[i] = t.dims[src[i]];
  Tensor out(order, new_dims);
  // Stride of each output axis in the input.
  std::vector<Eigen::Index> in_stride(t.rank(), 1);
  for (std::size_t a = t.rank(); a-- > 1;) in_stride[a - 1] = in_stride[a] * t.dims[a];
  std::vector<Eigen::Index> stride(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) stride[i] = in_stride[src[i]];
  std::vector<Eigen::Index> idx(order.size(), 0);
  Eigen::Index in = 0;
  for (Eigen::Index o = 0; o < out.size(); ++o) {
    out.data[o] = t.data[in];
    for (std::size_t a = order.size(); a-- > 0;) {
      if (++idx[a] < new_dims[a]) {
        in += stride[a];
        break;
      }
      in -= stride[a] * (new_dims[a] - 1);
      idx[a] = 0;
    }
  }
  return out;
}

// Matrix with the `rows` axes (in order) as row index and the rest, in their
// current order, as column index.
inline RowMatrixC matricize(const Tensor& t, const std::vector<int>& rows) {
  std::vector<int> order = rows;
  for (int l : t.labels)
    if (std::find(rows.begin(), rows.end(), l) == rows.end()) order.push_back(l);
  const Tensor p = permute(t, order);
  Eigen::Index r = 1;
  for (std::size_t i = 0; i < rows.size(); ++i) r *= p.dims[i];
  const Eigen::Index c = r == 0 ? 0 : p.size() / r;
  return Eigen::Map<const RowMatrixC>(p.data.data(), r, c);
}

inline Tensor from_matrix(const RowMatrixC& m, std::vector<int> labels, std::vector<Eigen::Index> dims) {
  Tensor t(std::move(labels), std::move(dims));
  if (t.size() != m.size()) throw ShapeError("from_matrix: size mismatch");
  Eigen::Map<RowMatrixC>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

// Sums over all shared labels. Result axes: a's free axes then b's free axes.
inline Tensor contract(const Tensor& a, const Tensor& b) {
  std::vector<int> shared, free_a, free_b;
  for (int l : a.labels) (b.has(l) ? shared : free_a).push_back(l);
  for (int l : b.labels)
    if (!a.has(l)) free_b.push_back(l);
  for (int l : shared)
    if (a.dim(l) != b.dim(l)) throw ShapeError("contract: dimension mismatch on label " + std::to_string(l));
  const RowMatrixC ma = matricize(a, free_a);
  const RowMatrixC mb = matricize(b, shared);
  std::vector<int> labels = free_a;
  labels.insert(labels.end(), free_b.begin(), free_b.end());
  std::vector<Eigen::Index> dims;
  for (int l : free_a) dims.push_back(a.dim(l));
  for (int l : free_b) dims.push_back(b.dim(l));
  return from_matrix(ma * mb, labels, dims);
}

// t'[.., k', ..] = sum_k t[.., k, ..] m(k, k') on the axis labelled `label`.
inline Tensor mode_product(const Tensor& t, int label, const MatrixC& m) {
  const std::size_t ax = t.axis(label);
  if (m.rows() != t.dims[ax]) throw ShapeError("mode_product: dimension mismatch");
  std::vector<int> rest;
  for (int l : t.labels)
    if (l != label) rest.push_back(l);
  const RowMatrixC mat = matricize(t, rest);  // rest x k
  std::vector<int> labels = rest;
  labels.push_back(label);
  std::vector<Eigen::Index> dims;
  for (int l : rest) dims.push_back(t.dim(l));
  dims.push_back(m.cols());
  return permute(from_matrix(mat * m, labels, dims), t.labels);
}

// Multiplies the slice at index k of axis `label` by w[k].
inline void scale_axis(Tensor& t, int label, const VectorR& w) {
  const std::size_t ax = t.axis(label);
  if (w.size() != t.dims[ax]) throw ShapeError("scale_axis: dimension mismatch");
  Eigen::Index inner = 1;
  for (std::size_t a = ax + 1; a < t.rank(); ++a) inner *= t.dims[a];
  const Eigen::Index d = t.dims[ax];
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] *= w[(i / inner) % d];
}

// Keeps index `k` of axis `label` and drops the axis.
inline Tensor slice_axis(const Tensor& t, int label, Eigen::Index k) {
  const std::size_t ax = t.axis(label);
  Eigen::Index inner = 1;
  for (std::size_t a = ax + 1; a < t.rank(); ++a) inner *= t.dims[a];
  const Eigen::Index d = t.dims[ax];
  std::vector<int> labels = t.labels;
  std::vector<Eigen::Index> dims = t.dims;
  labels.erase(labels.begin() + static_cast<long>(ax));
  dims.erase(dims.begin() + static_cast<long>(ax));
  Tensor out(labels, dims);
  const Eigen::Index outer = t.size() / (inner * d);
  for (Eigen::Index o = 0; o < outer; ++o)
    out.data.segment(o * inner, inner) = t.data.segment((o * d + k) * inner, inner);
  return out;
}

// Appends a dimension-1 axis.
inline void add_unit_axis(Tensor& t, int label) {
  if (t.has(label)) throw ShapeError("add_unit_axis: label already present");
  t.labels.push_back(label);
  t.dims.push_back(1);
}

}  // namespace tnattack
