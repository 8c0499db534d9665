#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "tnattack/errors.hpp"

namespace tnattack {

using cplx = std::complex<double>;
using MatrixC = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using VectorC = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using MatrixR = Eigen::MatrixXd;
using VectorR = Eigen::VectorXd;

template <class Matrix>
struct TruncatedSvd {
  Matrix u;            // rows x rank, orthonormal columns
  VectorR s;           // rank, descending
  Matrix v;            // cols x rank, orthonormal columns; input ~= u * diag(s) * v^H
  double discarded = 0.0;  // sum of squared discarded singular values
};

// Keeps at most `max_rank` singular values with s_i > cutoff * ||s||_2, and
// always at least one. Retries once on a jittered copy if the decomposition
// fails or produces non-finite values.
template <class Matrix>
TruncatedSvd<Matrix> truncated_svd(const Matrix& m, std::size_t max_rank, double cutoff) {
  auto attempt = [&](const Matrix& a) {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const bool ok = svd.info() == Eigen::Success && svd.singularValues().allFinite() && svd.matrixU().allFinite() &&
                    svd.matrixV().allFinite();
    return std::make_pair(ok, std::move(svd));
  };
  auto [ok, svd] = attempt(m);
  if (!ok) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> noise(0.0, 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff()));
    Matrix jittered = m;
    for (Eigen::Index i = 0; i < jittered.size(); ++i) jittered.data()[i] += noise(rng);
    std::tie(ok, svd) = attempt(jittered);
    if (!ok) throw NumericalError("truncated_svd: decomposition failed after a jittered retry");
  }
  const VectorR& sv = svd.singularValues();
  const double norm = sv.norm();
  Eigen::Index keep = 0;
  while (keep < sv.size() && static_cast<std::size_t>(keep) < max_rank && sv[keep] > cutoff * norm) ++keep;
  keep = std::max<Eigen::Index>(keep, 1);
  TruncatedSvd<Matrix> out;
  out.u = svd.matrixU().leftCols(keep);
  out.s = sv.head(keep);
  out.v = svd.matrixV().leftCols(keep);
  out.discarded = sv.tail(sv.size() - keep).squaredNorm();
  return out;
}

// exp(-t * h) for Hermitian h.
inline MatrixC hermitian_exp(const MatrixC& h, double t) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("hermitian_exp: eigendecomposition failed");
  VectorC d = (-t * es.eigenvalues().array()).exp().cast<cplx>();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline bool is_unitary(const MatrixC& g, double tol) {
  if (g.rows() != g.cols()) return false;
  return (g.adjoint() * g - MatrixC::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_hermitian(const MatrixC& h, double tol) {
  return h.rows() == h.cols() && (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace tnattack
