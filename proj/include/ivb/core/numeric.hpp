// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cmath>

#include "ivb/core/types.hpp"

namespace ivb {

namespace detail {

template <typename Derived>
void check_logits(const Eigen::MatrixBase<Derived>& logits, const char* who) {
  if (logits.size() == 0) throw InvalidArgument(std::string(who) + ": empty input");
  if (!logits.allFinite())
    throw NumericError(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Max-subtracted log-softmax of a single logit vector.
template <typename Derived>
VectorT<typename Derived::Scalar> log_softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  detail::check_logits(logits, "log_softmax");
  const Scalar shift = logits.maxCoeff();
  VectorT<Scalar> z = logits.derived().reshaped().array() - shift;
  const Scalar log_norm = std::log(z.array().exp().sum());
  return (z.array() - log_norm).matrix();
}

template <typename Derived>
VectorT<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  detail::check_logits(logits, "softmax");
  const Scalar shift = logits.maxCoeff();
  VectorT<Scalar> e = (logits.derived().reshaped().array() - shift).exp().matrix();
  return e / e.sum();
}

/// Row-wise softmax of an [n x C] logit matrix.
template <typename Derived>
MatrixT<typename Derived::Scalar> softmax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  detail::check_logits(logits, "softmax_rows");
  MatrixT<Scalar> out =
      (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

template <typename Derived>
MatrixT<typename Derived::Scalar> log_softmax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  detail::check_logits(logits, "log_softmax_rows");
  MatrixT<Scalar> z = logits.colwise() - logits.rowwise().maxCoeff();
  const VectorT<Scalar> log_norm = z.array().exp().rowwise().sum().log().matrix();
  z.colwise() -= log_norm;
  return z;
}

}  // namespace ivb
