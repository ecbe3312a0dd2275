// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "ivb/model/mlp.hpp"

namespace ivb {

template <typename Scalar>
struct LoraFactor {
  RowMatrixT<Scalar> a;  // [r x in]
  RowMatrixT<Scalar> b;  // [out x r]

  Index num_params() const { return a.size() + b.size(); }
};

/// Low-rank update for every linear layer of a frozen base network. The
/// effective weight of layer k is W_k + (alpha / rank) * B_k * A_k.
///
/// Flat layout: layer by layer, A row-major followed by B row-major.
template <typename Scalar>
struct LoraAdapter {
  std::vector<LoraFactor<Scalar>> factors;
  Index rank = 8;
  Scalar alpha = 16;

  Scalar scaling() const { return alpha / static_cast<Scalar>(rank); }

  Index num_params() const {
    Index p = 0;
    for (const auto& f : factors) p += f.num_params();
    return p;
  }

  void validate_against(const Mlp<Scalar>& base) const {
    if (rank < 1) throw ShapeError("lora: rank must be >= 1");
    if (factors.size() != base.layers.size())
      throw ShapeError("lora: adapter has " + std::to_string(factors.size()) +
                       " factors for " + std::to_string(base.layers.size()) +
                       " base layers");
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const auto& f = factors[k];
      const auto& layer = base.layers[k];
      if (f.a.rows() != rank || f.a.cols() != layer.in() || f.b.rows() != layer.out() ||
          f.b.cols() != rank)
        throw ShapeError("lora: factor shapes do not match base layer " +
                         std::to_string(k));
    }
  }
};

/// A ~ N(0, 1/in), B = 0, so the adapted model starts equal to the base.
template <typename Scalar>
LoraAdapter<Scalar> init_lora(const Mlp<Scalar>& base, Index rank, Scalar alpha, Rng& rng) {
  if (rank < 1) throw InvalidArgument("lora: rank must be >= 1");
  LoraAdapter<Scalar> adapter;
  adapter.rank = rank;
  adapter.alpha = alpha;
  for (const auto& layer : base.layers) {
    LoraFactor<Scalar> f{RowMatrixT<Scalar>(rank, layer.in()),
                         RowMatrixT<Scalar>::Zero(layer.out(), rank)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in()));
    for (Index i = 0; i < f.a.size(); ++i)
      f.a.data()[i] = static_cast<Scalar>(scale * rng.normal());
    adapter.factors.push_back(std::move(f));
  }
  return adapter;
}

template <typename Scalar>
VectorT<Scalar> flatten(const LoraAdapter<Scalar>& adapter) {
  VectorT<Scalar> flat(adapter.num_params());
  Index offset = 0;
  for (const auto& f : adapter.factors) {
    flat.segment(offset, f.a.size()) = f.a.template reshaped<Eigen::RowMajor>();
    offset += f.a.size();
    flat.segment(offset, f.b.size()) = f.b.template reshaped<Eigen::RowMajor>();
    offset += f.b.size();
  }
  return flat;
}

template <typename Scalar, typename Derived>
LoraAdapter<Scalar> unflatten(const Eigen::MatrixBase<Derived>& flat,
                              const LoraAdapter<Scalar>& shape) {
  if (flat.size() != shape.num_params())
    throw ShapeError("unflatten: length " + std::to_string(flat.size()) +
                     " does not match adapter parameter count " +
                     std::to_string(shape.num_params()));
  LoraAdapter<Scalar> adapter = shape;
  Index offset = 0;
  for (auto& f : adapter.factors) {
    f.a.template reshaped<Eigen::RowMajor>() = flat.segment(offset, f.a.size());
    offset += f.a.size();
    f.b.template reshaped<Eigen::RowMajor>() = flat.segment(offset, f.b.size());
    offset += f.b.size();
  }
  return adapter;
}

/// Base network with every adapter folded into its weights.
template <typename Scalar>
Mlp<Scalar> merge(const Mlp<Scalar>& base, const LoraAdapter<Scalar>& adapter) {
  adapter.validate_against(base);
  Mlp<Scalar> merged = base;
  const Scalar s = adapter.scaling();
  for (std::size_t k = 0; k < merged.layers.size(); ++k) {
    const auto& f = adapter.factors[k];
    merged.layers[k].weight.noalias() += s * f.b * f.a;
  }
  return merged;
}

template <typename Scalar, typename Derived>
MatrixT<Scalar> lora_forward(const Mlp<Scalar>& base, const LoraAdapter<Scalar>& adapter,
                             const Eigen::MatrixBase<Derived>& features) {
  return forward(merge(base, adapter), features);
}

/// Loss of the adapted model; the gradient covers A and B entries only.
///
/// With G = dL/dW_eff and s = alpha / rank: dL/dA = s B^T G, dL/dB = s G A^T.
template <typename Scalar>
LossGrad<Scalar> lora_loss_and_grad(const Mlp<Scalar>& base,
                                    const LoraAdapter<Scalar>& adapter,
                                    const Batch& batch) {
  const Mlp<Scalar> merged = merge(base, adapter);
  const LossGrad<Scalar> full = loss_and_grad(merged, batch);
  const Scalar s = adapter.scaling();

  VectorT<Scalar> grad(adapter.num_params());
  Index full_offset = 0;
  Index offset = 0;
  for (std::size_t k = 0; k < adapter.factors.size(); ++k) {
    const auto& layer = merged.layers[k];
    const auto& f = adapter.factors[k];
    const RowMatrixT<Scalar> weight_grad =
        full.grad.segment(full_offset, layer.weight.size())
            .template reshaped<Eigen::RowMajor>(layer.out(), layer.in());
    full_offset += layer.num_params();

    const RowMatrixT<Scalar> grad_a = s * f.b.transpose() * weight_grad;
    const RowMatrixT<Scalar> grad_b = s * weight_grad * f.a.transpose();
    grad.segment(offset, grad_a.size()) = grad_a.template reshaped<Eigen::RowMajor>();
    offset += grad_a.size();
    grad.segment(offset, grad_b.size()) = grad_b.template reshaped<Eigen::RowMajor>();
    offset += grad_b.size();
  }
  return {full.loss, std::move(grad)};
}

}  // namespace ivb
