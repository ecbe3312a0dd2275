// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ivb/core/numeric.hpp"
#include "ivb/core/rng.hpp"
#include "ivb/core/types.hpp"
#include "ivb/model/batch.hpp"

namespace ivb {

template <typename Scalar>
struct DenseLayer {
  RowMatrixT<Scalar> weight;  // [out x in]
  VectorT<Scalar> bias;       // [out]

  Index in() const { return weight.cols(); }
  Index out() const { return weight.rows(); }
  Index num_params() const { return weight.size() + bias.size(); }
};

/// Feed-forward classifier: tanh on every hidden layer, linear output logits.
///
/// Flat layout (shared with optimizer state): layer by layer, the weight in
/// row-major order followed by the bias.
template <typename Scalar>
struct Mlp {
  std::vector<DenseLayer<Scalar>> layers;

  Index input_dim() const { return layers.front().in(); }
  Index num_classes() const { return layers.back().out(); }

  Index num_params() const {
    Index p = 0;
    for (const auto& layer : layers) p += layer.num_params();
    return p;
  }

  std::vector<Index> layer_sizes() const {
    std::vector<Index> sizes{input_dim()};
    for (const auto& layer : layers) sizes.push_back(layer.out());
    return sizes;
  }

  void validate() const {
    if (layers.empty()) throw ShapeError("Mlp: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& layer = layers[k];
      if (layer.bias.size() != layer.out())
        throw ShapeError("Mlp: bias length does not match layer width");
      if (k > 0 && layers[k - 1].out() != layer.in())
        throw ShapeError("Mlp: consecutive layer dimensions do not chain");
    }
  }
};

template <typename Scalar>
struct LossGrad {
  Scalar loss;
  VectorT<Scalar> grad;
};

/// Zero-initialised network of the given shape.
template <typename Scalar = double>
Mlp<Scalar> zero_mlp(std::span<const Index> sizes) {
  if (sizes.size() < 2) throw InvalidArgument("mlp: need at least 2 layer sizes");
  Mlp<Scalar> mlp;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    if (sizes[k] < 1 || sizes[k + 1] < 1)
      throw InvalidArgument("mlp: zero-width layer");
    mlp.layers.push_back({RowMatrixT<Scalar>::Zero(sizes[k + 1], sizes[k]),
                          VectorT<Scalar>::Zero(sizes[k + 1])});
  }
  return mlp;
}

/// Weights ~ N(0, 1/fan_in), biases zero.
template <typename Scalar = double>
Mlp<Scalar> init_mlp(std::span<const Index> sizes, Rng& rng) {
  Mlp<Scalar> mlp = zero_mlp<Scalar>(sizes);
  for (auto& layer : mlp.layers) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in()));
    for (Index i = 0; i < layer.weight.size(); ++i)
      layer.weight.data()[i] = static_cast<Scalar>(scale * rng.normal());
  }
  return mlp;
}

template <typename Scalar>
VectorT<Scalar> flatten(const Mlp<Scalar>& mlp) {
  VectorT<Scalar> flat(mlp.num_params());
  Index offset = 0;
  for (const auto& layer : mlp.layers) {
    flat.segment(offset, layer.weight.size()) = layer.weight.template reshaped<Eigen::RowMajor>();
    offset += layer.weight.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

/// Inverse of flatten; `shape` supplies the layer dimensions.
template <typename Scalar, typename Derived>
Mlp<Scalar> unflatten(const Eigen::MatrixBase<Derived>& flat, const Mlp<Scalar>& shape) {
  if (flat.size() != shape.num_params())
    throw ShapeError("unflatten: length " + std::to_string(flat.size()) +
                     " does not match parameter count " +
                     std::to_string(shape.num_params()));
  Mlp<Scalar> mlp = shape;
  Index offset = 0;
  for (auto& layer : mlp.layers) {
    layer.weight.template reshaped<Eigen::RowMajor>() =
        flat.segment(offset, layer.weight.size());
    offset += layer.weight.size();
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
  return mlp;
}

template <typename Scalar, typename Derived>
MatrixT<Scalar> forward(const Mlp<Scalar>& mlp, const Eigen::MatrixBase<Derived>& features) {
  if (features.cols() != mlp.input_dim())
    throw ShapeError("forward: feature width " + std::to_string(features.cols()) +
                     " does not match input layer " + std::to_string(mlp.input_dim()));
  MatrixT<Scalar> a = features.template cast<Scalar>();
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    const auto& layer = mlp.layers[k];
    MatrixT<Scalar> z = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (k + 1 < mlp.layers.size())
      a = z.array().tanh().matrix();
    else
      a = std::move(z);
  }
  return a;
}

/// Mean cross-entropy and its exact gradient in the flat layout.
template <typename Scalar>
LossGrad<Scalar> loss_and_grad(const Mlp<Scalar>& mlp, const Batch& batch) {
  batch.validate(mlp.num_classes());
  if (batch.dim() != mlp.input_dim())
    throw ShapeError("loss_and_grad: feature width does not match input layer");

  const Index n = batch.size();
  const std::size_t depth = mlp.layers.size();

  // activations[k] feeds layer k; activations[depth] holds the logits.
  std::vector<MatrixT<Scalar>> activations;
  activations.reserve(depth + 1);
  activations.push_back(batch.features.template cast<Scalar>());
  for (std::size_t k = 0; k < depth; ++k) {
    const auto& layer = mlp.layers[k];
    MatrixT<Scalar> z = activations.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (k + 1 < depth) z = z.array().tanh().matrix();
    activations.push_back(std::move(z));
  }

  const MatrixT<Scalar> log_probs = log_softmax_rows(activations.back());
  Scalar loss(0);
  MatrixT<Scalar> delta = log_probs.array().exp().matrix();
  for (Index i = 0; i < n; ++i) {
    loss -= log_probs(i, batch.labels[i]);
    delta(i, batch.labels[i]) -= Scalar(1);
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  loss *= inv_n;
  delta *= inv_n;

  VectorT<Scalar> grad(mlp.num_params());
  Index offset = grad.size();
  for (std::size_t k = depth; k-- > 0;) {
    const auto& layer = mlp.layers[k];
    offset -= layer.num_params();
    RowMatrixT<Scalar> weight_grad = delta.transpose() * activations[k];
    grad.segment(offset, layer.weight.size()) = weight_grad.template reshaped<Eigen::RowMajor>();
    grad.segment(offset + layer.weight.size(), layer.bias.size()) =
        delta.colwise().sum().transpose();
    if (k > 0) {
      MatrixT<Scalar> back = delta * layer.weight;
      delta = back.array() *
              (Scalar(1) - activations[k].array().square());
    }
  }

  if (!std::isfinite(static_cast<double>(loss)) || !grad.allFinite())
    throw NumericError("loss_and_grad: non-finite loss or gradient");
  return {loss, std::move(grad)};
}

}  // namespace ivb
