// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "ivb/model/lora.hpp"
#include "ivb/model/mlp.hpp"

namespace ivb {

/// A model viewed through its flat trainable vector. This is the surface the
/// optimizers and the predictors work against.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual Index num_params() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index num_classes() const = 0;

  virtual Matrix logits(const Vector& params, const Matrix& features) const = 0;
  virtual LossGrad<double> loss_and_grad(const Vector& params, const Batch& batch) const = 0;
};

/// Every MLP weight is trainable.
class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(Mlp<double> shape) : shape_(std::move(shape)) { shape_.validate(); }

  Index num_params() const override { return shape_.num_params(); }
  Index input_dim() const override { return shape_.input_dim(); }
  Index num_classes() const override { return shape_.num_classes(); }

  Matrix logits(const Vector& params, const Matrix& features) const override {
    return forward(unflatten(params, shape_), features);
  }
  LossGrad<double> loss_and_grad(const Vector& params, const Batch& batch) const override {
    return ivb::loss_and_grad(unflatten(params, shape_), batch);
  }

  const Mlp<double>& shape() const { return shape_; }

 private:
  Mlp<double> shape_;
};

/// Frozen base network; only the adapter factors are trainable.
class LoraClassifier final : public Classifier {
 public:
  LoraClassifier(Mlp<double> base, LoraAdapter<double> shape)
      : base_(std::move(base)), shape_(std::move(shape)) {
    base_.validate();
    shape_.validate_against(base_);
  }

  Index num_params() const override { return shape_.num_params(); }
  Index input_dim() const override { return base_.input_dim(); }
  Index num_classes() const override { return base_.num_classes(); }

  Matrix logits(const Vector& params, const Matrix& features) const override {
    return lora_forward(base_, unflatten(params, shape_), features);
  }
  LossGrad<double> loss_and_grad(const Vector& params, const Batch& batch) const override {
    return lora_loss_and_grad(base_, unflatten(params, shape_), batch);
  }

  const Mlp<double>& base() const { return base_; }

 private:
  Mlp<double> base_;
  LoraAdapter<double> shape_;
};

}  // namespace ivb
