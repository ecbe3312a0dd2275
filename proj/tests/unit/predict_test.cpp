// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ivb/predict/predict.hpp"

using namespace ivb;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

struct Fixture {
  std::vector<Index> sizes{3, 5, 4};
  MlpClassifier model{zero_mlp<double>(sizes)};
  IvonConfig cfg;
  PosteriorState state;
  Matrix x;

  Fixture() {
    cfg.ess = 30.0;
    cfg.hess_init = 0.2;
    Rng r(5);
    state = init_posterior(flatten(init_mlp<double>(sizes, r)), cfg);
    for (Index i = 0; i < state.hess.size(); ++i) state.hess[i] = 0.05 + r.uniform();
    x.resize(12, 3);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
  }
};

}  // namespace

TEST(PredictMean, ZeroMeanGivesUniformRows) {
  Fixture f;
  f.state.mean.setZero();
  const Matrix p = predict_mean(f.state, f.model, f.x);
  EXPECT_LE((p.array() - 0.25).abs().maxCoeff(), 1e-15);
}

TEST(PredictMean, DuplicatedRows) {
  Fixture f;
  f.x.row(1) = f.x.row(0);
  const Matrix p = predict_mean(f.state, f.model, f.x);
  EXPECT_EQ(p.row(0), p.row(1));
}

TEST(PredictMc, HugeTemperatureRecoversMean) {
  Fixture f;
  const Matrix mean = predict_mean(f.state, f.model, f.x);
  for (int k : {1, 2, 8, 32}) {
    const Matrix mc = predict_mc(f.state, f.cfg, f.model, f.x, k, 1e12, Rng(3));
    EXPECT_LE((mc - mean).cwiseAbs().maxCoeff(), 1e-6) << "K=" << k;
  }
}

TEST(PredictMc, DeterministicForFixedSeed) {
  Fixture f;
  EXPECT_EQ(predict_mc(f.state, f.cfg, f.model, f.x, 8, 1.0, Rng(4)),
            predict_mc(f.state, f.cfg, f.model, f.x, 8, 1.0, Rng(4)));
}

TEST(PredictMc, AveragesLogitsOfChildStreamSamples) {
  Fixture f;
  const Rng rng(6);
  Matrix sum = Matrix::Zero(f.x.rows(), 4);
  for (std::uint64_t k = 0; k < 3; ++k) {
    Rng child = rng.split(k);
    sum += f.model.logits(ivon_sample(f.state, f.cfg, child), f.x);
  }
  const Matrix expected = softmax_rows(sum / 3.0);
  EXPECT_LE((predict_mc(f.state, f.cfg, f.model, f.x, 3, 1.0, rng) - expected).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(PredictMc, RowsAreDistributions) {
  Fixture f;
  for (int k : {1, 3, 16})
    for (double t : {0.1, 1.0, 10.0, 1e6}) {
      PredictionBatch b{predict_mc(f.state, f.cfg, f.model, f.x, k, t, Rng(8)),
                        Labels::Zero(f.x.rows())};
      EXPECT_NO_THROW(b.validate());
    }
}

TEST(PredictMc, ConcentratesAsTemperatureGrows) {
  Fixture f;
  const Matrix mean = predict_mean(f.state, f.model, f.x);
  double prev = INFINITY;
  for (double t : {1.0, 10.0, 1e3, 1e12}) {
    const double dist =
        (predict_mc(f.state, f.cfg, f.model, f.x, 8, t, Rng(9)) - mean).cwiseAbs().maxCoeff();
    EXPECT_LE(dist, prev) << "T=" << t;
    prev = dist;
  }
}

TEST(PredictMc, Errors) {
  Fixture f;
  EXPECT_THROW(predict_mc(f.state, f.cfg, f.model, f.x, 0, 1.0, Rng(1)), InvalidArgument);
  EXPECT_THROW(predict_mc(f.state, f.cfg, f.model, f.x, 1, 0.0, Rng(1)), InvalidArgument);
  PosteriorState wrong = init_posterior(Vector::Zero(3), f.cfg);
  EXPECT_THROW(predict_mean(wrong, f.model, f.x), ShapeError);
}

TEST(MaxProb, Examples) {
  const auto a = maxprob(Vector2d(0.25, 0.75));
  EXPECT_EQ(a.label, 1);
  EXPECT_DOUBLE_EQ(a.confidence, 0.75);
  const auto b = maxprob(Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3));
  EXPECT_EQ(b.label, 0);
  EXPECT_DOUBLE_EQ(b.confidence, 1.0 / 3);
  const auto c = maxprob(Vector3d(0, 1, 0));
  EXPECT_EQ(c.label, 1);
  EXPECT_DOUBLE_EQ(c.confidence, 1.0);
}

TEST(MaxProb, ConfidenceAtLeastOneOverC) {
  Rng r(10);
  for (int trial = 0; trial < 500; ++trial) {
    const Index c = 2 + static_cast<Index>(r.below(6));
    Vector v(c);
    for (Index i = 0; i < c; ++i) v[i] = 4 * r.normal();
    const Vector p = softmax(v);
    EXPECT_GE(maxprob(p).confidence, 1.0 / static_cast<double>(c) - 1e-15);
  }
}

TEST(MaxProb, CheckedRejectsNonDistributions) {
  EXPECT_THROW(checked_maxprob(Vector2d(0.5, 0.6)), InvalidArgument);
  EXPECT_THROW(checked_maxprob(Vector(0)), InvalidArgument);
  EXPECT_NO_THROW(checked_maxprob(Vector2d(0.5, 0.5)));
}

TEST(Select, Examples) {
  EXPECT_EQ(select(2, 0.9, 0.5).answer, 2);
  EXPECT_TRUE(select(2, 0.3, 0.5).abstained());
  EXPECT_EQ(select(2, 0.5, 0.5).answer, 2);
  EXPECT_THROW(select(0, 0.5, 1.5), InvalidArgument);
}

TEST(Select, ThresholdExtremes) {
  Rng r(11);
  for (int i = 0; i < 200; ++i) {
    const double c = r.uniform();
    EXPECT_FALSE(select(1, c, 0.0).abstained());
    EXPECT_TRUE(select(1, c, 1.0).abstained());
  }
  EXPECT_FALSE(select(1, 1.0, 1.0).abstained());
}

TEST(PredictionBatch, Validate) {
  PredictionBatch ok{Matrix::Constant(2, 2, 0.5), Labels::Zero(2)};
  EXPECT_NO_THROW(ok.validate());
  PredictionBatch bad_sum{Matrix::Constant(2, 2, 0.6), Labels::Zero(2)};
  EXPECT_THROW(bad_sum.validate(), InvalidArgument);
  PredictionBatch bad_label{Matrix::Constant(2, 2, 0.5), Labels::Constant(2, 2)};
  EXPECT_THROW(bad_label.validate(), InvalidArgument);
}
