// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "sceneqa/core/autograd.hpp"

namespace sceneqa {
namespace {

using Mat = Matrix<double>;
using T = Tensor<double>;

Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Checks d(loss)/d(input) for every input against central differences.
void expect_gradients(std::vector<T> inputs, const std::function<T(const std::vector<T>&)>& loss_fn,
                      double tol = 1e-6) {
  for (auto& in : inputs) in.zero_grad();
  loss_fn(inputs).backward();
  for (auto& in : inputs) {
    const Mat analytic = in.grad().size() ? in.grad() : Mat::Zero(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < in.value().size(); ++i) {
      const double saved = in.value().data()[i];
      const double h = 1e-6;
      in.mutable_value().data()[i] = saved + h;
      double up;
      double down;
      {
        ad::NoGradGuard g;
        up = loss_fn(inputs).item();
        in.mutable_value().data()[i] = saved - h;
        down = loss_fn(inputs).item();
      }
      in.mutable_value().data()[i] = saved;
      const double numeric = (up - down) / (2 * h);
      EXPECT_NEAR(analytic.data()[i], numeric, tol * std::max(1.0, std::abs(numeric)));
    }
  }
}

TEST(Autograd, MatmulAddRowReluSum) {
  std::mt19937_64 rng(1);
  std::vector<T> in{T::parameter(random_matrix(3, 4, rng)), T::parameter(random_matrix(4, 5, rng)),
                    T::parameter(random_matrix(1, 5, rng))};
  expect_gradients(in, [](const std::vector<T>& v) {
    return ad::sum(ad::relu(ad::add_row(ad::matmul(v[0], v[1]), v[2])));
  });
}

TEST(Autograd, MatmulTransposedAndScale) {
  std::mt19937_64 rng(2);
  std::vector<T> in{T::parameter(random_matrix(3, 4, rng)), T::parameter(random_matrix(5, 4, rng))};
  expect_gradients(in, [](const std::vector<T>& v) {
    const T p = ad::scale(ad::matmul_bt(v[0], v[1]), 0.5);
    return ad::sum(ad::matmul(p, ad::transpose(p)));
  });
}

TEST(Autograd, LayerNorm) {
  std::mt19937_64 rng(3);
  const Mat w = random_matrix(3, 6, rng);
  std::vector<T> in{T::parameter(random_matrix(3, 6, rng)), T::parameter(random_matrix(1, 6, rng)),
                    T::parameter(random_matrix(1, 6, rng))};
  expect_gradients(in, [&](const std::vector<T>& v) {
    return ad::sum(ad::matmul_bt(ad::layer_norm(v[0], v[1], v[2]), T::constant(w)));
  });
}

TEST(Autograd, ScaleByScalarTensor) {
  std::mt19937_64 rng(7);
  std::vector<T> in{T::parameter(random_matrix(2, 3, rng)), T::parameter(random_matrix(1, 1, rng))};
  expect_gradients(in, [](const std::vector<T>& v) {
    const T y = ad::scale_by(v[0], v[1]);
    return ad::sum(ad::matmul_bt(y, v[0]));
  });
}

TEST(Autograd, MaskedSoftmaxIgnoresMaskedColumns) {
  std::mt19937_64 rng(4);
  Mat mask = Mat::Zero(2, 4);
  mask(0, 3) = -std::numeric_limits<double>::infinity();
  mask(1, 0) = -std::numeric_limits<double>::infinity();
  const Mat w = random_matrix(2, 4, rng);
  std::vector<T> in{T::parameter(random_matrix(2, 4, rng))};
  expect_gradients(in, [&](const std::vector<T>& v) {
    const T s = ad::masked_softmax(v[0], &mask);
    return ad::sum(ad::matmul_bt(s, T::constant(w)));
  });
  const T s = ad::masked_softmax(in[0], &mask);
  EXPECT_EQ(s.value()(0, 3), 0.0);
  EXPECT_NEAR(s.value().row(1).sum(), 1.0, 1e-12);
}

TEST(Autograd, GatherConcatSlice) {
  std::mt19937_64 rng(5);
  const std::vector<int> ids{2, 0, 2};
  std::vector<T> in{T::parameter(random_matrix(4, 3, rng)), T::parameter(random_matrix(2, 3, rng))};
  expect_gradients(in, [&](const std::vector<T>& v) {
    const T g = ad::gather_rows(v[0], ids);
    const T c = ad::concat_rows<double>({g, v[1]});
    const T s = ad::slice_rows(c, 1, 3);
    const T cols = ad::concat_cols<double>({ad::slice_cols(s, 0, 1), ad::slice_cols(s, 2, 1)});
    return ad::sum(ad::matmul_bt(cols, cols));
  });
}

TEST(Autograd, LogSoftmaxPickAndBce) {
  std::mt19937_64 rng(6);
  const std::vector<int> targets{1, -1, 3};
  Mat labels(4, 1);
  labels << 1, 0, 0, 1;
  std::vector<T> in{T::parameter(random_matrix(3, 5, rng)), T::parameter(random_matrix(4, 1, rng))};
  expect_gradients(in, [&](const std::vector<T>& v) {
    return ad::add(ad::sum_log_softmax_at(v[0], targets), ad::bce_with_logits_mean(v[1], labels));
  });
}

TEST(Autograd, NoGradGuardSkipsGraph) {
  T p = T::parameter(Mat::Ones(2, 2));
  ad::NoGradGuard guard;
  const T y = ad::sum(ad::matmul(p, p));
  EXPECT_FALSE(y.requires_grad());
}

TEST(Autograd, GradientsAccumulateAcrossBackwardCalls) {
  T p = T::parameter(Mat::Constant(1, 1, 2.0));
  ad::scale(p, 3.0).backward();
  ad::scale(p, 3.0).backward();
  EXPECT_DOUBLE_EQ(p.grad()(0, 0), 6.0);
  p.zero_grad();
  EXPECT_EQ(p.grad().size(), 0);
}

TEST(Autograd, ShapeErrors) {
  T a = T::constant(Mat::Zero(2, 3));
  T b = T::constant(Mat::Zero(2, 3));
  EXPECT_THROW(ad::matmul(a, b), ShapeError);
  EXPECT_THROW(ad::slice_rows(a, 1, 2), ShapeError);
}

}  // namespace
}  // namespace sceneqa
