// Copyright 2026 The SceneQA Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sceneqa/model/parameters.hpp"

namespace sceneqa::testing {

struct GradCheckReport {
  double worst_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

// Compares the analytic gradient of `loss` (already accumulated into the
// store by the caller) with central differences, tensor by tensor:
// |g_analytic - g_numeric| / max(|g_analytic|, |g_numeric|) in L2 norm.
// Tensors whose gradients are both below `floor` are skipped; attention key
// biases, for one, have an exactly zero gradient that differencing only
// reproduces up to rounding noise.
inline GradCheckReport check_gradients(ParameterStore<double>& store, const std::function<double()>& loss,
                                       double h = 1e-6, double floor = 1e-7) {
  GradCheckReport report;
  for (auto [name, p] : store.items()) {
    const Matrix<double> analytic = p.grad().size() ? p.grad() : Matrix<double>::Zero(p.rows(), p.cols());
    Matrix<double> numeric(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.value().size(); ++i) {
      double& w = p.mutable_value().data()[i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    const double scale = std::max(analytic.norm(), numeric.norm());
    if (scale < floor) continue;
    ++report.checked;
    const double rel = (analytic - numeric).norm() / scale;
    if (rel > report.worst_relative_error) {
      report.worst_relative_error = rel;
      report.worst_parameter = name;
    }
  }
  return report;
}

}  // namespace sceneqa::testing
