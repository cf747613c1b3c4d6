// Copyright 2026 The SANAC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SANAC_TESTS_GRADIENT_CHECK_H_
#define SANAC_TESTS_GRADIENT_CHECK_H_

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sanac/model.h"
#include "sanac/training.h"

namespace sanac::testing {

struct GroupError {
  std::string name;
  size_t size = 0;
  double analytic_norm = 0.0;
  double rel_error = 0.0;  // |g_fd - g| / max(|g_fd|, |g|)
};

// Central differences of the batch loss for every parameter, compared with
// the backpropagated gradient one parameter group at a time.
inline std::vector<GroupError> CheckGradients(
    const Model& model, std::span<const TrainingExample> examples, int stage,
    double alpha, const LossConfig& loss, double eps) {
  const std::vector<double> analytic =
      ComputeBatch(model, examples, stage, alpha, loss, true).grads;
  Model probe = model;
  std::vector<double> params(model.parameters().begin(),
                             model.parameters().end());
  std::vector<GroupError> out;
  for (const auto& group : model.layout().groups()) {
    double diff2 = 0.0, fd2 = 0.0, an2 = 0.0;
    for (size_t i = group.offset; i < group.offset + group.size; ++i) {
      const double saved = params[i];
      params[i] = saved + eps;
      probe.set_parameters(params);
      const double up = ComputeBatch(probe, examples, stage, alpha, loss, false).loss;
      params[i] = saved - eps;
      probe.set_parameters(params);
      const double down =
          ComputeBatch(probe, examples, stage, alpha, loss, false).loss;
      params[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      diff2 += (fd - analytic[i]) * (fd - analytic[i]);
      fd2 += fd * fd;
      an2 += analytic[i] * analytic[i];
    }
    probe.set_parameters(params);
    GroupError e;
    e.name = group.name;
    e.size = group.size;
    e.analytic_norm = std::sqrt(an2);
    const double scale = std::max({std::sqrt(fd2), std::sqrt(an2), 1e-300});
    e.rel_error = std::sqrt(diff2) / scale;
    out.push_back(e);
  }
  return out;
}

}  // namespace sanac::testing

#endif  // SANAC_TESTS_GRADIENT_CHECK_H_
