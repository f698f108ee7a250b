/*
 * Copyright 2026 The Fingertrace Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Golub-Welsch for the symmetric Jacobi weight (1 - x^2)^a, a = beta - 1.
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "fingertrace/distributions.h"

namespace fingertrace {
namespace {

// Squared off-diagonal of the monic Jacobi recurrence with alpha = beta = a.
double RecurrenceCoefficient(int n, double a) {
  if (n == 1) return 1.0 / (2.0 * a + 3.0);
  const double two_na = 2.0 * n + 2.0 * a;
  return n * (n + 2.0 * a) / ((two_na + 1.0) * (two_na - 1.0));
}

}  // namespace

QuadratureRule PriorQuadrature(const BetaPrior& prior, int max_degree) {
  prior.Validate();
  if (max_degree < 0) {
    throw std::invalid_argument("PriorQuadrature: max_degree must be >= 0");
  }
  const int m = (max_degree + 2) / 2;
  QuadratureRule rule;
  if (m == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  const double a = prior.beta - 1.0;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m - 1);
  for (int n = 1; n < m; ++n) sub(n - 1) = std::sqrt(RecurrenceCoefficient(n, a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("PriorQuadrature: eigensolver failed");
  }
  const Eigen::VectorXd& x = solver.eigenvalues();
  const Eigen::MatrixXd& v = solver.eigenvectors();
  rule.nodes.resize(m);
  rule.weights.resize(m);
  // Symmetrize: the weight is even, so exact nodes come in +/- pairs.
  for (int i = 0; i < m; ++i) {
    const int mirror = m - 1 - i;
    rule.nodes[i] = prior.gamma * 0.5 * (x(i) - x(mirror));
    rule.weights[i] =
        0.5 * (v(0, i) * v(0, i) + v(0, mirror) * v(0, mirror));
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace fingertrace
