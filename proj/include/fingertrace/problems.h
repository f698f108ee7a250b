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
#ifndef FINGERTRACE_PROBLEMS_H_
#define FINGERTRACE_PROBLEMS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fingertrace/distributions.h"
#include "fingertrace/random.h"

namespace fingertrace {

// Linear-loss SCO instances.
//
//   kBoxLp             Theta = B_inf(d^{-1/p}), Z = k-sparse ternary,
//                      f(theta, z) = -k^{-1/q} <theta, z>
//   kL1Capped          Theta = B_1(1) ∩ B_inf(1/s), Z = {-1,+1}^d,
//                      f(theta, z) = -<theta, z>
//   kL1Counterexample  Theta = B_1(1), Z = {-1,+1}^d, f = -<theta, z>
enum class Variant { kBoxLp, kL1Capped, kL1Counterexample };

std::string VariantName(Variant v);

// Feasibility slack on norm constraints.
inline constexpr double kFeasibilityTol = 1e-9;

struct ProblemSpec {
  Variant variant = Variant::kBoxLp;
  int d = 1;
  double p = 2.0;  // kBoxLp only; the l1 variants use p = 1.
  int k = 1;       // kBoxLp only.
  int s = 1;       // kL1Capped only.

  static ProblemSpec BoxLp(int d, double p, int k);
  static ProblemSpec L1Capped(int d, int s);
  static ProblemSpec L1Counterexample(int d);

  void Validate() const;

  // Holder conjugate of the geometry's p; +inf when p = 1.
  double q() const;
  // The norm in which f(., z) is 1-Lipschitz: p for kBoxLp, 1 otherwise.
  double lipschitz_p() const;
  // k^{-1/q} for kBoxLp (1 when p = 1), 1 otherwise.
  double loss_scale() const;
  // Number of nonzeros of every data point.
  int data_sparsity() const;

  bool Contains(std::span<const double> theta) const;
};

struct ParameterPoint {
  std::vector<double> theta;
  bool feasible = false;
};

// Wraps theta and records whether it lies in spec's Theta.
ParameterPoint MakePoint(const ProblemSpec& spec, std::vector<double> theta);

// Throws ContractViolation if !theta.feasible, std::invalid_argument if z is
// outside the data space.
double Loss(const ProblemSpec& spec, const ParameterPoint& theta,
            std::span<const std::int8_t> z);

// argmax over Theta of <theta, v>. Ties: sign(0) = +1, lowest index first.
ParameterPoint SupportArgmax(const ProblemSpec& spec, std::span<const double> v);

// sup over Theta of <theta, v>, in closed form.
double SupportValue(const ProblemSpec& spec, std::span<const double> v);

// loss_scale * (sup <theta', mu> - <theta, mu>); population risk gap of the
// linear loss under any distribution with mean mu.
double ExcessRisk(const ProblemSpec& spec, const ParameterPoint& theta,
                  std::span<const double> mu);

// Checks |f(t1, z) - f(t2, z)| <= ||t1 - t2||_p + 1e-9 on random triples.
bool ValidateLipschitz(const ProblemSpec& spec, int trials, CounterRng& rng);

double Dot(std::span<const double> a, std::span<const double> b);
double NormP(std::span<const double> v, double p);

}  // namespace fingertrace

#endif  // FINGERTRACE_PROBLEMS_H_
