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
#include "fingertrace/problems.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fingertrace/errors.h"

namespace fingertrace {
namespace {

double SignOf(double x) { return x < 0.0 ? -1.0 : 1.0; }

// Indices of the s largest |v|, lowest index first among equal magnitudes.
std::vector<int> TopMagnitudes(std::span<const double> v, int s) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  order.resize(s);
  return order;
}

std::vector<double> RandomFeasible(const ProblemSpec& spec, CounterRng& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> theta(spec.d);
  switch (spec.variant) {
    case Variant::kBoxLp: {
      const double r = std::pow(spec.d, -1.0 / spec.p);
      for (double& t : theta) t = r * unit(rng);
      return theta;
    }
    case Variant::kL1Counterexample: {
      for (double& t : theta) t = unit(rng);
      const double norm = NormP(theta, 1.0);
      const double radius = 0.5 * (unit(rng) + 1.0);
      for (double& t : theta) t *= norm > 0.0 ? radius / norm : 0.0;
      return theta;
    }
    case Variant::kL1Capped: {
      // Convex combination of two vertices, shrunk toward 0.
      std::vector<double> g1(spec.d), g2(spec.d);
      for (double& g : g1) g = unit(rng);
      for (double& g : g2) g = unit(rng);
      const auto a = SupportArgmax(spec, g1).theta;
      const auto b = SupportArgmax(spec, g2).theta;
      const double mix = 0.5 * (unit(rng) + 1.0);
      const double radius = 0.5 * (unit(rng) + 1.0);
      for (int j = 0; j < spec.d; ++j) {
        theta[j] = radius * (mix * a[j] + (1.0 - mix) * b[j]);
      }
      return theta;
    }
  }
  return theta;
}

std::vector<std::int8_t> RandomDataPoint(const ProblemSpec& spec,
                                         CounterRng& rng) {
  std::vector<std::int8_t> z(spec.d, 0);
  const std::vector<int> support =
      SampleSupport(spec.d, spec.data_sparsity(), rng);
  for (int j : support) z[j] = (rng() & 1u) ? 1 : -1;
  return z;
}

}  // namespace

std::string VariantName(Variant v) {
  switch (v) {
    case Variant::kBoxLp:
      return "box_lp";
    case Variant::kL1Capped:
      return "l1_capped";
    case Variant::kL1Counterexample:
      return "l1_counterexample";
  }
  return "unknown";
}

ProblemSpec ProblemSpec::BoxLp(int d, double p, int k) {
  ProblemSpec spec{Variant::kBoxLp, d, p, k, 1};
  spec.Validate();
  return spec;
}

ProblemSpec ProblemSpec::L1Capped(int d, int s) {
  ProblemSpec spec{Variant::kL1Capped, d, 1.0, d, s};
  spec.Validate();
  return spec;
}

ProblemSpec ProblemSpec::L1Counterexample(int d) {
  ProblemSpec spec{Variant::kL1Counterexample, d, 1.0, d, 1};
  spec.Validate();
  return spec;
}

void ProblemSpec::Validate() const {
  if (d < 1) throw std::invalid_argument("ProblemSpec: d must be >= 1");
  switch (variant) {
    case Variant::kBoxLp:
      if (!(p >= 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("ProblemSpec: p must lie in [1, inf)");
      }
      if (k < 1 || k > d) {
        throw std::invalid_argument("ProblemSpec: k must lie in [1, d]");
      }
      break;
    case Variant::kL1Capped:
      if (s < 1 || s > d) {
        throw std::invalid_argument("ProblemSpec: s must lie in [1, d]");
      }
      break;
    case Variant::kL1Counterexample:
      break;
  }
}

double ProblemSpec::q() const {
  const double pp = lipschitz_p();
  if (pp == 1.0) return std::numeric_limits<double>::infinity();
  return pp / (pp - 1.0);
}

double ProblemSpec::lipschitz_p() const {
  return variant == Variant::kBoxLp ? p : 1.0;
}

double ProblemSpec::loss_scale() const {
  if (variant != Variant::kBoxLp || p == 1.0) return 1.0;
  return std::pow(static_cast<double>(k), -1.0 / q());
}

int ProblemSpec::data_sparsity() const {
  return variant == Variant::kBoxLp ? k : d;
}

bool ProblemSpec::Contains(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != d) return false;
  switch (variant) {
    case Variant::kBoxLp:
      return NormP(theta, std::numeric_limits<double>::infinity()) <=
             std::pow(d, -1.0 / p) + kFeasibilityTol;
    case Variant::kL1Capped:
      return NormP(theta, 1.0) <= 1.0 + kFeasibilityTol &&
             NormP(theta, std::numeric_limits<double>::infinity()) <=
                 1.0 / s + kFeasibilityTol;
    case Variant::kL1Counterexample:
      return NormP(theta, 1.0) <= 1.0 + kFeasibilityTol;
  }
  return false;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

double NormP(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

ParameterPoint MakePoint(const ProblemSpec& spec, std::vector<double> theta) {
  ParameterPoint point;
  point.feasible = spec.Contains(theta);
  point.theta = std::move(theta);
  return point;
}

double Loss(const ProblemSpec& spec, const ParameterPoint& theta,
            std::span<const std::int8_t> z) {
  if (!theta.feasible) {
    throw ContractViolation("Loss: parameter point is not feasible");
  }
  if (static_cast<int>(z.size()) != spec.d ||
      static_cast<int>(theta.theta.size()) != spec.d) {
    throw std::invalid_argument("Loss: dimension mismatch");
  }
  int l0 = 0;
  double inner = 0.0;
  for (int j = 0; j < spec.d; ++j) {
    if (z[j] != 0) ++l0;
    inner += theta.theta[j] * z[j];
  }
  if (l0 != spec.data_sparsity()) {
    throw std::invalid_argument("Loss: z is outside the data space");
  }
  return -spec.loss_scale() * inner;
}

ParameterPoint SupportArgmax(const ProblemSpec& spec,
                             std::span<const double> v) {
  if (static_cast<int>(v.size()) != spec.d) {
    throw std::invalid_argument("SupportArgmax: dimension mismatch");
  }
  std::vector<double> theta(spec.d, 0.0);
  switch (spec.variant) {
    case Variant::kBoxLp: {
      const double r = std::pow(spec.d, -1.0 / spec.p);
      for (int j = 0; j < spec.d; ++j) theta[j] = r * SignOf(v[j]);
      break;
    }
    case Variant::kL1Counterexample: {
      const int j = TopMagnitudes(v, 1).front();
      theta[j] = SignOf(v[j]);
      break;
    }
    case Variant::kL1Capped: {
      for (int j : TopMagnitudes(v, spec.s)) theta[j] = SignOf(v[j]) / spec.s;
      break;
    }
  }
  return ParameterPoint{std::move(theta), true};
}

double SupportValue(const ProblemSpec& spec, std::span<const double> v) {
  switch (spec.variant) {
    case Variant::kBoxLp:
      return std::pow(spec.d, -1.0 / spec.p) * NormP(v, 1.0);
    case Variant::kL1Counterexample:
      return NormP(v, std::numeric_limits<double>::infinity());
    case Variant::kL1Capped: {
      double top = 0.0;
      for (int j : TopMagnitudes(v, spec.s)) top += std::abs(v[j]);
      return top / spec.s;
    }
  }
  return 0.0;
}

double ExcessRisk(const ProblemSpec& spec, const ParameterPoint& theta,
                  std::span<const double> mu) {
  if (!theta.feasible) {
    throw ContractViolation("ExcessRisk: parameter point is not feasible");
  }
  if (static_cast<int>(mu.size()) != spec.d) {
    throw std::invalid_argument("ExcessRisk: dimension mismatch");
  }
  const double gap = SupportValue(spec, mu) - Dot(theta.theta, mu);
  return spec.loss_scale() * std::max(gap, 0.0);
}

bool ValidateLipschitz(const ProblemSpec& spec, int trials, CounterRng& rng) {
  if (trials < 1) {
    throw std::invalid_argument("ValidateLipschitz: trials must be >= 1");
  }
  const double p = spec.lipschitz_p();
  for (int t = 0; t < trials; ++t) {
    const ParameterPoint a = MakePoint(spec, RandomFeasible(spec, rng));
    // Every 16th triple repeats the first point.
    const ParameterPoint b =
        t % 16 == 0 ? a : MakePoint(spec, RandomFeasible(spec, rng));
    const std::vector<std::int8_t> z = RandomDataPoint(spec, rng);
    std::vector<double> diff(spec.d);
    for (int j = 0; j < spec.d; ++j) diff[j] = a.theta[j] - b.theta[j];
    const double lhs = std::abs(Loss(spec, a, z) - Loss(spec, b, z));
    if (lhs > NormP(diff, p) + 1e-9) return false;
  }
  return true;
}

}  // namespace fingertrace
