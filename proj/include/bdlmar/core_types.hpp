#pragma once

// Trial data, lagged design matrices, effect decomposition, block imputation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdlmar/errors.hpp"

namespace bdlmar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Missing outcomes are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double y) { return std::isnan(y); }

/// One subject's daily record. Day labels are kept only for I/O; the models
/// index days positionally as t = 1..n.
struct TrialData {
  std::vector<long> days;
  std::vector<int> treatment;
  std::vector<double> outcome;

  std::size_t size() const { return treatment.size(); }

  bool has_missing() const {
    for (double y : outcome)
      if (is_missing(y)) return true;
    return false;
  }

  Vector outcome_vector() const {
    return Eigen::Map<const Vector>(outcome.data(), static_cast<Eigen::Index>(outcome.size()));
  }

  /// Builds a record with days 1..n.
  static TrialData from(std::vector<int> treatment, std::vector<double> outcome) {
    TrialData d;
    d.days.resize(treatment.size());
    for (std::size_t i = 0; i < d.days.size(); ++i) d.days[i] = static_cast<long>(i + 1);
    d.treatment = std::move(treatment);
    d.outcome = std::move(outcome);
    d.validate();
    return d;
  }

  void validate() const {
    if (treatment.size() != outcome.size())
      throw DimensionError("treatment and outcome lengths differ (" + std::to_string(treatment.size()) +
                           " vs " + std::to_string(outcome.size()) + ")");
    if (!days.empty() && days.size() != treatment.size())
      throw DimensionError("day labels do not match the series length");
    if (treatment.size() < 2) throw DimensionError("a trial needs at least 2 days");
    for (std::size_t i = 0; i < treatment.size(); ++i)
      if (treatment[i] != 0 && treatment[i] != 1)
        throw DataError("treatment on day index " + std::to_string(i + 1) + " is not 0/1");
  }
};

/// Working model orders: maximum treatment lag and error autoregression order.
struct LagSpec {
  int lag = 7;
  int ar = 1;

  int coefficients() const { return lag + 2; }  // mu, beta_0..beta_L

  void validate(std::size_t n) const {
    if (lag < 0 || ar < 0) throw DomainError("lag and AR order must be non-negative");
    const long rows = static_cast<long>(n) - ar;
    if (rows < lag + 2)
      throw DimensionError("need n - p >= L + 2 (n=" + std::to_string(n) + ", L=" + std::to_string(lag) +
                           ", p=" + std::to_string(ar) + ")");
  }
};

/// Immediate / carryover / total decomposition of a lag curve.
struct Effects {
  double immediate = 0.0;
  double carryover = 0.0;
  double total = 0.0;
};

/// Rows t = p+1..n, columns [1, X_t, X_{t-1}, ..., X_{t-L}], pre-study
/// exposures (s <= 0) coded as control.
inline Matrix build_lag_matrix(std::span<const int> treatment, const LagSpec& spec) {
  spec.validate(treatment.size());
  const auto n = static_cast<Eigen::Index>(treatment.size());
  const Eigen::Index rows = n - spec.ar;
  Matrix X(rows, spec.lag + 2);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const Eigen::Index t = spec.ar + k;  // 0-based day index
    X(k, 0) = 1.0;
    for (int l = 0; l <= spec.lag; ++l) X(k, l + 1) = (t - l >= 0) ? treatment[static_cast<std::size_t>(t - l)] : 0.0;
  }
  return X;
}

inline Matrix build_lag_matrix(const TrialData& data, const LagSpec& spec) {
  data.validate();
  return build_lag_matrix(std::span<const int>(data.treatment), spec);
}

inline Effects derived_effects(std::span<const double> beta) {
  Effects e;
  if (beta.empty()) return e;
  e.immediate = beta[0];
  for (std::size_t l = 1; l < beta.size(); ++l) e.carryover += beta[l];
  e.total = e.immediate + e.carryover;
  return e;
}

inline Effects derived_effects(const Vector& beta) {
  return derived_effects(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())));
}

/// Replaces each missing outcome with the mean of the observed outcomes in its
/// treatment block (maximal run of constant treatment).
inline TrialData impute_by_block(const TrialData& data) {
  data.validate();
  TrialData out = data;
  const std::size_t n = data.size();
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start;
    while (end + 1 < n && data.treatment[end + 1] == data.treatment[start]) ++end;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = start; t <= end; ++t) {
      if (!is_missing(data.outcome[t])) {
        sum += data.outcome[t];
        ++count;
      }
    }
    if (count == 0) {
      const long first = data.days.empty() ? static_cast<long>(start + 1) : data.days[start];
      const long last = data.days.empty() ? static_cast<long>(end + 1) : data.days[end];
      throw ImputationError("treatment block on days " + std::to_string(first) + "-" + std::to_string(last) +
                            " has no observed outcome");
    }
    if (count <= end - start) {
      const double mean = sum / static_cast<double>(count);
      for (std::size_t t = start; t <= end; ++t)
        if (is_missing(out.outcome[t])) out.outcome[t] = mean;
    }
    start = end + 1;
  }
  return out;
}

}  // namespace bdlmar
