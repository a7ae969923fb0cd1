#include <cmath>
#include <limits>
#include <vector>

#include "rbf/games.hpp"

namespace rbf {

namespace {

// The alternating sum is trusted only when its rounding error, about
// max|term| * m * eps scaled by the size of the log-terms, stays below this
// fraction of the result.
constexpr long double kRelativeTolerance = 1e-13L;

long double log_binomial(std::uint64_t m, std::uint64_t j) {
  const auto lm = static_cast<long double>(m);
  const auto lj = static_cast<long double>(j);
  return std::lgamma(lm + 1.0L) - std::lgamma(lj + 1.0L) - std::lgamma(lm - lj + 1.0L);
}

long double log_term(std::uint64_t m, std::uint64_t balls, std::uint64_t j) {
  return log_binomial(m, j) +
         static_cast<long double>(balls) *
             std::log1p(-static_cast<long double>(j) / static_cast<long double>(m));
}

long double inclusion_exclusion(std::uint64_t m, std::uint64_t balls) {
  long double sum = 0.0L;
  long double comp = 0.0L;
  for (std::uint64_t j = 0; j < m; ++j) {
    const long double mag = std::exp(log_term(m, balls, j));
    const long double term = (j % 2 == 0) ? mag : -mag;
    const long double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

// Distribution of the number of occupied bits, one index at a time. Every
// term is non-negative so no cancellation occurs.
double occupancy(std::uint64_t m, std::uint64_t balls) {
  std::vector<double> p(m + 1, 0.0);
  p[0] = 1.0;
  const double dm = static_cast<double>(m);
  for (std::uint64_t b = 0; b < balls; ++b) {
    const std::uint64_t top = std::min<std::uint64_t>(b + 1, m);
    for (std::uint64_t j = top; j >= 1; --j) {
      p[j] = p[j] * (static_cast<double>(j) / dm) + p[j - 1] * (static_cast<double>(m - j + 1) / dm);
    }
    p[0] = 0.0;
  }
  return p[m];
}

}  // namespace

SaturationProbability saturation_probability(std::uint64_t m, std::uint64_t n, std::uint64_t k) {
  if (m == 0) throw ParameterError("m must be >= 1");
  const std::uint64_t balls = n * k;
  SaturationProbability out;
  const double dm = static_cast<double>(m);
  out.lower_bound = std::max(0.0, 1.0 - dm * std::exp(-static_cast<double>(balls) / dm));
  if (balls < m) {
    out.exact = 0.0;
    return out;
  }
  if (m == 1) {
    out.exact = 1.0;
    return out;
  }
  long double max_log = -std::numeric_limits<long double>::infinity();
  for (std::uint64_t j = 0; j < m; ++j) max_log = std::max(max_log, log_term(m, balls, j));
  const long double sum = inclusion_exclusion(m, balls);
  const long double log_scale = 1.0L + std::lgamma(static_cast<long double>(m) + 1.0L);
  const long double error = std::exp(max_log) * static_cast<long double>(m) * log_scale *
                            std::numeric_limits<long double>::epsilon();
  if (sum > 0.0L && error <= kRelativeTolerance * sum) {
    out.exact = static_cast<double>(std::min(1.0L, sum));
  } else {
    out.exact = occupancy(m, balls);
  }
  return out;
}

double expected_profit_formula(double p_s, double p_fp, std::uint64_t t, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  const double q = 1.0 - p_s;
  const double bets = p_s + std::pow(p_fp, static_cast<double>(t)) * q;
  return bets * ((p_s + p_fp * q) / delta - (1.0 - p_fp) * q / (1.0 - delta));
}

double profit_lower_bound(double p_s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  return p_s * p_s / delta - p_s * (1.0 - p_s) / (1.0 - delta);
}

OptimalKCheck resilience_threshold_with_optimal_k(std::uint64_t m, std::uint64_t n, double delta) {
  if (m == 0) throw ParameterError("m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  OptimalKCheck out;
  out.k = optimal_k(m, n);
  const double nk = static_cast<double>(n) * out.k;
  const double dm = static_cast<double>(m);
  out.p_s_lower_bound = std::max(0.0, 1.0 - dm * std::exp(-nk / dm));
  out.condition_met = nk > 0.0 && delta < out.p_s_lower_bound;
  out.simplified_chain_holds = nk > dm * std::log((1.0 - delta) / dm);
  return out;
}

}  // namespace rbf
