#include "wvcal/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wvcal/error.hpp"

namespace wvcal {

namespace {

const double kLogDensityFloor = std::log(1e-300);
const double kLogSqrtTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double quantile_type7(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::domain, "logit argument outside (0, 1)");
  return std::log(p / (1.0 - p));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw Error(Errc::invalid_input, "bandwidth of an empty sample");
  const auto n = static_cast<double>(samples.size());
  if (samples.size() < 2) return 1.0;

  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_type7(sorted, 0.75) - quantile_type7(sorted, 0.25);

  const double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
  if (!std::isfinite(h) || h <= 0.0) return 1.0;
  return h;
}

KdeModel::KdeModel(std::vector<double> centers, double bandwidth)
    : centers_(std::move(centers)), bandwidth_(bandwidth) {
  if (centers_.empty()) throw Error(Errc::invalid_input, "KDE needs at least one center");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
    throw Error(Errc::invalid_input, "KDE bandwidth must be positive and finite");
  }
  for (double c : centers_) {
    if (!std::isfinite(c)) throw Error(Errc::invalid_input, "KDE center is not finite");
  }
}

double KdeModel::log_density_logit(double x) const {
  // log-sum-exp over -z^2/2; the nearest center gives the max term.
  double max_term = -INFINITY;
  for (double c : centers_) {
    const double z = (x - c) / bandwidth_;
    max_term = std::max(max_term, -0.5 * z * z);
  }
  double sum = 0.0;
  for (double c : centers_) {
    const double z = (x - c) / bandwidth_;
    sum += std::exp(-0.5 * z * z - max_term);
  }
  const double n = static_cast<double>(centers_.size());
  const double value = max_term + std::log(sum) - std::log(n * bandwidth_) - kLogSqrtTwoPi;
  return std::max(value, kLogDensityFloor);
}

KdeModel fit_kde(std::span<const double> scores, std::optional<double> bandwidth) {
  if (scores.empty()) throw Error(Errc::invalid_input, "KDE fit on an empty score set");
  std::vector<double> centers;
  centers.reserve(scores.size());
  for (double p : scores) centers.push_back(logit(p));
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(centers);
  return KdeModel(std::move(centers), h);
}

double log_density(const KdeModel& model, double p) {
  return model.log_density_logit(logit(p));
}

double log_density_ratio(const KdeModel& correct, const KdeModel& incorrect, double p) {
  const double x = logit(p);
  return correct.log_density_logit(x) - incorrect.log_density_logit(x);
}

}  // namespace wvcal
