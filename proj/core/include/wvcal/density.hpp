#pragma once

#include <optional>
#include <span>
#include <vector>

namespace wvcal {

/// ln(p / (1 - p)). Throws Errc::domain outside (0, 1); callers clamp first.
double logit(double p);

double sigmoid(double x);

/// Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * n^(-1/5), with the
/// sample standard deviation and type-7 (linear interpolation) quartiles.
/// Falls back to 1.0 when the rule yields zero or a non-finite value.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian KDE on the logit axis. No change-of-variable Jacobian is applied:
/// densities are over logit(p), which is fine for the ratio of two such
/// models because the Jacobian cancels.
class KdeModel {
 public:
  KdeModel(std::vector<double> centers, double bandwidth);

  const std::vector<double>& centers() const noexcept { return centers_; }
  double bandwidth() const noexcept { return bandwidth_; }

  /// Log density at a point on the logit axis, floored at log(1e-300).
  double log_density_logit(double x) const;

  friend bool operator==(const KdeModel&, const KdeModel&) = default;

 private:
  std::vector<double> centers_;
  double bandwidth_;
};

/// Fits on scores in (0, 1). Bandwidth defaults to Silverman over the logits.
KdeModel fit_kde(std::span<const double> scores,
                 std::optional<double> bandwidth = std::nullopt);

double log_density(const KdeModel& model, double p);

/// PRM signal term: log f_correct(p) - log f_incorrect(p).
double log_density_ratio(const KdeModel& correct, const KdeModel& incorrect,
                         double p);

}  // namespace wvcal
