#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "wvcal/density.hpp"

namespace wvcal {

enum class WeightKind { constant_one, raw_score, linear_offset, logit_offset, kde_ratio };

std::string_view to_string(WeightKind kind) noexcept;
/// Throws Errc::version for unknown names.
WeightKind weight_kind_from_string(std::string_view name);

struct KdePair {
  KdeModel correct;
  KdeModel incorrect;

  friend bool operator==(const KdePair&, const KdePair&) = default;
};

/// A fitted score-to-vote-weight mapping. Immutable; copies share any fitted
/// density models.
class WeightFunction {
 public:
  static WeightFunction constant_one();
  static WeightFunction raw_score();
  /// w(p) = p - b
  static WeightFunction linear_offset(double b);
  /// w(p) = logit(p) - logit(b); b must lie in (0, 1).
  static WeightFunction logit_offset(double b);
  /// w(p) = log f1(p) - log f0(p) + llm_term. A null pair drops the ratio
  /// term (used when a label class is empty).
  static WeightFunction kde_ratio(std::shared_ptr<const KdePair> densities,
                                  double llm_term);

  double operator()(double p) const;

  WeightKind kind() const noexcept { return kind_; }
  std::optional<double> offset() const noexcept { return offset_; }
  const std::shared_ptr<const KdePair>& densities() const noexcept { return densities_; }
  double llm_term() const noexcept { return llm_term_; }

 private:
  explicit WeightFunction(WeightKind kind) : kind_(kind) {}

  WeightKind kind_;
  std::optional<double> offset_;
  double logit_offset_ = 0.0;
  std::shared_ptr<const KdePair> densities_;
  double llm_term_ = 0.0;
};

}  // namespace wvcal
