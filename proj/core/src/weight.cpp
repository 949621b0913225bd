#include "wvcal/weight.hpp"

#include <cmath>

#include "wvcal/error.hpp"

namespace wvcal {

std::string_view to_string(WeightKind kind) noexcept {
  switch (kind) {
    case WeightKind::constant_one: return "constant_one";
    case WeightKind::raw_score: return "raw_score";
    case WeightKind::linear_offset: return "linear_offset";
    case WeightKind::logit_offset: return "logit_offset";
    case WeightKind::kde_ratio: return "kde_ratio";
  }
  return "unknown";
}

WeightKind weight_kind_from_string(std::string_view name) {
  for (auto k : {WeightKind::constant_one, WeightKind::raw_score, WeightKind::linear_offset,
                 WeightKind::logit_offset, WeightKind::kde_ratio}) {
    if (to_string(k) == name) return k;
  }
  throw Error(Errc::version, "unknown weight kind '" + std::string(name) + "'");
}

WeightFunction WeightFunction::constant_one() { return WeightFunction(WeightKind::constant_one); }

WeightFunction WeightFunction::raw_score() { return WeightFunction(WeightKind::raw_score); }

WeightFunction WeightFunction::linear_offset(double b) {
  if (!std::isfinite(b)) throw Error(Errc::invalid_parameter, "offset must be finite");
  WeightFunction w(WeightKind::linear_offset);
  w.offset_ = b;
  return w;
}

WeightFunction WeightFunction::logit_offset(double b) {
  if (!(b > 0.0 && b < 1.0)) {
    throw Error(Errc::invalid_parameter, "logit offset must lie in (0, 1)");
  }
  WeightFunction w(WeightKind::logit_offset);
  w.offset_ = b;
  w.logit_offset_ = logit(b);
  return w;
}

WeightFunction WeightFunction::kde_ratio(std::shared_ptr<const KdePair> densities,
                                         double llm_term) {
  if (!std::isfinite(llm_term)) throw Error(Errc::invalid_parameter, "LLM term must be finite");
  WeightFunction w(WeightKind::kde_ratio);
  w.densities_ = std::move(densities);
  w.llm_term_ = llm_term;
  return w;
}

double WeightFunction::operator()(double p) const {
  switch (kind_) {
    case WeightKind::constant_one: return 1.0;
    case WeightKind::raw_score: return p;
    case WeightKind::linear_offset: return p - *offset_;
    case WeightKind::logit_offset: return logit(p) - logit_offset_;
    case WeightKind::kde_ratio: {
      const double ratio =
          densities_ ? log_density_ratio(densities_->correct, densities_->incorrect, p) : 0.0;
      return ratio + llm_term_;
    }
  }
  return 0.0;
}

}  // namespace wvcal
