#include "wvcal/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "wvcal/aggregators.hpp"
#include "wvcal/dataset_io.hpp"
#include "wvcal/density.hpp"
#include "wvcal/error.hpp"
#include "wvcal/io.hpp"
#include "wvcal/rng.hpp"

namespace wvcal::eval {

namespace {

bool solved(const QuestionInstance& sub, const std::string& chosen) {
  return sub.gold && chosen == *sub.gold;
}

Method selector(std::string name, std::function<std::string(const QuestionInstance&)> select) {
  return Method(std::move(name), [select = std::move(select)](const QuestionInstance&) -> Method::Judge {
    return [select](const QuestionInstance& sub, std::span<const std::size_t>) {
      return solved(sub, select(sub));
    };
  });
}

/// Method whose weights are a fixed function of each pool response.
Method cached_weights(std::string name, std::function<std::vector<double>(const QuestionInstance&)> weigh) {
  return Method(name, [name, weigh = std::move(weigh)](const QuestionInstance& pool) -> Method::Judge {
    auto weights = std::make_shared<const std::vector<double>>(weigh(pool));
    return [weights, name](const QuestionInstance& sub, std::span<const std::size_t> idx) {
      std::vector<double> w;
      w.reserve(idx.size());
      for (std::size_t i : idx) w.push_back((*weights)[i]);
      return solved(sub, weighted_vote_with_weights(sub, w, name).chosen);
    };
  });
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

namespace methods {

Method majority_vote() {
  return selector("majority_vote", [](const QuestionInstance& q) { return wvcal::majority_vote(q).chosen; });
}

Method best_of_n() {
  return selector("best_of_n", [](const QuestionInstance& q) { return wvcal::best_of_n(q).chosen; });
}

Method vanilla_weighted_vote() {
  return selector("vanilla_wv",
                  [](const QuestionInstance& q) { return wvcal::vanilla_weighted_vote(q).chosen; });
}

Method pass_at_n() {
  return Method("pass@n", [](const QuestionInstance&) -> Method::Judge {
    return [](const QuestionInstance& sub, std::span<const std::size_t>) { return wvcal::pass_at_n(sub); };
  });
}

Method optimal() {
  return selector("optimal", [](const QuestionInstance& q) { return optimal_aggregate(q).chosen; });
}

Method calibrated(std::shared_ptr<const CalibrationArtifact> artifact, std::string name) {
  if (!artifact) throw Error(Errc::invalid_artifact, "null calibration artifact");
  if (name.empty()) name = artifact->label();
  if (artifact->weight_kind != WeightKind::kde_ratio) {
    const auto w = artifact->weight_for(QuestionInstance{});
    return cached_weights(std::move(name), [w](const QuestionInstance& pool) {
      std::vector<double> out;
      for (const auto& r : pool.responses) out.push_back(w(r.score));
      return out;
    });
  }
  if (!artifact->densities) throw Error(Errc::invalid_artifact, "KDE artifact without densities");
  // The log-ratio is cached per pool response; the LLM term depends on the
  // subsample and is added per judgement.
  return Method(name, [artifact, name](const QuestionInstance& pool) -> Method::Judge {
    auto ratios = std::make_shared<std::vector<double>>();
    for (const auto& r : pool.responses) {
      ratios->push_back(
          log_density_ratio(artifact->densities->correct, artifact->densities->incorrect, r.score));
    }
    return [artifact, ratios, name](const QuestionInstance& sub, std::span<const std::size_t> idx) {
      const double llm = llm_signal_term(estimate_q_m(artifact->calibrator, sub),
                                         effective_answer_count(sub));
      std::vector<double> w;
      w.reserve(idx.size());
      for (std::size_t i : idx) w.push_back((*ratios)[i] + llm);
      return solved(sub, weighted_vote_with_weights(sub, w, name).chosen);
    };
  });
}

Method analytic(const synth::SynthConfig& config, std::map<std::string, double> true_q) {
  auto table = std::make_shared<const std::map<std::string, double>>(std::move(true_q));
  return cached_weights("analytic", [config, table](const QuestionInstance& pool) {
    auto it = table->find(pool.question_id);
    if (it == table->end()) {
      throw Error(Errc::invalid_input, "no generator q for question '" + pool.question_id + "'");
    }
    const double q = std::clamp(it->second, kScoreEpsilon, 1.0 - kScoreEpsilon);
    std::vector<double> out;
    for (const auto& r : pool.responses) out.push_back(synth::analytic_weight(config, q, r.score));
    return out;
  });
}

}  // namespace methods

std::vector<ScalingRow> ScalingReport::rows_for(const std::string& method) const {
  std::vector<ScalingRow> out;
  for (const auto& r : rows) {
    if (r.method == method) out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> default_budgets(const Dataset& data) {
  if (data.instances.empty()) throw Error(Errc::invalid_input, "dataset is empty");
  std::size_t min_l = data.instances.front().responses.size();
  for (const auto& q : data.instances) min_l = std::min(min_l, q.responses.size());
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= min_l; n *= 2) ns.push_back(n);
  if (ns.empty() || ns.back() != min_l) ns.push_back(min_l);
  return ns;
}

ScalingReport scaling_curve(const Dataset& data, std::vector<Method> methods,
                            const std::vector<std::size_t>& ns, const HarnessOptions& options,
                            bool add_bounds) {
  if (data.instances.empty()) throw Error(Errc::invalid_input, "dataset is empty");
  if (methods.empty() && !add_bounds) throw Error(Errc::invalid_input, "no methods to evaluate");
  if (ns.empty()) throw Error(Errc::invalid_input, "no sample budgets given");
  if (options.trials == 0) throw Error(Errc::invalid_input, "trials must be positive");
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] == 0) throw Error(Errc::invalid_input, "sample budget n must be at least 1");
    if (k > 0 && ns[k] <= ns[k - 1]) throw Error(Errc::invalid_input, "budgets must be strictly increasing");
  }
  bool all_labeled = true;
  bool all_full = true;
  for (const auto& q : data.instances) {
    if (!q.gold) throw Error(Errc::missing_gold, "question '" + q.question_id + "' has no gold answer");
    if (q.responses.size() < ns.back()) {
      throw Error(Errc::insufficient_responses,
                  "question '" + q.question_id + "' has " + std::to_string(q.responses.size()) +
                      " responses, fewer than n = " + std::to_string(ns.back()));
    }
    if (q.responses.size() != ns.back()) all_full = false;
    for (const auto& r : q.responses) all_labeled = all_labeled && r.label.has_value();
  }

  if (add_bounds) {
    auto has = [&](const std::string& name) {
      return std::any_of(methods.begin(), methods.end(), [&](const Method& m) { return m.name() == name; });
    };
    if (!has("pass@n")) methods.push_back(methods::pass_at_n());
    if (all_labeled && !has("optimal")) methods.push_back(methods::optimal());
  }

  const std::size_t num_methods = methods.size();
  const std::size_t num_ns = ns.size();
  const std::size_t trials = options.trials;
  // trials_for[k]: a budget equal to every question's L has no sampling variation.
  std::vector<std::size_t> trials_for(num_ns, trials);
  if (all_full) trials_for.back() = 1;

  const auto cell = [&](std::size_t m, std::size_t k, std::size_t t) {
    return (m * num_ns + k) * trials + t;
  };
  const std::size_t cells = num_methods * num_ns * trials;

  const std::size_t workers = std::min(resolve_threads(options.threads), data.instances.size());
  std::vector<std::vector<std::size_t>> counts(workers, std::vector<std::size_t>(cells, 0));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&](std::size_t worker) {
    auto& local = counts[worker];
    try {
      for (std::size_t qi = next++; qi < data.instances.size(); qi = next++) {
        const auto& pool = data.instances[qi];
        std::vector<Method::Judge> judges;
        judges.reserve(num_methods);
        for (const auto& m : methods) judges.push_back(m.prepare(pool));

        const std::uint64_t key = io::fnv1a64(pool.question_id);
        std::vector<std::size_t> perm(pool.responses.size());
        std::vector<std::size_t> idx;
        QuestionInstance sub;
        sub.question_id = pool.question_id;
        sub.gold = pool.gold;
        for (std::size_t t = 0; t < trials; ++t) {
          std::iota(perm.begin(), perm.end(), std::size_t{0});
          auto rng = derive_stream(options.seed, key, t);
          std::shuffle(perm.begin(), perm.end(), rng);
          for (std::size_t k = 0; k < num_ns; ++k) {
            if (t >= trials_for[k]) continue;
            idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(ns[k]));
            std::sort(idx.begin(), idx.end());
            sub.responses.clear();
            for (std::size_t i : idx) sub.responses.push_back(pool.responses[i]);
            for (std::size_t m = 0; m < num_methods; ++m) {
              if (judges[m](sub, idx)) ++local[cell(m, k, t)];
            }
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = data.instances.size();
    }
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ScalingReport report;
  const double questions = static_cast<double>(data.instances.size());
  for (std::size_t m = 0; m < num_methods; ++m) {
    for (std::size_t k = 0; k < num_ns; ++k) {
      std::vector<double> acc;
      for (std::size_t t = 0; t < trials_for[k]; ++t) {
        std::size_t hits = 0;
        for (const auto& local : counts) hits += local[cell(m, k, t)];
        acc.push_back(static_cast<double>(hits) / questions);
      }
      ScalingRow row;
      row.method = methods[m].name();
      row.n = ns[k];
      row.trials = acc.size();
      row.mean_accuracy = mean_of(acc);
      if (acc.size() > 1) {
        double ss = 0.0;
        for (double a : acc) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
        const double sd = std::sqrt(ss / static_cast<double>(acc.size() - 1));
        row.std_error = sd / std::sqrt(static_cast<double>(acc.size()));
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.metadata["seed"] = std::to_string(options.seed);
  report.metadata["trials"] = std::to_string(options.trials);
  report.metadata["dataset_hash"] = io::dataset_hash(data);
  return report;
}

AccuracyEstimate subsample_accuracy(const Dataset& data, const Method& method, std::size_t n,
                                    const HarnessOptions& options) {
  auto report = scaling_curve(data, {method}, {n}, options, false);
  const auto& row = report.rows.front();
  return {row.mean_accuracy, row.std_error, row.trials};
}

std::optional<std::size_t> matched_compute(const ScalingReport& report, const std::string& method_a,
                                           const std::string& method_b) {
  auto a = report.rows_for(method_a);
  auto b = report.rows_for(method_b);
  if (a.empty()) throw Error(Errc::invalid_input, "method '" + method_a + "' not in report");
  if (b.empty()) throw Error(Errc::invalid_input, "method '" + method_b + "' not in report");
  auto by_n = [](const ScalingRow& x, const ScalingRow& y) { return x.n < y.n; };
  std::sort(a.begin(), a.end(), by_n);
  const double target = std::max_element(b.begin(), b.end(), by_n)->mean_accuracy;
  for (const auto& row : a) {
    if (row.mean_accuracy >= target) return row.n;
  }
  return std::nullopt;
}

SweepReport offset_sweep(const Dataset& cal, OffsetFamily family) {
  const auto grid = offset_grid(family);
  const auto curve = offset_accuracy_curve(cal, family);
  SweepReport report;
  report.family = std::string(to_string(family));
  for (std::size_t k = 0; k < grid.size(); ++k) report.rows.push_back({grid[k], curve[k]});
  const auto best = std::max_element(curve.begin(), curve.end()) - curve.begin();
  report.best_b = grid[static_cast<std::size_t>(best)];
  return report;
}

QmMae qm_mae(const Dataset& data, const BinnedCalibrator& calibrator) {
  if (data.instances.empty()) throw Error(Errc::invalid_input, "dataset is empty");
  std::vector<double> truth, estimate;
  std::size_t total = 0, total_correct = 0;
  for (const auto& q : data.instances) {
    std::size_t correct = 0;
    for (const auto& r : q.responses) {
      if (!r.label) throw Error(Errc::missing_label, "question '" + q.question_id + "' has an unlabeled response");
      if (*r.label) ++correct;
    }
    total += q.responses.size();
    total_correct += correct;
    truth.push_back(static_cast<double>(correct) / static_cast<double>(q.responses.size()));
    estimate.push_back(estimate_q_m(calibrator, q));
  }
  const double global = static_cast<double>(total_correct) / static_cast<double>(total);
  QmMae out;
  out.questions = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out.mae_calibrated += std::abs(estimate[i] - truth[i]);
    out.mae_global += std::abs(global - truth[i]);
  }
  out.mae_calibrated /= static_cast<double>(truth.size());
  out.mae_global /= static_cast<double>(truth.size());
  return out;
}

WeightGapTable weight_gap_report(const Dataset& data, const CalibrationArtifact& artifact,
                                 std::span<const double> grid) {
  if (artifact.weight_kind != WeightKind::kde_ratio || !artifact.densities) {
    throw Error(Errc::invalid_artifact, "weight gap analysis needs a kde_ratio artifact");
  }
  WeightGapTable table;
  table.grid.assign(grid.begin(), grid.end());
  for (double p : grid) {
    table.global_curve.push_back(
        log_density_ratio(artifact.densities->correct, artifact.densities->incorrect, clamp_score(p)));
  }
  for (const auto& q : data.instances) {
    std::vector<double> correct, incorrect;
    for (const auto& r : q.responses) {
      if (!r.label) throw Error(Errc::missing_label, "question '" + q.question_id + "' has an unlabeled response");
      (*r.label ? correct : incorrect).push_back(r.score);
    }
    if (correct.empty() || incorrect.empty()) {
      ++table.skipped_degenerate;
      continue;
    }
    const auto f1 = fit_kde(correct);
    const auto f0 = fit_kde(incorrect);
    QuestionCurve curve{q.question_id, {}};
    for (double p : grid) curve.values.push_back(log_density_ratio(f1, f0, clamp_score(p)));
    table.question_curves.push_back(std::move(curve));
  }
  return table;
}

double sup_gap(std::span<const double> curve, std::span<const double> reference) {
  if (curve.size() != reference.size()) throw Error(Errc::invalid_input, "curve length mismatch");
  double gap = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) gap = std::max(gap, std::abs(curve[k] - reference[k]));
  return gap;
}

}  // namespace wvcal::eval
