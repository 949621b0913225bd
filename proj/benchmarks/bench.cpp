#include <benchmark/benchmark.h>

#include "wvcal/aggregators.hpp"
#include "wvcal/calibration.hpp"
#include "wvcal/density.hpp"
#include "wvcal/eval.hpp"
#include "wvcal/synth.hpp"

namespace {

wvcal::Dataset bench_data(std::size_t questions, std::size_t l) {
  wvcal::synth::SynthConfig c;
  c.num_questions = questions;
  c.responses_per_question = l;
  c.difficulty = wvcal::synth::BetaLaw{4.0, 4.0};
  c.score_law_correct = {8.0, 2.0};
  c.score_law_incorrect = {2.0, 8.0};
  return wvcal::synth::generate_dataset(c);
}

std::vector<double> pooled_scores(const wvcal::Dataset& d, bool correct) {
  std::vector<double> out;
  for (const auto& q : d.instances) {
    for (const auto& r : q.responses) {
      if (*r.label == correct) out.push_back(r.score);
    }
  }
  return out;
}

void BM_FitKde(benchmark::State& state) {
  const auto scores = pooled_scores(bench_data(static_cast<std::size_t>(state.range(0)), 8), true);
  for (auto _ : state) benchmark::DoNotOptimize(wvcal::fit_kde(scores));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scores.size()));
}
BENCHMARK(BM_FitKde)->Arg(125)->Arg(1250);

void BM_LogDensity(benchmark::State& state) {
  const auto model =
      wvcal::fit_kde(pooled_scores(bench_data(static_cast<std::size_t>(state.range(0)), 8), true));
  double p = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wvcal::log_density(model, p));
    p = p > 0.98 ? 0.01 : p + 0.01;
  }
}
BENCHMARK(BM_LogDensity)->Arg(125)->Arg(1250);

void BM_WeightedVote(benchmark::State& state) {
  const auto d = bench_data(64, static_cast<std::size_t>(state.range(0)));
  const auto w = wvcal::WeightFunction::logit_offset(0.3);
  for (auto _ : state) {
    for (const auto& q : d.instances) benchmark::DoNotOptimize(wvcal::weighted_vote(q, w));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_WeightedVote)->Arg(8)->Arg(64);

void BM_GridSearchOffset(benchmark::State& state) {
  auto cal = bench_data(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wvcal::grid_search_offset(cal, wvcal::OffsetFamily::logit));
  }
}
BENCHMARK(BM_GridSearchOffset)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ScalingCurve(benchmark::State& state) {
  const auto d = bench_data(200, 32);
  wvcal::eval::HarnessOptions opt;
  opt.trials = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wvcal::eval::scaling_curve(d, {wvcal::eval::methods::majority_vote()}, {1, 4, 16, 32}, opt));
  }
}
BENCHMARK(BM_ScalingCurve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
