#include <benchmark/benchmark.h>

#include <vector>

#include "vsr/bounds.hpp"
#include "vsr/certifier.hpp"
#include "vsr/comparison.hpp"
#include "vsr/cubic_example.hpp"
#include "vsr/falsifier.hpp"
#include "vsr/models.hpp"
#include "vsr/trajectory.hpp"

using namespace vsr;

static void BM_ExpressionEval(benchmark::State& state) {
  const auto f = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  double s = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f(s));
    s += 1e-6;
  }
}
BENCHMARK(BM_ExpressionEval);

static void BM_InvertBisection(benchmark::State& state) {
  const auto f = ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)");
  for (auto _ : state) benchmark::DoNotOptimize(invert_k(f, 4.0));
}
BENCHMARK(BM_InvertBisection);

static void BM_FlowBeta(benchmark::State& state) {
  const auto sq = ComparisonFn::power(1, 2);
  const auto beta =
      beta_from_certificate(sq, sq, ComparisonFn::from_expression("3*pow(s,4)+pow(s,2)"));
  std::vector<double> ts(static_cast<std::size_t>(state.range(0)));
  for (std::size_t j = 0; j < ts.size(); ++j) ts[j] = 0.03 * j;
  for (auto _ : state) benchmark::DoNotOptimize(beta.eval_along(0.8, ts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FlowBeta)->Arg(1)->Arg(201);

static void BM_TightIntegrationStep(benchmark::State& state) {
  DiscreteStepMap step{StepMethod::TightIntegration, parse_vector_field("x1^3+u1"), 1e-10};
  const Vec x{0.7}, u{-1.2};
  for (auto _ : state) benchmark::DoNotOptimize(discretize_step(step, x, u, 0.05));
}
BENCHMARK(BM_TightIntegrationStep);

static void BM_Ensemble(benchmark::State& state) {
  const auto model = make_model("cubic_example");
  EnsembleSpec spec;
  spec.scenarios = static_cast<std::size_t>(state.range(0));
  spec.sampling = {.T_max = 0.06, .length = 200};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ensemble(model, spec, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200);
}
BENCHMARK(BM_Ensemble)->Arg(100)->Arg(1000);

static void BM_CertifyDecrease(benchmark::State& state) {
  const auto model = make_model("cubic_example");
  const auto cand = example::example_candidate(1.0, 0.025);
  DecreaseGrid g;
  g.workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        certify_decrease(model, cand, DecreaseMode::InputToState, 0.0677, g));
}
BENCHMARK(BM_CertifyDecrease)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_VerifyExample(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(example::verify_example(1.0, 0.025));
}
BENCHMARK(BM_VerifyExample)->Unit(benchmark::kMillisecond)->Iterations(2);

static void BM_Falsify(benchmark::State& state) {
  const auto model = make_model("cubic_example");
  const auto gains = construct_gains(model, example::example_candidate(1.0, 0.025),
                                     DecreaseMode::InputToState, 1.0, 0.025, {.T_bound = 0.06});
  const EnvelopeClaim claim{gains.beta, gains.gamma, 0.0, 1.0, 0.025, 0.06};
  for (auto _ : state)
    benchmark::DoNotOptimize(falsify(model, claim, {.restarts = 500, .local_iterations = 50}));
}
BENCHMARK(BM_Falsify)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
