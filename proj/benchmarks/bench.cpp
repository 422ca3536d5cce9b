#include <benchmark/benchmark.h>

#include "advrand/attacks.hpp"
#include "advrand/classifier.hpp"
#include "advrand/harness.hpp"
#include "advrand/ops.hpp"
#include "advrand/pattern.hpp"
#include "advrand/rng.hpp"
#include "advrand/tape.hpp"

using namespace advrand;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data()) v = rng.uniform();
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({side, side, 16}, 1);
  const Tensor k = random_tensor({3, 3, 16, 32}, 2);
  for (auto _ : state) {
    Tape t;
    Var out = conv2d(t.constant(x), t.constant(k), 2);
    benchmark::DoNotOptimize(out.value().data().data());
  }
}
BENCHMARK(BM_Conv2dForward)->Arg(14)->Arg(18);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({side, side, 16}, 1);
  const Tensor k = random_tensor({3, 3, 16, 32}, 2);
  for (auto _ : state) {
    Tape t;
    Var xv = t.variable(x), kv = t.variable(k);
    Var loss = sum(conv2d(xv, kv, 2));
    auto g = t.backward(loss);
    benchmark::DoNotOptimize(g.of(kv).data().data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(14)->Arg(18);

void BM_ModelForward(benchmark::State& state) {
  const ModelWeights w = init_model(ModelArch{}, 3);
  const Tensor image = random_tensor({36, 36, 3}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict(w, image));
}
BENCHMARK(BM_ModelForward);

void BM_ApplyPattern(benchmark::State& state) {
  const Tensor image = random_tensor({28, 28, 3}, 5);
  const PatternSpec spec = PatternSpec::geometric(33, 1, 2);
  for (auto _ : state) {
    Tensor out = apply_pattern(image, spec, 36);
    benchmark::DoNotOptimize(out.data().data());
  }
}
BENCHMARK(BM_ApplyPattern);

// 20 C&W iterations per run; divide by 20 for one step.
void BM_CwTwentySteps(benchmark::State& state) {
  const ModelWeights w = init_model(ModelArch{}, 3);
  const TargetModel target = make_vanilla_target(w);
  const Tensor image = random_tensor({28, 28, 3}, 6);
  for (auto _ : state) {
    AttackResult r = cw_l2(target, image, 0, 3.0, 0.0, 20, 0.03);
    benchmark::DoNotOptimize(r.perturbation_l2);
  }
}
BENCHMARK(BM_CwTwentySteps);

}  // namespace

BENCHMARK_MAIN();
