#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "msnn/gnn.hpp"
#include "msnn/grad.hpp"
#include "msnn/msnn.hpp"

using namespace msnn;

namespace {

const std::vector<WindowedSample>& batch(std::size_t n) {
  static const auto samples = testing::random_samples(8192, 9, 1);
  static std::vector<WindowedSample> out;
  out.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

template <bool Parallel>
void steer_loss_and_grad(benchmark::State& state) {
  MsNnModel model(testing::reference_config(Variant::Steer));
  const auto params = testing::random_params(model.param_count(), 2, 0.2);
  const auto& samples = batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = Parallel ? eval_loss_and_grad(model, params, samples)
                      : eval_loss_and_grad_serial(model, params, samples);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void gnn_loss_and_grad(benchmark::State& state) {
  GnnModel model(GnnConfig{9, 5});
  const auto params = testing::random_params(model.param_count(), 2, 0.02);
  const auto& samples = batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = Parallel ? eval_loss_and_grad(model, params, samples)
                      : eval_loss_and_grad_serial(model, params, samples);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(steer_loss_and_grad<false>)->Arg(1000)->Arg(8192)->Name("steer/serial");
BENCHMARK(steer_loss_and_grad<true>)->Arg(1000)->Arg(8192)->Name("steer/parallel");
BENCHMARK(gnn_loss_and_grad<false>)->Arg(1000)->Arg(8192)->Name("gnn/serial");
BENCHMARK(gnn_loss_and_grad<true>)->Arg(1000)->Arg(8192)->Name("gnn/parallel");

BENCHMARK_MAIN();
