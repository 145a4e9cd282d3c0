#include <benchmark/benchmark.h>

#include "simm/ffvb.hpp"
#include "simm/mcmc.hpp"

using namespace simm;

namespace {

SimmInput simple_input() {
    SimmData d;
    d.mixtures.resize(10, 1);
    d.mixtures << 4, 4.5, 5, 7, 6, 2, 3, 3.5, 5.5, 6.5;
    d.tracer_names = {"iso1"};
    d.source_names = {"A", "B", "C"};
    d.source_means = (Matrix(3, 1) << -10, 0, 10).finished();
    d.source_sds = Matrix::Ones(3, 1);
    return SimmInput(std::move(d));
}

}  // namespace

static void BM_LogPosterior(benchmark::State& state) {
    const SimmInput in = simple_input();
    const GroupModel model(in, 0, Priors::defaults(3));
    const Vector f = (Vector(3) << 0.2, -0.4, 0.9).finished();
    const Vector tau = Vector::Constant(1, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(model.log_posterior(f, tau));
}
BENCHMARK(BM_LogPosterior);

static void BM_Mcmc(benchmark::State& state) {
    const SimmInput in = simple_input();
    McmcControl c;
    c.iterations = static_cast<int>(state.range(0));
    c.burn_in = c.iterations / 10;
    for (auto _ : state) benchmark::DoNotOptimize(run_mcmc(in, Priors::defaults(3), c));
}
BENCHMARK(BM_Mcmc)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Ffvb(benchmark::State& state) {
    const SimmInput in = simple_input();
    FfvbControl c;
    c.S = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_ffvb(in, Priors::defaults(3), c));
}
BENCHMARK(BM_Ffvb)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_LowerBoundGradient(benchmark::State& state) {
    const SimmInput in = simple_input();
    const GroupModel model(in, 0, Priors::defaults(3));
    const LogJoint lj = make_log_joint(model);
    const VariationalState s = VariationalState::initial(Vector::Zero(3), 1);
    Rng rng = make_rng(1, {0});
    for (auto _ : state) {
        const ScoreBatch batch = evaluate_batch(s, sample_q(s, 100, rng), lj);
        benchmark::DoNotOptimize(lb_gradient(batch, control_variates(batch)));
    }
}
BENCHMARK(BM_LowerBoundGradient);
BENCHMARK_MAIN();
