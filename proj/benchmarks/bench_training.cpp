#include <benchmark/benchmark.h>

#include "adjopinf/adjoint.hpp"
#include "adjopinf/harness.hpp"
#include "adjopinf/pod.hpp"

using namespace adjopinf;

namespace {

struct Fixture {
    RomParams theta;
    ObservedTrajectory obs;
    Eigen::VectorXd weights;
};

// Galerkin-exact synthetic ROM with a perturbed starting point.
const Fixture& fixture() {
    static const Fixture f = [] {
        SyntheticConfig sc;
        sc.n_snapshots = 801;
        sc.horizon = 8.0;
        const SyntheticSystem sys = make_synthetic_system(sc);
        const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(sc.n_snapshots, 0.0, sc.horizon);
        const SnapshotMatrix fom = simulate_synthetic_fom(sys.fom, sys.u0, {}, t, 1e-10, 1e-12);
        const PodBasis basis = compute_pod(fom, FixedRank{sc.r});
        const SnapshotMatrix Q = project(basis, fom);
        Fixture out;
        out.obs = ObservedTrajectory(Q.slice(0, 481));
        out.theta = fit_opinf(out.obs.data(), {1e-1, 0, 2});
        out.weights = estimate_mode_weights(out.obs.data().states(), basis.singular_values).diag;
        return out;
    }();
    return f;
}

}  // namespace

static void BM_LossAndGradient(benchmark::State& state) {
    const Fixture& f = fixture();
    LossSettings settings;
    settings.integrator.rtol = 1e-8;
    settings.integrator.atol = 1e-10;
    const TimeSpan span{f.obs.t_start(), f.obs.t_end()};
    for (auto _ : state) {
        const LossAndGradient lg =
            loss_and_gradient(f.theta, f.obs.state(0), f.obs, f.weights, {}, span, settings);
        benchmark::DoNotOptimize(lg.loss);
    }
}
BENCHMARK(BM_LossAndGradient)->Unit(benchmark::kMillisecond);

static void BM_TrainOneCycle(benchmark::State& state) {
    const Fixture& f = fixture();
    TrainConfig cfg;
    cfg.cycles = 1;
    cfg.integrator.rtol = 1e-8;
    cfg.integrator.atol = 1e-10;
    for (auto _ : state) {
        const TrainResult res = train(f.theta, f.obs, f.weights, cfg);
        benchmark::DoNotOptimize(res.best_loss);
    }
}
BENCHMARK(BM_TrainOneCycle)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
