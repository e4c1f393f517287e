#include <random>

#include <benchmark/benchmark.h>

#include "adjopinf/opinf.hpp"
#include "adjopinf/rom.hpp"

using namespace adjopinf;

namespace {

RomParams random_stable_rom(Eigen::Index r, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.1);
    Eigen::VectorXd x(parameter_count(r, 0));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n(rng);
    const RomParams th = RomParams::from_vector(x, r);
    return RomParams(th.c(), th.A() - Eigen::MatrixXd::Identity(r, r), th.H(), th.B());
}

}  // namespace

static void BM_Rhs(benchmark::State& state) {
    const Eigen::Index r = state.range(0);
    const RomParams th = random_stable_rom(r, 1);
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(r, 0.3);
    Eigen::VectorXd out(r);
    for (auto _ : state) {
        autonomous_rhs_into(th, q, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_Rhs)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

static void BM_JacobianTransposeApply(benchmark::State& state) {
    const Eigen::Index r = state.range(0);
    const RomParams th = random_stable_rom(r, 2);
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(r, 0.3), v = Eigen::VectorXd::Ones(r);
    Eigen::VectorXd out(r);
    for (auto _ : state) {
        jac_state_transpose_apply(th, q, v, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_JacobianTransposeApply)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

static void BM_ForwardRollout(benchmark::State& state) {
    const Eigen::Index r = state.range(0);
    const RomParams th = random_stable_rom(r, 3);
    const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(r, 0.5);
    IntegratorOptions opts;
    opts.rtol = 1e-8;
    opts.atol = 1e-10;
    for (auto _ : state) {
        const ReducedTrajectory tr = integrate_forward(th, q0, {}, {0.0, 10.0}, opts);
        benchmark::DoNotOptimize(tr.states().data());
    }
}
BENCHMARK(BM_ForwardRollout)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_OpinfSolve(benchmark::State& state) {
    const Eigen::Index r = state.range(0), k = 1000;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd Q(r, k), qdot(r, k);
    for (Eigen::Index i = 0; i < Q.size(); ++i) {
        Q.data()[i] = n(rng);
        qdot.data()[i] = n(rng);
    }
    const Eigen::MatrixXd D = assemble_data_matrix(Q, Eigen::MatrixXd());
    for (auto _ : state) {
        const RomParams th = solve_opinf(D, qdot, {1e-2, 1, 2}, r);
        benchmark::DoNotOptimize(th.A().data());
    }
}
BENCHMARK(BM_OpinfSolve)->Arg(2)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
