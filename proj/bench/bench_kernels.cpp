// Parallel kernels against their serial twins. Run with OMP_NUM_THREADS set to compare.

#include <random>

#include <benchmark/benchmark.h>

#include "engage/explain.hpp"
#include "engage/kernels.hpp"

using namespace engage;

namespace {

Eigen::MatrixXd data(int n, int p) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = g(rng);
  return X;
}

std::vector<double> values(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_Gram(benchmark::State& st) {
  auto X = data(static_cast<int>(st.range(0)), 13);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gram(X, kernels::KernelKind::rbf, 0.1));
}
void BM_GramSerial(benchmark::State& st) {
  auto X = data(static_cast<int>(st.range(0)), 13);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::gram(X, kernels::KernelKind::rbf, 0.1));
}

void BM_Cross(benchmark::State& st) {
  auto A = data(static_cast<int>(st.range(0)), 13), B = data(500, 13);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::cross(A, B, kernels::KernelKind::rbf, 0.1));
}
void BM_CrossSerial(benchmark::State& st) {
  auto A = data(static_cast<int>(st.range(0)), 13), B = data(500, 13);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::cross(A, B, kernels::KernelKind::rbf, 0.1));
}

auto accept_all = [](std::ptrdiff_t, std::ptrdiff_t) { return true; };

void BM_Tally(benchmark::State& st) {
  auto y = values(static_cast<int>(st.range(0)), 1), p = values(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::tally_pairs(y, p, accept_all));
}
void BM_TallySerial(benchmark::State& st) {
  auto y = values(static_cast<int>(st.range(0)), 1), p = values(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::tally_pairs(y, p, accept_all));
}

PredictFn smooth_model() {
  return [](const Eigen::MatrixXd& Z) -> Eigen::VectorXd { return (Z.rowwise().squaredNorm()).array().sqrt(); };
}

void BM_Shapley(benchmark::State& st) {
  auto X = data(static_cast<int>(st.range(0)), 13), bg = data(100, 13);
  for (auto _ : st) benchmark::DoNotOptimize(shapley_matrix(smooth_model(), X, bg, {64, 1}));
}
void BM_ShapleySerial(benchmark::State& st) {
  auto X = data(static_cast<int>(st.range(0)), 13), bg = data(100, 13);
  for (auto _ : st) benchmark::DoNotOptimize(serial::shapley_matrix(smooth_model(), X, bg, {64, 1}));
}

}  // namespace

BENCHMARK(BM_Gram)->Arg(500)->Arg(2000);
BENCHMARK(BM_GramSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_Cross)->Arg(500)->Arg(2000);
BENCHMARK(BM_CrossSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_Tally)->Arg(1000)->Arg(4000);
BENCHMARK(BM_TallySerial)->Arg(1000)->Arg(4000);
BENCHMARK(BM_Shapley)->Arg(50);
BENCHMARK(BM_ShapleySerial)->Arg(50);

BENCHMARK_MAIN();
