// Timing harness comparing the serial reference kernels against the
// OpenMP-parallel ones on the workloads that dominate the toolkit: series
// convolution and Boltzmann averaging over a temperature grid.

#include "rnacomb/series.hpp"
#include "rnacomb/thermo.hpp"

#include <chrono>
#include <iostream>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace rnacomb;

namespace {

double seconds_of(const std::function<void()>& fn, int repeats) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / repeats;
}

TruncatedSeries random_series(const std::vector<char>& vars, const std::vector<int>& caps,
                              unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 7);
    TruncatedSeries s(vars, caps);
    if (vars.size() == 1) {
        for (int e = 0; e <= caps[0]; ++e) s.set_coeff({e}, frac(num(rng), den(rng)));
    } else {
        for (int e0 = 0; e0 <= caps[0]; ++e0)
            for (int e1 = 0; e1 <= caps[1]; ++e1)
                s.set_coeff({e0, e1}, frac(num(rng), den(rng)));
    }
    return s;
}

void bench_convolution(const std::vector<char>& vars, const std::vector<int>& caps,
                       const std::string& label, int repeats) {
    TruncatedSeries a = random_series(vars, caps, 1);
    TruncatedSeries b = random_series(vars, caps, 2);
    TruncatedSeries::set_parallel(false);
    TruncatedSeries serial = a * b;
    double t_serial = seconds_of([&] { volatile auto r = (a * b).is_zero(); (void)r; }, repeats);
    TruncatedSeries::set_parallel(true);
    TruncatedSeries parallel = a * b;
    double t_parallel = seconds_of([&] { volatile auto r = (a * b).is_zero(); (void)r; }, repeats);
    std::cout << label << ": serial " << t_serial * 1e3 << " ms, parallel " << t_parallel * 1e3
              << " ms, speedup " << t_serial / t_parallel
              << (serial == parallel ? "" : "  [MISMATCH]") << "\n";
}

void bench_melt(int n, int repeats) {
    double t_serial, t_parallel;
    TruncatedSeries::set_parallel(false);
    t_serial = seconds_of(
        [&] { thermo::melting_curve(n, 1, 0, 100, 0.5, 1.0, thermo::EnergyModel::kPhysicalR); },
        repeats);
    TruncatedSeries::set_parallel(true);
    t_parallel = seconds_of(
        [&] { thermo::melting_curve(n, 1, 0, 100, 0.5, 1.0, thermo::EnergyModel::kPhysicalR); },
        repeats);
    std::cout << "melting curve n=" << n << ": serial " << t_serial * 1e3 << " ms, parallel "
              << t_parallel * 1e3 << " ms, speedup " << t_serial / t_parallel << "\n";
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "built without OpenMP; both columns run the serial kernel\n";
#endif
    bench_convolution({'t'}, {300}, "univariate convolution, order 300", 3);
    bench_convolution({'t', 's'}, {96, 48}, "bivariate convolution, caps (96,48)", 3);
    bench_melt(80, 2);
    return 0;
}
