#pragma once

#include <string>
#include <vector>

#include "ttde/compress.hpp"
#include "ttde/estimator.hpp"

namespace ttde {

struct BenchPoint {
    std::string algo;
    Index param = 0;       // swept value (N or d)
    double wall_seconds = 0.0;
};

enum class BenchSweep { samples, dims };

struct BenchConfig {
    std::vector<Algo> algos;
    BenchSweep sweep = BenchSweep::samples;
    std::vector<Index> points;   // swept N or d values
    Index fixed_dim = 5;         // d when sweeping N
    Index fixed_count = 10000;   // N when sweeping d
    Index n_basis = 17;
    Index rank = 3;
    double alpha = 0.01;
    Index reps = 3;
    std::uint64_t seed = 0;
};

// Median wall time of the compression step (feature blocks prebuilt) on
// Gaussian-mixture data, one row per (algo, swept value).
std::vector<BenchPoint> bench_compress(const BenchConfig& cfg);

// Least-squares slope of log(time) against log(param).
double bench_slope(const std::vector<BenchPoint>& points, const std::string& algo);

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& name);

}  // namespace ttde
