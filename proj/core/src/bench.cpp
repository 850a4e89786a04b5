#include "ttde/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>

#include <malloc.h>

#include "ttde/errors.hpp"
#include "ttde/density_ops.hpp"
#include "ttde/models.hpp"

namespace ttde {

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::naive: return "naive";
        case Algo::svd_fast: return "fast";
        case Algo::svd_kn: return "kn";
        case Algo::svd_c: return "c";
        case Algo::svd_c_hier: return "hier";
        case Algo::rsvd_t: return "rsvdt";
    }
    return "?";
}

Algo algo_from_name(const std::string& name) {
    if (name == "naive") return Algo::naive;
    if (name == "fast") return Algo::svd_fast;
    if (name == "kn") return Algo::svd_kn;
    if (name == "c") return Algo::svd_c;
    if (name == "hier") return Algo::svd_c_hier;
    if (name == "rsvdt") return Algo::rsvd_t;
    throw config_error("unknown algorithm '" + name + "'");
}

namespace {

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double best_time(const std::function<void()>& fn, Index reps) {
    double best = 1e300;
    for (Index r = 0; r < reps; ++r) best = std::min(best, time_once(fn));
    return best;
}

}  // namespace

std::vector<BenchPoint> bench_compress(const BenchConfig& cfg) {
    // Keep large blocks on the heap across repetitions; without this every
    // repetition re-faults the sketch storage and the timings pick up a
    // bandwidth-dependent bias.
#if defined(__GLIBC__)
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, -1);
#endif
    std::vector<BenchPoint> out;
    for (const Index value : cfg.points) {
        const Index d = cfg.sweep == BenchSweep::dims ? value : cfg.fixed_dim;
        const Index count = cfg.sweep == BenchSweep::samples ? value : cfg.fixed_count;

        GmSpec spec;
        spec.d = d;
        const SampleSet data = gm_sample(spec, count, cfg.seed + static_cast<std::uint64_t>(value));
        const std::vector<BasisFamily> bases(
            static_cast<size_t>(d), BasisFamily::fourier(cfg.n_basis, spec.box_half_width));
        std::vector<MeanField1d> mf;
        for (const auto& g : spec.box()) mf.push_back(MeanField1d::uniform(g));

        for (const Algo algo : cfg.algos) {
            CompressSpec cs;
            cs.algo = algo;
            cs.ranks = uniform_ranks(d, cfg.rank);
            cs.seed = cfg.seed;
            // Timed region covers the whole fit from raw samples to a
            // normalized model, the same work `fit` does per invocation.
            DensityModel sink;
            auto fit_once = [&]() {
                const auto blocks = build_feature_blocks(data, bases, cfg.alpha);
                sink = normalize(deconvolve(compress(blocks, cs), cfg.alpha, 0.0, bases,
                                            mf, spec.box()));
            };
            fit_once();  // warm-up
            const double t = best_time(fit_once, cfg.reps);
            out.push_back({algo_name(algo), value, t});
        }
    }
    return out;
}

double bench_slope(const std::vector<BenchPoint>& points, const std::string& algo) {
    std::vector<double> x, y;
    for (const auto& p : points)
        if (p.algo == algo) {
            x.push_back(std::log2(static_cast<double>(p.param)));
            y.push_back(std::log2(p.wall_seconds));
        }
    if (x.size() < 2) throw config_error("bench_slope: not enough points for " + algo);
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ttde
