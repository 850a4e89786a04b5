// Command-line driver: generate synthetic data, fit tensor-train density
// models, draw samples, evaluate metrics and benchmark the compressors.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttde/bench.hpp"
#include "ttde/density_ops.hpp"
#include "ttde/estimator.hpp"
#include "ttde/io.hpp"
#include "ttde/metrics.hpp"
#include "ttde/models.hpp"
#include "ttde/preprocess.hpp"

using nlohmann::json;
using namespace ttde;

namespace {

void write_manifest(const std::string& out_path, const json& manifest) {
    std::ofstream f(out_path + ".manifest.json");
    if (!f) throw config_error("cannot write manifest for " + out_path);
    f << manifest.dump(2) << "\n";
}

json read_manifest(const std::string& data_path) {
    std::ifstream f(data_path + ".manifest.json");
    if (!f) return json::object();
    json j;
    f >> j;
    return j;
}

std::string canonical(const json& j) { return j.dump(); }

// ---- gen -------------------------------------------------------------

struct GenArgs {
    std::string model = "gm";
    Index dim = 10;
    Index side = 4;
    Index count = 1024;
    std::uint64_t seed = 0;
    std::string out;
    double step = 0.0;
    Index burn_in = 10000;
    Index thinning = 10;
    Index per_chain = 500;
};

int run_gen(const GenArgs& a) {
    SampleSet s;
    json spec_json;
    if (a.model == "gm") {
        GmSpec spec;
        spec.d = a.dim;
        s = gm_sample(spec, a.count, a.seed);
        spec_json = {{"model", "gm"}, {"d", spec.d}, {"L", spec.box_half_width},
                     {"mesh", spec.mesh}};
    } else if (a.model == "gl1d" || a.model == "gl2d") {
        const GlSpec spec =
            a.model == "gl1d" ? GlSpec::gl1d(a.dim) : GlSpec::gl2d(a.side);
        LangevinConfig cfg;
        cfg.step = a.step;
        cfg.burn_in = a.burn_in;
        cfg.thinning = a.thinning;
        cfg.samples_per_chain = a.per_chain;
        cfg.seed = a.seed;
        s = gl_langevin_sample(spec, cfg, a.count);
        spec_json = {{"model", a.model},
                     {"d", spec.d},
                     {"side", spec.side},
                     {"lambda", spec.lambda},
                     {"beta", spec.beta},
                     {"L", spec.box_half_width},
                     {"mesh", spec.mesh},
                     {"langevin",
                      {{"step", cfg.step_or_default(spec.beta)},
                       {"burn_in", cfg.burn_in},
                       {"thinning", cfg.thinning},
                       {"samples_per_chain", cfg.samples_per_chain}}}};
    } else {
        throw config_error("gen: unknown model '" + a.model + "'");
    }

    write_samples(a.out, s.data);
    json manifest;
    manifest["command"] = "gen";
    manifest["spec"] = spec_json;
    manifest["n_samples"] = s.count();
    manifest["seed"] = a.seed;
    manifest["box"] = json::array();
    for (const auto& g : s.box) manifest["box"].push_back(grid_to_json(g));
    manifest["config_hash"] = config_hash(canonical(manifest));
    write_manifest(a.out, manifest);
    std::cout << "wrote " << s.count() << " samples to " << a.out << "\n";
    return 0;
}

// ---- fit -------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string out;
    std::string algo = "kn";
    Index rank = 3;
    Index n_basis = 17;
    double alpha = 0.01;
    double lambda = 0.0;
    Index sketch = 0;
    Index cluster_order = 1;
    std::uint64_t seed = 0;
    double box_l = 0.0;   // 0: take the box from the manifest
    double mesh = 0.0;
    Index pca_dim = 0;
    bool kde_mean_field = false;
    bool streaming_pca = false;
};

SampleSet load_samples(const std::string& path, double box_l, double mesh) {
    SampleSet s;
    s.data = read_samples(path);
    const json manifest = read_manifest(path);
    if (box_l <= 0 && manifest.contains("box")) {
        for (const auto& g : manifest.at("box")) s.box.push_back(grid_from_json(g));
    } else {
        if (box_l <= 0 || mesh <= 0)
            throw config_error("fit: provide --box-l and --mesh or a data manifest");
        s.box.assign(static_cast<size_t>(s.data.cols()), GridSpec(-box_l, box_l, mesh));
    }
    s.validate();
    return s;
}

int run_fit(const FitArgs& a) {
    const SampleSet s = load_samples(a.data, a.box_l, a.mesh);
    const Index d = s.dim();

    CompressSpec cs;
    cs.algo = algo_from_name(a.algo);
    cs.sketch_size = a.sketch;
    cs.cluster_order = a.cluster_order;
    cs.seed = a.seed;

    json cfg;
    cfg["command"] = "fit";
    cfg["algo"] = a.algo;
    cfg["rank"] = a.rank;
    cfg["nbasis"] = a.n_basis;
    cfg["alpha"] = a.alpha;
    cfg["lambda"] = a.lambda;
    cfg["rtilde"] = cs.sketch_or_default();
    cfg["cluster_order"] = a.cluster_order;
    cfg["seed"] = a.seed;
    cfg["pca_dim"] = a.pca_dim;
    cfg["kde_mean_field"] = a.kde_mean_field;

    DensityModel model;
    if (a.pca_dim > 0 || a.kde_mean_field) {
        GeneralFitOptions opt;
        opt.n_basis = a.n_basis;
        opt.alpha = a.alpha;
        opt.lambda = a.lambda;
        opt.algo = cs;
        opt.algo.ranks = uniform_ranks(a.pca_dim > 0 ? a.pca_dim : d, a.rank);
        opt.pca_dim = a.pca_dim;
        opt.use_pca = a.pca_dim > 0;
        opt.kde_mean_field = a.kde_mean_field;
        opt.streaming_pca = a.streaming_pca;
        opt.mesh = s.box.front().mesh;
        model = fit_general(s, opt);
    } else {
        cs.ranks = uniform_ranks(d, a.rank);
        std::vector<BasisFamily> bases;
        std::vector<MeanField1d> mf;
        for (const auto& g : s.box) {
            if (std::abs(g.lo + g.hi) > 1e-12)
                throw config_error("fit: plain pipeline expects a symmetric box");
            bases.push_back(BasisFamily::fourier(a.n_basis, g.hi));
            mf.push_back(MeanField1d::uniform(g));
        }
        model = normalize(
            deconvolve(fit(s, bases, a.alpha, cs), a.alpha, a.lambda, bases, mf, s.box));
    }

    cfg["config_hash"] = config_hash(canonical(cfg));
    write_model(a.out, model, cfg);
    std::cout << "fit " << a.algo << " model over " << s.count() << " samples -> " << a.out
              << "\n";
    return 0;
}

// ---- sample ----------------------------------------------------------

struct SampleArgs {
    std::string model;
    Index count = 1024;
    std::uint64_t seed = 0;
    std::string out;
};

int run_sample(const SampleArgs& a) {
    json model_meta;
    const DensityModel m = read_model(a.model, &model_meta);
    SampleDiagnostics diag;
    const SampleSet s = conditional_sample(m, a.count, a.seed, &diag);
    write_samples(a.out, s.data);

    json manifest;
    manifest["command"] = "sample";
    manifest["model"] = a.model;
    manifest["model_config_hash"] = model_meta.value("config_hash", "");
    manifest["n_samples"] = s.count();
    manifest["seed"] = a.seed;
    manifest["clipped_mass_per_sample"] =
        diag.clipped_mass_total / static_cast<double>(a.count);
    manifest["aborted"] = diag.aborted;
    manifest["box"] = json::array();
    for (const auto& g : s.box) manifest["box"].push_back(grid_to_json(g));
    manifest["config_hash"] = config_hash(canonical(manifest));
    write_manifest(a.out, manifest);
    std::cout << "drew " << s.count() << " samples (clipped mass/sample "
              << diag.clipped_mass_total / static_cast<double>(a.count) << ") -> " << a.out
              << "\n";
    return 0;
}

// ---- eval ------------------------------------------------------------

struct EvalArgs {
    std::string metric = "rel-l2";
    std::string model;
    std::string truth = "";     // "gm" for the analytic mixture truth
    std::string ref_model = "";
    std::string data = "";      // generated samples (moment2-err)
    std::string ref_data = "";  // reference samples
    std::string out = "";       // JSON lines; stdout when empty
};

int run_eval(const EvalArgs& a) {
    json record;
    record["metric"] = a.metric;
    double value = 0.0;

    if (a.metric == "rel-l2") {
        json meta;
        const DensityModel m = read_model(a.model, &meta);
        if (a.truth == "gm") {
            GmSpec spec;
            spec.d = m.dim();
            const TensorTrain truth = gm_truth_tt(spec, m.basis.front());
            value = rel_l2(m, truth, m.basis);
        } else if (!a.ref_model.empty()) {
            const DensityModel q = read_model(a.ref_model);
            value = rel_l2(m, q);
        } else {
            throw config_error("eval rel-l2: need --truth gm or --ref-model");
        }
        record["model_config_hash"] = meta.value("config_hash", "");
    } else if (a.metric == "moment2-err") {
        if (a.data.empty() || a.ref_data.empty())
            throw config_error("eval moment2-err: need --data and --ref-data");
        SampleSet gen, ref;
        gen.data = read_samples(a.data);
        ref.data = read_samples(a.ref_data);
        // Boxes are irrelevant for the Gram metric; supply envelopes.
        auto envelope = [](SampleSet& s) {
            for (Index j = 0; j < s.data.cols(); ++j) {
                const double lo = s.data.col(j).minCoeff() - 1e-9;
                const double hi = s.data.col(j).maxCoeff() + 1e-9;
                s.box.emplace_back(lo, hi, hi - lo);
            }
        };
        envelope(gen);
        envelope(ref);
        value = second_moment_error(gen, ref);
    } else {
        throw config_error("eval: unknown metric '" + a.metric + "'");
    }

    record["value"] = value;
    record["config_hash"] = config_hash(canonical(record));
    if (a.out.empty()) {
        std::cout << record.dump() << "\n";
    } else {
        std::ofstream f(a.out, std::ios::app);
        if (!f) throw config_error("eval: cannot open " + a.out);
        f << record.dump() << "\n";
        std::cout << record.dump() << "\n";
    }
    return 0;
}

// ---- bench -----------------------------------------------------------

struct BenchArgs {
    std::string algos = "kn,rsvdt";
    std::string sweep = "n";  // "n" or "d"
    std::vector<Index> points;
    Index fixed_dim = 5;
    Index fixed_count = 10000;
    Index n_basis = 17;
    Index rank = 3;
    double alpha = 0.01;
    Index reps = 3;
    std::uint64_t seed = 0;
    std::string out;
};

int run_bench(const BenchArgs& a) {
    BenchConfig cfg;
    std::stringstream names(a.algos);
    std::string name;
    while (std::getline(names, name, ',')) cfg.algos.push_back(algo_from_name(name));
    if (cfg.algos.empty()) throw config_error("bench: no algorithms given");
    cfg.sweep = a.sweep == "d" ? BenchSweep::dims : BenchSweep::samples;
    cfg.points = a.points;
    if (cfg.points.empty()) {
        if (cfg.sweep == BenchSweep::samples)
            for (Index p = 10; p <= 14; ++p) cfg.points.push_back(Index(1) << p);
        else
            for (Index d = 4; d <= 24; d += 4) cfg.points.push_back(d);
    }
    cfg.fixed_dim = a.fixed_dim;
    cfg.fixed_count = a.fixed_count;
    cfg.n_basis = a.n_basis;
    cfg.rank = a.rank;
    cfg.alpha = a.alpha;
    cfg.reps = a.reps;
    cfg.seed = a.seed;

    const std::vector<BenchPoint> rows = bench_compress(cfg);
    std::ofstream f(a.out);
    if (!f) throw config_error("bench: cannot open " + a.out);
    f << "param,wall_seconds,algo\n";
    for (const auto& r : rows) f << r.param << "," << r.wall_seconds << "," << r.algo << "\n";
    for (const auto& algo : cfg.algos)
        std::cout << "slope(" << algo_name(algo) << ") = "
                  << bench_slope(rows, algo_name(algo)) << "\n";
    std::cout << "wrote " << rows.size() << " rows to " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-train density estimation"};
    app.set_config("--config", "", "TOML config file; flags override its values");
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* cgen = app.add_subcommand("gen", "generate synthetic samples");
    cgen->add_option("--model", gen.model, "gm | gl1d | gl2d");
    cgen->add_option("--dim,-d", gen.dim, "dimension (gm, gl1d)");
    cgen->add_option("--side,-m", gen.side, "lattice side (gl2d)");
    cgen->add_option("--n-samples,-N", gen.count, "sample count");
    cgen->add_option("--seed", gen.seed);
    cgen->add_option("--step", gen.step, "Langevin step (0: default 5e-3/beta)");
    cgen->add_option("--burn-in", gen.burn_in);
    cgen->add_option("--thinning", gen.thinning);
    cgen->add_option("--per-chain", gen.per_chain, "kept samples per chain");
    cgen->add_option("--out,-o", gen.out)->required();

    FitArgs fit;
    CLI::App* cfit = app.add_subcommand("fit", "fit a density model");
    cfit->add_option("--data", fit.data)->required();
    cfit->add_option("--out,-o", fit.out)->required();
    cfit->add_option("--algo", fit.algo, "naive | fast | kn | c | hier | rsvdt");
    cfit->add_option("--rank,-r", fit.rank);
    cfit->add_option("--nbasis,-n", fit.n_basis);
    cfit->add_option("--alpha", fit.alpha);
    cfit->add_option("--lambda", fit.lambda);
    cfit->add_option("--rtilde", fit.sketch, "sketch size (0: per-algo default)");
    cfit->add_option("--cluster-order,-K", fit.cluster_order);
    cfit->add_option("--seed", fit.seed);
    cfit->add_option("--box-l", fit.box_l, "half-width of the symmetric box");
    cfit->add_option("--mesh", fit.mesh);
    cfit->add_option("--pca-dim", fit.pca_dim, "PCA embedding dimension (0: off)");
    cfit->add_flag("--kde-meanfield", fit.kde_mean_field);
    cfit->add_flag("--streaming-pca", fit.streaming_pca);

    SampleArgs smp;
    CLI::App* csmp = app.add_subcommand("sample", "draw samples from a model");
    csmp->add_option("--model", smp.model)->required();
    csmp->add_option("--n-samples,-N", smp.count);
    csmp->add_option("--seed", smp.seed);
    csmp->add_option("--out,-o", smp.out)->required();

    EvalArgs ev;
    CLI::App* cev = app.add_subcommand("eval", "evaluate metrics");
    cev->add_option("--metric", ev.metric, "rel-l2 | moment2-err");
    cev->add_option("--model", ev.model);
    cev->add_option("--truth", ev.truth, "'gm' for the analytic mixture truth");
    cev->add_option("--ref-model", ev.ref_model);
    cev->add_option("--data", ev.data);
    cev->add_option("--ref-data", ev.ref_data);
    cev->add_option("--out,-o", ev.out, "append JSON lines here");

    BenchArgs bn;
    CLI::App* cbn = app.add_subcommand("bench", "time the compressors");
    cbn->add_option("--algos", bn.algos, "comma-separated list");
    cbn->add_option("--sweep", bn.sweep, "n (sample count) | d (dimension)");
    cbn->add_option("--points", bn.points, "swept values");
    cbn->add_option("--dim,-d", bn.fixed_dim, "fixed d when sweeping n");
    cbn->add_option("--n-samples,-N", bn.fixed_count, "fixed N when sweeping d");
    cbn->add_option("--nbasis,-n", bn.n_basis);
    cbn->add_option("--rank,-r", bn.rank);
    cbn->add_option("--alpha", bn.alpha);
    cbn->add_option("--reps", bn.reps);
    cbn->add_option("--seed", bn.seed);
    cbn->add_option("--out,-o", bn.out)->required();

    try {
        app.parse(argc, argv);
        if (cgen->parsed()) return run_gen(gen);
        if (cfit->parsed()) return run_fit(fit);
        if (csmp->parsed()) return run_sample(smp);
        if (cev->parsed()) return run_eval(ev);
        if (cbn->parsed()) return run_bench(bn);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
