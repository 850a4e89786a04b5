#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "ttde/density_ops.hpp"
#include "ttde/io.hpp"
#include "ttde/models.hpp"
#include "ttde/preprocess.hpp"

#include "test_helpers.hpp"

using namespace ttde;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/ttde_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("base64 round trip") {
    Eigen::VectorXd v(5);
    v << 1.5, -2.25, 3.333333333333, 0.0, -1e-300;
    const std::string text = base64_encode(v.data(), v.size());
    const Eigen::VectorXd back = base64_decode(text);
    REQUIRE(back.size() == 5);
    CHECK((back - v).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(base64_decode("@@@@"), config_error);
}

TEST_CASE("TT file round trip is bitwise") {
    const TensorTrain t = test::random_tt(4, 3, 2, 3);
    TempFile f("tt.tttn");
    nlohmann::json meta;
    meta["seed"] = 7;
    write_tt(f.path, t, meta);
    const TtFile back = read_tt(f.path);
    CHECK(back.metadata.at("seed") == 7);
    REQUIRE(back.tt.order() == 4);
    for (Index j = 0; j < 4; ++j)
        CHECK((back.tt.cores[static_cast<size_t>(j)].left_unfolding() -
               t.cores[static_cast<size_t>(j)].left_unfolding())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

TEST_CASE("TT reader rejects corrupted files") {
    TempFile f("bad.tttn");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << "NOPE, this is not a tensor";
    }
    CHECK_THROWS_AS(read_tt(f.path), config_error);
    CHECK_THROWS_AS(read_tt("/tmp/ttde_does_not_exist.tttn"), config_error);
}

TEST_CASE("sample file round trip is bitwise") {
    const GmSpec spec{3, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 200, 5);
    TempFile f("samples.ttde");
    write_samples(f.path, s.data);
    const Eigen::MatrixXd back = read_samples(f.path);
    CHECK((back - s.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("plain model round trip evaluates identically") {
    const GmSpec spec{3, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 3000, 7);
    const std::vector<BasisFamily> bases(3, BasisFamily::fourier(9, 1.5));
    CompressSpec cs;
    cs.algo = Algo::svd_kn;
    cs.ranks = uniform_ranks(3, 3);
    std::vector<MeanField1d> mf;
    for (const auto& g : spec.box()) mf.push_back(MeanField1d::uniform(g));
    const DensityModel m =
        normalize(deconvolve(fit(s, bases, 0.01, cs), 0.01, 0.0, bases, mf, spec.box()));

    TempFile f("model.tttn");
    nlohmann::json extra;
    extra["config_hash"] = config_hash("unit-test");
    write_model(f.path, m, extra);
    nlohmann::json meta;
    const DensityModel back = read_model(f.path, &meta);
    CHECK(meta.at("config_hash") == config_hash("unit-test"));

    Eigen::VectorXd x(3);
    x << 0.4, -0.9, 1.2;
    CHECK(eval_point(back, x) == doctest::Approx(eval_point(m, x)).epsilon(1e-15));
    CHECK(back.norm_const == m.norm_const);
    CHECK(back.alpha == m.alpha);
}

TEST_CASE("model with tabulated basis, mean-field and PCA survives a round trip") {
    const GmSpec spec{4, 1.5, 0.1};
    const SampleSet s = gm_sample(spec, 4000, 9);
    GeneralFitOptions opt;
    opt.n_basis = 7;
    opt.alpha = 0.01;
    opt.pca_dim = 3;
    opt.algo.algo = Algo::svd_kn;
    opt.algo.ranks = uniform_ranks(3, 2);
    const DensityModel m = fit_general(s, opt);

    TempFile f("pca_model.tttn");
    write_model(f.path, m);
    const DensityModel back = read_model(f.path);
    REQUIRE(back.pca.has_value());
    CHECK((back.pca->rotation - m.pca->rotation).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd x = s.data.row(3).transpose();
    CHECK(eval_point(back, x) == doctest::Approx(eval_point(m, x)).epsilon(1e-15));
}

TEST_CASE("config_hash is stable and input-sensitive") {
    CHECK(config_hash("abc") == config_hash("abc"));
    CHECK(config_hash("abc") != config_hash("abd"));
    CHECK(config_hash("").size() == 16);
}
