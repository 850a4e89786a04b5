#include "ttde/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace ttde {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw config_error("read: truncated file");
    return v;
}

void put_magic(std::ofstream& out, const char m[4]) { out.write(m, 4); }

void expect_magic(std::ifstream& in, const char m[4], const std::string& what) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, m, 4) != 0) throw config_error(what + ": bad magic");
}

}  // namespace

void write_tt(const std::string& path, const TensorTrain& t, const nlohmann::json& metadata) {
    t.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("write_tt: cannot open " + path);
    put_magic(out, "TTTN");
    put<std::uint32_t>(out, 1);
    const auto sizes = t.mode_sizes();
    const auto ranks = t.ranks();
    put<std::uint64_t>(out, static_cast<std::uint64_t>(sizes.size()));
    for (Index n : sizes) put<std::uint64_t>(out, static_cast<std::uint64_t>(n));
    for (Index r : ranks) put<std::uint64_t>(out, static_cast<std::uint64_t>(r));
    for (const auto& core : t.cores)
        for (Index a = 0; a < core.left_rank(); ++a)
            for (Index i = 0; i < core.mode_size(); ++i)
                for (Index b = 0; b < core.right_rank(); ++b) put<double>(out, core(a, i, b));
    const std::string meta = metadata.dump();
    put<std::uint64_t>(out, static_cast<std::uint64_t>(meta.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    if (!out) throw config_error("write_tt: write failed for " + path);
}

TtFile read_tt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("read_tt: cannot open " + path);
    expect_magic(in, "TTTN", "read_tt");
    const auto version = get<std::uint32_t>(in);
    if (version != 1) throw config_error("read_tt: unsupported version");
    const auto d = static_cast<Index>(get<std::uint64_t>(in));
    if (d < 1 || d > 100000) throw config_error("read_tt: implausible order");
    std::vector<Index> sizes(static_cast<size_t>(d));
    for (auto& n : sizes) n = static_cast<Index>(get<std::uint64_t>(in));
    std::vector<Index> ranks(static_cast<size_t>(d + 1));
    for (auto& r : ranks) r = static_cast<Index>(get<std::uint64_t>(in));

    TtFile f;
    for (Index j = 0; j < d; ++j) {
        TtCore core(ranks[static_cast<size_t>(j)], sizes[static_cast<size_t>(j)],
                    ranks[static_cast<size_t>(j) + 1]);
        for (Index a = 0; a < core.left_rank(); ++a)
            for (Index i = 0; i < core.mode_size(); ++i)
                for (Index b = 0; b < core.right_rank(); ++b) core(a, i, b) = get<double>(in);
        f.tt.cores.push_back(std::move(core));
    }
    const auto meta_len = get<std::uint64_t>(in);
    std::string meta(meta_len, '\0');
    in.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (!in) throw config_error("read_tt: truncated metadata");
    f.metadata = nlohmann::json::parse(meta);
    f.tt.validate();
    return f;
}

void write_samples(const std::string& path, const Eigen::MatrixXd& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("write_samples: cannot open " + path);
    put_magic(out, "TTDE");
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(data.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(data.cols()));
    for (Index i = 0; i < data.rows(); ++i)
        for (Index j = 0; j < data.cols(); ++j) put<double>(out, data(i, j));
    if (!out) throw config_error("write_samples: write failed for " + path);
}

Eigen::MatrixXd read_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("read_samples: cannot open " + path);
    expect_magic(in, "TTDE", "read_samples");
    const auto version = get<std::uint32_t>(in);
    if (version != 1) throw config_error("read_samples: unsupported version");
    const auto n = static_cast<Index>(get<std::uint64_t>(in));
    const auto d = static_cast<Index>(get<std::uint64_t>(in));
    Eigen::MatrixXd data(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) data(i, j) = get<double>(in);
    return data;
}

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace

std::string base64_encode(const double* data, Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    const size_t len = static_cast<size_t>(count) * sizeof(double);
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        unsigned v = bytes[i] << 16;
        if (i + 1 < len) v |= bytes[i + 1] << 8;
        if (i + 2 < len) v |= bytes[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64[v & 63] : '=');
    }
    return out;
}

Eigen::VectorXd base64_decode(const std::string& text) {
    std::vector<unsigned char> bytes;
    bytes.reserve(text.size() / 4 * 3);
    unsigned v = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n') continue;
        const int x = b64_value(c);
        if (x < 0) throw config_error("base64_decode: invalid character");
        v = (v << 6) | static_cast<unsigned>(x);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            bytes.push_back(static_cast<unsigned char>((v >> bits) & 0xff));
        }
    }
    if (bytes.size() % sizeof(double) != 0)
        throw config_error("base64_decode: payload is not a float64 array");
    Eigen::VectorXd out(static_cast<Index>(bytes.size() / sizeof(double)));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json grid_to_json(const GridSpec& g) {
    return {{"lo", g.lo}, {"hi", g.hi}, {"mesh", g.mesh}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
    return GridSpec(j.at("lo").get<double>(), j.at("hi").get<double>(),
                    j.at("mesh").get<double>());
}

nlohmann::json basis_to_json(const BasisFamily& b) {
    nlohmann::json j;
    j["n"] = b.n;
    switch (b.kind) {
        case BasisFamily::Kind::fourier:
            j["kind"] = "fourier";
            j["L"] = b.half_width;
            break;
        case BasisFamily::Kind::legendre:
            j["kind"] = "legendre";
            break;
        case BasisFamily::Kind::tabulated:
            j["kind"] = "tabulated";
            j["grid"] = grid_to_json(b.grid);
            j["values"] = base64_encode(b.values.data(), b.values.size());
            j["weight"] = base64_encode(b.weight.data(), b.weight.size());
            break;
    }
    return j;
}

BasisFamily basis_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const Index n = j.at("n").get<Index>();
    if (kind == "fourier") return BasisFamily::fourier(n, j.at("L").get<double>());
    if (kind == "legendre") return BasisFamily::legendre(n);
    if (kind == "tabulated") {
        const GridSpec grid = grid_from_json(j.at("grid"));
        const Eigen::VectorXd flat = base64_decode(j.at("values").get<std::string>());
        if (flat.size() != n * grid.points())
            throw config_error("basis_from_json: value table size mismatch");
        Eigen::MatrixXd values(n, grid.points());
        std::memcpy(values.data(), flat.data(), sizeof(double) * static_cast<size_t>(flat.size()));
        return BasisFamily::tabulated(grid, std::move(values),
                                      base64_decode(j.at("weight").get<std::string>()));
    }
    throw config_error("basis_from_json: unknown kind " + kind);
}

void write_model(const std::string& path, const DensityModel& m, const nlohmann::json& extra) {
    m.validate();
    nlohmann::json meta = extra;
    meta["format"] = "ttde-density-model";
    meta["alpha"] = m.alpha;
    meta["lambda"] = m.lambda;
    meta["Z"] = m.norm_const;
    meta["basis"] = nlohmann::json::array();
    meta["mean_field"] = nlohmann::json::array();
    meta["box"] = nlohmann::json::array();
    for (Index j = 0; j < m.dim(); ++j) {
        meta["basis"].push_back(basis_to_json(m.basis[static_cast<size_t>(j)]));
        const MeanField1d& mf = m.mean_field[static_cast<size_t>(j)];
        nlohmann::json mj;
        mj["grid"] = grid_to_json(mf.grid);
        if (mf.is_uniform) {
            mj["kind"] = "uniform";
        } else {
            mj["kind"] = "tabulated";
            mj["values"] = base64_encode(mf.values.data(), mf.values.size());
        }
        meta["mean_field"].push_back(mj);
        meta["box"].push_back(grid_to_json(m.box[static_cast<size_t>(j)]));
    }
    if (m.pca) {
        nlohmann::json pj;
        pj["rows"] = m.pca->rotation.rows();
        pj["cols"] = m.pca->rotation.cols();
        pj["rotation"] = base64_encode(m.pca->rotation.data(), m.pca->rotation.size());
        pj["center"] = base64_encode(m.pca->center.data(), m.pca->center.size());
        meta["pca"] = pj;
    }
    write_tt(path, m.coeff, meta);
}

DensityModel read_model(const std::string& path, nlohmann::json* metadata_out) {
    TtFile f = read_tt(path);
    const nlohmann::json& meta = f.metadata;
    if (meta.value("format", "") != "ttde-density-model")
        throw config_error("read_model: not a density model file");

    DensityModel m;
    m.coeff = std::move(f.tt);
    m.alpha = meta.at("alpha").get<double>();
    m.lambda = meta.at("lambda").get<double>();
    m.norm_const = meta.at("Z").get<double>();
    for (const auto& bj : meta.at("basis")) m.basis.push_back(basis_from_json(bj));
    for (const auto& mj : meta.at("mean_field")) {
        const GridSpec g = grid_from_json(mj.at("grid"));
        if (mj.at("kind") == "uniform")
            m.mean_field.push_back(MeanField1d::uniform(g));
        else
            m.mean_field.push_back(
                MeanField1d::tabulated(g, base64_decode(mj.at("values").get<std::string>())));
    }
    for (const auto& gj : meta.at("box")) m.box.push_back(grid_from_json(gj));
    if (meta.contains("pca")) {
        const auto& pj = meta.at("pca");
        PcaMap map;
        const Index rows = pj.at("rows").get<Index>();
        const Index cols = pj.at("cols").get<Index>();
        const Eigen::VectorXd flat = base64_decode(pj.at("rotation").get<std::string>());
        if (flat.size() != rows * cols) throw config_error("read_model: PCA size mismatch");
        map.rotation.resize(rows, cols);
        std::memcpy(map.rotation.data(), flat.data(),
                    sizeof(double) * static_cast<size_t>(flat.size()));
        map.center = base64_decode(pj.at("center").get<std::string>());
        m.pca = std::move(map);
    }
    m.validate();
    if (metadata_out) *metadata_out = meta;
    return m;
}

}  // namespace ttde
