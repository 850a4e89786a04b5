#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ttde/density_model.hpp"
#include "ttde/estimator.hpp"
#include "ttde/tensor_train.hpp"

namespace ttde {

// Binary tensor-train container ("TTTN"): magic, u32 version=1, u64 d,
// u64 mode sizes, u64 ranks (d+1), cores as little-endian float64 row-major
// (left rank slowest), u64 metadata length, UTF-8 JSON metadata.
void write_tt(const std::string& path, const TensorTrain& t, const nlohmann::json& metadata);

struct TtFile {
    TensorTrain tt;
    nlohmann::json metadata;
};
TtFile read_tt(const std::string& path);

// Density model persisted as its coefficient TT plus metadata describing
// alpha, lambda, Z, bases, mean fields, box and the optional PCA map.
void write_model(const std::string& path, const DensityModel& m,
                 const nlohmann::json& extra = nlohmann::json::object());
DensityModel read_model(const std::string& path, nlohmann::json* metadata_out = nullptr);

// Sample container ("TTDE"): magic, u32 version=1, u64 N, u64 d, little-endian
// float64 row-major data. Box metadata travels in the JSON manifest sidecar.
void write_samples(const std::string& path, const Eigen::MatrixXd& data);
Eigen::MatrixXd read_samples(const std::string& path);

std::string base64_encode(const double* data, Index count);
Eigen::VectorXd base64_decode(const std::string& text);

// FNV-1a over the canonical config string, hex-encoded.
std::string config_hash(const std::string& canonical);

nlohmann::json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json basis_to_json(const BasisFamily& b);
BasisFamily basis_from_json(const nlohmann::json& j);

}  // namespace ttde
