#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace platelab::io {

// Hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

std::string read_text(const std::filesystem::path& path);

// Writes through a sibling temporary and renames, so readers never see a partial file.
void write_text(const std::filesystem::path& path, std::string_view text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string matrix_csv(const Eigen::MatrixXd& m);

// Replaces non-finite numbers by null, recursively.
nlohmann::json finite_or_null(const nlohmann::json& j);

}  // namespace platelab::io
