#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "joco/numgrad/tensor.hpp"

namespace joco::problems {

inline constexpr std::uint64_t kLangermannSeed = 1234;
inline constexpr std::uint64_t kRoverSeed = 5678;

/// JOCO_DATA_DIR from the environment, else the build-time default.
std::filesystem::path data_dir();

/// Text matrix: a `name rows cols` header line then whitespace-separated
/// values printed with 17 significant digits.
void write_matrix(const std::filesystem::path& path, const std::string& name,
                  const ng::Tensor& m);
ng::Tensor read_matrix(const std::filesystem::path& path, const std::string& name);

std::string sha256_file(const std::filesystem::path& path);

/// Reads `<dir>/MANIFEST.sha256` (`<hex>  <file>` lines) and throws
/// std::runtime_error if `file` is missing from it or its digest differs.
void verify_checksum(const std::filesystem::path& dir, const std::string& file);

/// Loads a checked-in constant matrix after verifying its checksum.
ng::Tensor load_constant(const std::string& name);

/// Deterministic regeneration of the shipped constants.
ng::Tensor generate_langermann_a();  // 60 x 16, U[0, 10]
ng::Tensor generate_langermann_c();  // 60 x 1, U[0.5, 5]
ng::Tensor generate_rover_obstacles();  // 15 x 4: cx, cy, width, height

struct ConstantFile {
  std::string name;
  ng::Tensor (*generate)();
};
const std::vector<ConstantFile>& constant_files();

}  // namespace joco::problems
