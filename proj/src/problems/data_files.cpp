#include "joco/problems/data_files.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "joco/util/rng.hpp"

#ifndef JOCO_DEFAULT_DATA_DIR
#define JOCO_DEFAULT_DATA_DIR "data"
#endif

namespace joco::problems {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("JOCO_DATA_DIR"); env && *env) return env;
  return JOCO_DEFAULT_DATA_DIR;
}

void write_matrix(const std::filesystem::path& path, const std::string& name,
                  const ng::Tensor& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.row(i)[j]);
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

ng::Tensor read_matrix(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::size_t rows = 0, cols = 0;
  if (!(in >> header >> rows >> cols) || header != name) {
    throw std::runtime_error("bad header in " + path.string());
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated data in " + path.string());
    std::size_t used = 0;
    v = std::stod(tok, &used);
    if (used != tok.size()) throw std::runtime_error("bad value in " + path.string());
  }
  std::string extra;
  if (in >> extra) throw std::runtime_error("trailing data in " + path.string());
  return ng::Tensor::matrix(rows, cols, std::move(data));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void verify_checksum(const std::filesystem::path& dir, const std::string& file) {
  std::ifstream manifest(dir / "MANIFEST.sha256");
  if (!manifest) throw std::runtime_error("missing " + (dir / "MANIFEST.sha256").string());
  std::string digest, name;
  while (manifest >> digest >> name) {
    if (name != file) continue;
    if (sha256_file(dir / file) != digest) {
      throw std::runtime_error("checksum mismatch for " + (dir / file).string());
    }
    return;
  }
  throw std::runtime_error(file + " is not listed in the data manifest");
}

ng::Tensor load_constant(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, ng::Tensor> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const std::filesystem::path dir = data_dir();
  const std::string file = name + ".txt";
  verify_checksum(dir, file);
  ng::Tensor t = read_matrix(dir / file, name);
  cache.emplace(name, t);
  return t;
}

namespace {

// A is drawn first, then c, from one stream.
std::pair<ng::Tensor, ng::Tensor> langermann_constants() {
  auto rng = util::Rng::stream(kLangermannSeed, util::StreamTag::kProblemConstants);
  ng::Tensor a(ng::Shape{60, 16});
  for (double& v : a.values()) v = rng.uniform(0.0, 10.0);
  ng::Tensor c(ng::Shape{60, 1});
  for (double& v : c.values()) v = rng.uniform(0.5, 5.0);
  return {a, c};
}

}  // namespace

ng::Tensor generate_langermann_a() { return langermann_constants().first; }
ng::Tensor generate_langermann_c() { return langermann_constants().second; }

ng::Tensor generate_rover_obstacles() {
  auto rng = util::Rng::stream(kRoverSeed, util::StreamTag::kProblemConstants);
  ng::Tensor t(ng::Shape{15, 4});
  for (std::size_t i = 0; i < 15; ++i) {
    t(i, 0) = rng.uniform(0.1, 0.9);
    t(i, 1) = rng.uniform(0.1, 0.9);
    t(i, 2) = rng.uniform(0.05, 0.15);
    t(i, 3) = rng.uniform(0.05, 0.15);
  }
  return t;
}

const std::vector<ConstantFile>& constant_files() {
  static const std::vector<ConstantFile> files = {
      {"langermann_A", &generate_langermann_a},
      {"langermann_c", &generate_langermann_c},
      {"rover_obstacles", &generate_rover_obstacles},
  };
  return files;
}

}  // namespace joco::problems
