// Regenerates the problem constant files and their checksum manifest.
//
//   joco-gen-data [output-dir]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "joco/problems/data_files.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace joco::problems;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : data_dir();
  fs::create_directories(dir);
  std::ofstream manifest(dir / "MANIFEST.sha256");
  for (const auto& file : constant_files()) {
    const fs::path path = dir / (file.name + ".txt");
    write_matrix(path, file.name, file.generate());
    manifest << sha256_file(path) << "  " << file.name << ".txt\n";
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}
