#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "polyprune/grid.hpp"

namespace polyprune {

// Binary 8-bit PGM (P5). Maxval must be <= 255.
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);
Grid<std::uint8_t> read_pgm(std::istream& in);
void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& image);
void write_pgm(std::ostream& out, const Grid<std::uint8_t>& image);

// Float image in [0, 1] quantized to 8 bits and back.
Grid<std::uint8_t> quantize(const GrayImage& image);
GrayImage dequantize(const Grid<std::uint8_t>& image);

// Dense float grid: ASCII header "PLG1 <H> <W> <C>\n" followed by H*W*C
// little-endian IEEE-754 binary32 values, row-major with channel innermost.
Grid3<float> read_plg(const std::filesystem::path& path);
Grid3<float> read_plg(std::istream& in);
void write_plg(const std::filesystem::path& path, const Grid3<float>& grid);
void write_plg(std::ostream& out, const Grid3<float>& grid);

}  // namespace polyprune
