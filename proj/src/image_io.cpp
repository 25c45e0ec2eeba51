#include "polyprune/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "polyprune/error.hpp"

namespace polyprune {
namespace {

// Next whitespace-delimited token, skipping '#' comments (PNM convention).
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v < 0 || v > (1L << 24)) throw std::out_of_range(what);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, std::string("bad ") + what + " '" + tok + "'");
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

Grid<std::uint8_t> read_pgm(std::istream& in) {
  if (pnm_token(in) != "P5") throw Error(ErrorCode::Io, "not a binary PGM (P5)");
  const int width = parse_dim(pnm_token(in), "width");
  const int height = parse_dim(pnm_token(in), "height");
  const int maxval = parse_dim(pnm_token(in), "maxval");
  if (maxval == 0 || maxval > 255) throw Error(ErrorCode::Io, "only 8-bit PGM is supported");
  Grid<std::uint8_t> img(height, width);
  auto data = img.values();
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw Error(ErrorCode::Io, "truncated PGM pixel data");
  return img;
}

Grid<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const Grid<std::uint8_t>& image) {
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  const auto data = image.values();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::Io, "PGM write failed");
}

void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& image) {
  auto out = open_out(path);
  write_pgm(out, image);
}

Grid<std::uint8_t> quantize(const GrayImage& image) {
  Grid<std::uint8_t> out(image.height(), image.width());
  auto dst = out.values();
  auto src = image.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float v = std::clamp(src[i], 0.0f, 1.0f);
    dst[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

GrayImage dequantize(const Grid<std::uint8_t>& image) {
  GrayImage out(image.height(), image.width());
  auto dst = out.values();
  auto src = image.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
  return out;
}

Grid3<float> read_plg(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "missing PLG1 header");
  std::istringstream header(line);
  std::string magic, hs, ws, cs, extra;
  header >> magic >> hs >> ws >> cs;
  if (magic != "PLG1" || cs.empty() || (header >> extra))
    throw Error(ErrorCode::Io, "malformed PLG1 header '" + line + "'");
  const int h = parse_dim(hs, "height");
  const int w = parse_dim(ws, "width");
  const int c = parse_dim(cs, "channels");
  if (c == 0) throw Error(ErrorCode::Io, "PLG1 grid needs at least one channel");
  Grid3<float> grid(h, w, c);
  auto data = grid.values();
  std::vector<std::uint32_t> raw(data.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * 4))
    throw Error(ErrorCode::Io, "truncated PLG1 payload");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    data[i] = std::bit_cast<float>(to_little_endian(raw[i]));
  }
  return grid;
}

Grid3<float> read_plg(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_plg(in);
}

void write_plg(std::ostream& out, const Grid3<float>& grid) {
  out << "PLG1 " << grid.height() << ' ' << grid.width() << ' ' << grid.channels() << '\n';
  const auto data = grid.values();
  std::vector<std::uint32_t> raw(data.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = to_little_endian(std::bit_cast<std::uint32_t>(data[i]));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) throw Error(ErrorCode::Io, "PLG1 write failed");
}

void write_plg(const std::filesystem::path& path, const Grid3<float>& grid) {
  auto out = open_out(path);
  write_plg(out, grid);
}

}  // namespace polyprune
