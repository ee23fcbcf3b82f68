#include "pdfp/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pdfp/diagnostics.hpp"

namespace pdfp {

namespace {

std::ofstream open_out(const std::filesystem::path &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw InvalidArgument("cannot open " + path.string() + " for writing"); }
  return out;
}

// Next whitespace-delimited header token, skipping comments.
std::string pgm_token(std::istream &in)
{
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) { return tok; }
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

} // namespace

void write_pgm(const Image &img, const std::filesystem::path &path)
{
  auto out = open_out(path);
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.size()) * 2);
  for (Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    const auto s = static_cast<unsigned>(std::lround(v * 65535.0));
    buf[2 * i] = static_cast<unsigned char>(s >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(s & 0xff);
  }
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Image read_pgm(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw InvalidArgument("cannot open " + path.string()); }
  if (pgm_token(in) != "P5") { throw InvalidArgument(path.string() + ": not a binary PGM (P5) file"); }
  const long width = std::strtol(pgm_token(in).c_str(), nullptr, 10);
  const long height = std::strtol(pgm_token(in).c_str(), nullptr, 10);
  const long maxval = std::strtol(pgm_token(in).c_str(), nullptr, 10);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw InvalidArgument(path.string() + ": malformed PGM header");
  }
  const int bytes = maxval < 256 ? 1 : 2;
  Image img = Image::zeros(height, width);
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.size()) * bytes);
  in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw InvalidArgument(path.string() + ": truncated PGM data");
  }
  for (Index i = 0; i < img.size(); ++i) {
    const unsigned s = bytes == 1 ? buf[i] : (unsigned{buf[2 * i]} << 8) | buf[2 * i + 1];
    img.pixels[i] = static_cast<double>(s) / static_cast<double>(maxval);
  }
  return img;
}

void write_image_csv(const Image &img, const std::filesystem::path &path)
{
  auto out = open_out(path);
  for (Index r = 0; r < img.height; ++r) {
    for (Index c = 0; c < img.width; ++c) { out << (c ? "," : "") << format_double(img(r, c)); }
    out << '\n';
  }
}

Image read_image_csv(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) { throw InvalidArgument("cannot open " + path.string()); }
  std::vector<double> values;
  Index width = -1;
  Index height = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") { continue; }
    std::stringstream ss(line);
    std::string cell;
    Index count = 0;
    while (std::getline(ss, cell, ',')) {
      char *end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) { throw InvalidArgument(path.string() + ": bad number '" + cell + "'"); }
      values.push_back(v);
      ++count;
    }
    if (width < 0) { width = count; }
    if (count != width) { throw InvalidArgument(path.string() + ": ragged CSV rows"); }
    ++height;
  }
  if (height == 0) { throw InvalidArgument(path.string() + ": empty image"); }
  Image img = Image::zeros(height, width);
  img.pixels = Eigen::Map<const Vec>(values.data(), static_cast<Index>(values.size()));
  return img;
}

void write_sinogram_csv(const Vec &b, Index rays_per_angle, const std::filesystem::path &path)
{
  if (rays_per_angle < 1 || b.size() % rays_per_angle != 0) {
    throw InvalidArgument("write_sinogram_csv: length is not a multiple of rays_per_angle");
  }
  auto out = open_out(path);
  for (Index i = 0; i < b.size(); ++i) {
    out << format_double(b[i]) << ((i + 1) % rays_per_angle == 0 ? "\n" : ",");
  }
}

} // namespace pdfp
