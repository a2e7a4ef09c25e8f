#include "coloc/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "coloc/error.hpp"

namespace coloc {
namespace {

// Header tokens may be separated by whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) break;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return token;
}

}  // namespace

RgbImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingFile, path.string());

  const auto magic = next_token(in);
  if (magic != "P6" && magic != "P5") fail(ErrorCode::ParseError, path.string() + ": not a binary PPM/PGM");
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(next_token(in));
    height = std::stoul(next_token(in));
    maxval = std::stoul(next_token(in));
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, path.string() + ": malformed header");
  }
  if (width == 0 || height == 0 || maxval != 255) {
    fail(ErrorCode::ParseError, path.string() + ": unsupported size or maxval");
  }

  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<char> raw(width * height * channels);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    fail(ErrorCode::DimMismatch, path.string() + ": truncated pixel data");
  }

  RgbImage image(height, width);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto* px = reinterpret_cast<const std::uint8_t*>(raw.data() + i * channels);
    image[i] = channels == 3 ? Rgb{px[0], px[1], px[2]} : Rgb{px[0], px[0], px[0]};
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (const auto& px : image.values()) {
    const char bytes[3] = {static_cast<char>(px.r), static_cast<char>(px.g), static_cast<char>(px.b)};
    out.write(bytes, 3);
  }
}

void write_pgm(const std::filesystem::path& path, const ScalarMap& map) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
  for (double v : map.values()) {
    const double level = std::round(255.0 * std::clamp(v, 0.0, 1.0));
    out.put(static_cast<char>(static_cast<std::uint8_t>(level)));
  }
}

}  // namespace coloc
