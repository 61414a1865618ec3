// Copyright 2026 the corola authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "corola/pgm.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace corola {
namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
bool next_token(std::istream& in, std::string& token) {
  token.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF) return false;
  while (c != EOF && !std::isspace(c) && c != '#') {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') in.unget();
  return !token.empty();
}

long parse_positive(const std::string& token, const std::string& what) {
  try {
    const long v = std::stol(token);
    if (v < 1) throw IoError("pgm: nonpositive " + what);
    return v;
  } catch (const std::logic_error&) {
    throw IoError("pgm: malformed " + what);
  }
}

std::vector<std::uint8_t> read_p5(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pgm: cannot open " + path);
  std::string tok;
  if (!next_token(in, tok) || tok != "P5")
    throw IoError("pgm: not a binary PGM (P5): " + path);
  if (!next_token(in, tok)) throw IoError("pgm: truncated header: " + path);
  const long w = parse_positive(tok, "width");
  if (!next_token(in, tok)) throw IoError("pgm: truncated header: " + path);
  const long h = parse_positive(tok, "height");
  if (!next_token(in, tok)) throw IoError("pgm: truncated header: " + path);
  const long maxval = parse_positive(tok, "maxval");
  if (maxval > 255) throw IoError("pgm: only 8-bit images supported: " + path);
  // Exactly one whitespace byte separates the header from the raster; the
  // token reader has already consumed it.
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw IoError("pgm: truncated raster: " + path);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  return bytes;
}

void write_p5(const std::string& path, const std::vector<std::uint8_t>& bytes, int width,
              int height) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("pgm: cannot write " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("pgm: write failed: " + path);
}

}  // namespace

Frame read_pgm(const std::string& path) {
  int w = 0, h = 0;
  const auto bytes = read_p5(path, w, h);
  Frame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(static_cast<Eigen::Index>(w) * h);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    f.pixels[static_cast<Eigen::Index>(i)] = bytes[i] / 255.0;
  return f;
}

void write_pgm(const std::string& path, const Frame& frame) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(frame.count()));
  for (Eigen::Index i = 0; i < frame.pixels.size(); ++i) {
    const double v = clamp01(frame.pixels[i]);
    bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  write_p5(path, bytes, frame.width, frame.height);
}

ForegroundMask read_mask_pgm(const std::string& path, int* width, int* height) {
  int w = 0, h = 0;
  const auto bytes = read_p5(path, w, h);
  if (width) *width = w;
  if (height) *height = h;
  ForegroundMask m;
  m.bits.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) m.bits[i] = bytes[i] != 0 ? 1 : 0;
  return m;
}

void write_mask_pgm(const std::string& path, const ForegroundMask& mask, int width, int height) {
  if (mask.size() != width * height)
    throw DimensionError("mask size does not match width*height");
  std::vector<std::uint8_t> bytes(mask.bits.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.bits[i] ? 255 : 0;
  write_p5(path, bytes, width, height);
}

Frame quantize_frame(const Frame& frame) {
  Frame q = frame;
  for (Eigen::Index i = 0; i < q.pixels.size(); ++i)
    q.pixels[i] = std::lround(clamp01(q.pixels[i]) * 255.0) / 255.0;
  return q;
}

}  // namespace corola
