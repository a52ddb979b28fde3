/*
 * Copyright 2026 The isac-t2u Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstring>
#include <algorithm>
#include <fstream>

#include "isac/radarsim.hpp"

namespace isac {

namespace {

constexpr char kMagic[8] = {'I', 'S', 'A', 'C', 'I', 'M', 'G', '1'};

template <class T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) fail(ErrorCode::Parse, "truncated image dump");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_image_dump(const std::string& path, const RadarImage& img, const RadarWaveform& wf,
                      const std::string& provenance) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(img.pixels.rows()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(img.pixels.cols()));
  put<double>(os, wf.f0);
  put<double>(os, wf.bs);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(provenance.size()));
  os.write(provenance.data(), static_cast<std::streamsize>(provenance.size()));
  for (double r : img.grid.ranges) put<double>(os, r);
  for (double a : img.grid.angles) put<double>(os, a);
  for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) {
      put<float>(os, static_cast<float>(img.pixels(r, c).real()));
      put<float>(os, static_cast<float>(img.pixels(r, c).imag()));
    }
  if (!os) fail(ErrorCode::Io, "write failed for " + path);
}

RadarImage read_image_dump(const std::string& path, RadarWaveform* wf, std::string* provenance) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    fail(ErrorCode::Parse, path + ": not an image dump");
  auto rows = get<std::uint32_t>(is);
  auto cols = get<std::uint32_t>(is);
  double f0 = get<double>(is);
  double bs = get<double>(is);
  auto note_len = get<std::uint32_t>(is);
  if (note_len > (1u << 20)) fail(ErrorCode::Parse, path + ": provenance note too long");
  std::string note(note_len, '\0');
  if (note_len && !is.read(note.data(), note_len)) fail(ErrorCode::Parse, "truncated image dump");
  if (provenance) *provenance = note;
  if (wf) {
    wf->f0 = f0;
    wf->bs = bs;
  }
  RadarImage img;
  img.grid.ranges.resize(rows);
  img.grid.angles.resize(cols);
  for (auto& r : img.grid.ranges) r = get<double>(is);
  for (auto& a : img.grid.angles) a = get<double>(is);
  img.pixels.resize(rows, cols);
  for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) {
      float re = get<float>(is);
      float im = get<float>(is);
      img.pixels(r, c) = Complex(re, im);
    }
  return img;
}

void write_pgm(const std::string& path, const RMatrix& values, const std::string& comment) {
  if (comment.find('\n') != std::string::npos)
    fail(ErrorCode::InvalidArgument, "PGM comment must be a single line");
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << '\n';
  os << values.cols() << ' ' << values.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      double v = std::clamp(values(r, c), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  if (!os) fail(ErrorCode::Io, "write failed for " + path);
}

}  // namespace isac
