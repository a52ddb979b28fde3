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

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isac/detect.hpp"

namespace isac {

using nlohmann::json;

void write_detections(std::ostream& os, const DetectionFile& file) {
  json head = {{"type", "header"},  {"n_h", file.n_h},           {"n_v", file.n_v},
               {"c_target", kTargetClassCount}, {"spec_hash", file.spec_hash}, {"seed", file.seed}};
  os << head.dump() << '\n';
  for (const auto& [frame, d] : file.items) {
    json rec = {{"frame", frame},
                {"x", d.bbox.x},
                {"y", d.bbox.y},
                {"w", d.bbox.w},
                {"h", d.bbox.h},
                {"conf", d.confidence},
                {"class_scores", d.class_scores},
                {"logits_h", d.logits_h},
                {"logits_v", d.logits_v}};
    os << rec.dump() << '\n';
  }
}

void write_detections(const std::string& path, const DetectionFile& file) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  write_detections(os, file);
  if (!os) fail(ErrorCode::Io, "write failed for " + path);
}

namespace {

template <class T>
T field(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end())
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": bad value for '" + key + "'");
  }
}

}  // namespace

DetectionFile read_detections(std::istream& is) {
  DetectionFile file;
  bool have_header = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::Parse, "line " + std::to_string(line) + ": not an object");
    if (!have_header) {
      if (j.value("type", "") != "header")
        fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line) + ": missing header");
      file.n_h = field<std::size_t>(j, "n_h", line);
      file.n_v = field<std::size_t>(j, "n_v", line);
      if (field<std::size_t>(j, "c_target", line) != kTargetClassCount)
        fail(ErrorCode::SchemaMismatch,
             "line " + std::to_string(line) + ": unsupported target class count");
      file.spec_hash = j.value("spec_hash", "");
      file.seed = j.value("seed", std::uint64_t{0});
      have_header = true;
      continue;
    }
    Detection d;
    std::size_t frame = field<std::size_t>(j, "frame", line);
    d.bbox = {field<double>(j, "x", line), field<double>(j, "y", line),
              field<double>(j, "w", line), field<double>(j, "h", line)};
    d.confidence = field<double>(j, "conf", line);
    auto scores = field<std::vector<double>>(j, "class_scores", line);
    d.logits_h = field<std::vector<double>>(j, "logits_h", line);
    d.logits_v = field<std::vector<double>>(j, "logits_v", line);
    if (scores.size() != kTargetClassCount)
      fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line) + ": class_scores length " +
                                          std::to_string(scores.size()));
    if (d.logits_h.size() != file.n_h || d.logits_v.size() != file.n_v)
      fail(ErrorCode::SchemaMismatch,
           "line " + std::to_string(line) + ": logit lengths (" +
               std::to_string(d.logits_h.size()) + ", " + std::to_string(d.logits_v.size()) +
               ") differ from the header (" + std::to_string(file.n_h) + ", " +
               std::to_string(file.n_v) + ")");
    std::copy(scores.begin(), scores.end(), d.class_scores.begin());
    file.items.emplace_back(frame, std::move(d));
  }
  return file;
}

DetectionFile read_detections(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open " + path);
  return read_detections(is);
}

}  // namespace isac
