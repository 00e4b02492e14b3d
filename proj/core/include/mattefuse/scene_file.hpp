#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mattefuse/defocus.hpp"

namespace mattefuse {

// Parsed scene description. A file may describe a layered scene, a straight
// boundary scene, or both.
//
//   width: 128            # only needed for flat-color layers
//   height: 128
//   model: matte          # optional default for `simulate`
//   layers:               # front to back
//     - surface: fg.png   # straight color unless premultiplied: true
//       matte: fg_a.png   # omitted => opaque
//       sigma: 3.5
//     - color: [0.2, 0.3, 0.4]
//       sigma: 1
//   boundary:
//     image_a: a.png
//     image_b: b.png
//     line: [1, 0, -64]   # a, b, c of a*x + b*y + c = 0
//     sigma_a: 3
//     sigma_b: 0
//
// Relative paths resolve against the file's directory.
struct SceneDescription {
  std::optional<Scene> layered;
  std::optional<BoundaryLineScene> boundary;
  std::string model;
};

// Throws ParseError (with the 1-based line) for malformed documents and
// IoError for unreadable referenced images.
SceneDescription load_scene_file(const std::filesystem::path& path);
SceneDescription parse_scene(const std::string& text, const std::filesystem::path& base_dir,
                             const std::string& display_name = "<scene>");

}  // namespace mattefuse
