#include "mattefuse/scene_file.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "mattefuse/errors.hpp"
#include "mattefuse/png_io.hpp"

namespace fs = std::filesystem;

namespace mattefuse {

namespace {

class SceneParser {
 public:
  SceneParser(fs::path base, std::string name) : base_(std::move(base)), name_(std::move(name)) {}

  SceneDescription parse(const std::string& text) {
    YAML::Node root;
    try {
      root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      throw ParseError(name_, e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) fail(root, "scene document must be a mapping");

    SceneDescription desc;
    if (root["width"]) width_ = as<int>(root["width"]);
    if (root["height"]) height_ = as<int>(root["height"]);
    if (root["model"]) desc.model = as<std::string>(root["model"]);
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      if (key != "width" && key != "height" && key != "model" && key != "layers" && key != "boundary") {
        fail(kv.first, "unknown key '" + key + "'");
      }
    }
    if (root["layers"]) desc.layered = parse_layers(root["layers"]);
    if (root["boundary"]) desc.boundary = parse_boundary(root["boundary"]);
    if (!desc.layered && !desc.boundary) fail(root, "scene needs 'layers' or 'boundary'");
    return desc;
  }

 private:
  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    throw ParseError(name_, node.Mark().line >= 0 ? node.Mark().line + 1 : 0, msg);
  }

  template <typename T>
  T as(const YAML::Node& node) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception& e) {
      fail(node, "bad value: " + e.msg);
    }
  }

  ImageF image(const YAML::Node& node) const {
    const fs::path rel = as<std::string>(node);
    const fs::path full = rel.is_absolute() ? rel : base_ / rel;
    try {
      return load_png(full);
    } catch (const IoError& e) {
      throw IoError(name_ + ":" + std::to_string(node.Mark().line + 1) + ": " + e.what());
    }
  }

  double sigma(const YAML::Node& node) const {
    const double s = as<double>(node);
    if (!(s >= 0.0)) fail(node, "sigma must be >= 0");
    return s;
  }

  Scene parse_layers(const YAML::Node& list) {
    if (!list.IsSequence() || list.size() == 0) fail(list, "'layers' must be a non-empty list");
    struct Pending {
      ImageF color;
      std::optional<ImageF> matte;
      bool premultiplied = false;
      double sigma = 0.0;
      YAML::Node node;
    };
    std::vector<Pending> pending;
    int channels = 1;
    for (const auto& entry : list) {
      const YAML::Node& item = entry;
      if (!item.IsMap()) fail(item, "layer entry must be a mapping");
      Pending p;
      p.node = item;
      for (const auto& kv : item) {
        const std::string key = kv.first.as<std::string>();
        if (key != "surface" && key != "color" && key != "matte" && key != "sigma" && key != "premultiplied") {
          fail(kv.first, "unknown layer key '" + key + "'");
        }
      }
      if (item["surface"] && item["color"]) fail(item, "layer has both 'surface' and 'color'");
      if (item["surface"]) {
        p.color = image(item["surface"]);
      } else if (item["color"]) {
        const auto rgb = as<std::vector<double>>(item["color"]);
        if (rgb.size() != 1 && rgb.size() != 3) fail(item["color"], "'color' needs 1 or 3 components");
        if (width_ <= 0 || height_ <= 0) fail(item, "flat-color layers need top-level width and height");
        p.color = ImageF(width_, height_, static_cast<int>(rgb.size()));
        for (int y = 0; y < height_; ++y)
          for (int x = 0; x < width_; ++x)
            for (int c = 0; c < p.color.channels(); ++c) p.color.at(x, y, c) = rgb[static_cast<std::size_t>(c)];
      } else {
        fail(item, "layer needs 'surface' or 'color'");
      }
      if (item["matte"]) p.matte = to_grayscale(image(item["matte"]));
      if (item["premultiplied"]) p.premultiplied = as<bool>(item["premultiplied"]);
      if (item["sigma"]) p.sigma = sigma(item["sigma"]);
      channels = std::max(channels, p.color.channels());
      pending.push_back(std::move(p));
    }

    Scene scene;
    for (Pending& p : pending) {
      ImageF color = p.color.channels() == channels ? p.color : broadcast_channels(p.color, channels);
      try {
        if (!p.matte) {
          scene.layers.push_back(Layer::opaque(color, p.sigma));
        } else if (p.premultiplied) {
          Layer layer{std::move(color), *p.matte, p.sigma};
          layer.validate();
          scene.layers.push_back(std::move(layer));
        } else {
          scene.layers.push_back(Layer::from_color(color, *p.matte, p.sigma));
        }
        require_same_size(scene.layers.back().surface, scene.layers.front().surface, "layer size");
      } catch (const ArgumentError& e) {
        fail(p.node, e.what());
      }
    }
    return scene;
  }

  BoundaryLineScene parse_boundary(const YAML::Node& node) {
    if (!node.IsMap()) fail(node, "'boundary' must be a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (key != "image_a" && key != "image_b" && key != "line" && key != "sigma_a" && key != "sigma_b") {
        fail(kv.first, "unknown boundary key '" + key + "'");
      }
    }
    for (const char* key : {"image_a", "image_b", "line"}) {
      if (!node[key]) fail(node, std::string("boundary needs '") + key + "'");
    }
    BoundaryLineScene s;
    s.image_a = image(node["image_a"]);
    s.image_b = image(node["image_b"]);
    const auto coeffs = as<std::vector<double>>(node["line"]);
    if (coeffs.size() != 3) fail(node["line"], "'line' needs three coefficients [a, b, c]");
    s.line = {coeffs[0], coeffs[1], coeffs[2]};
    if (node["sigma_a"]) s.sigma_a = sigma(node["sigma_a"]);
    if (node["sigma_b"]) s.sigma_b = sigma(node["sigma_b"]);
    if (s.image_a.channels() != s.image_b.channels()) {
      const int ch = std::max(s.image_a.channels(), s.image_b.channels());
      if (s.image_a.channels() == 1) s.image_a = broadcast_channels(s.image_a, ch);
      if (s.image_b.channels() == 1) s.image_b = broadcast_channels(s.image_b, ch);
    }
    try {
      s.validate();
    } catch (const ArgumentError& e) {
      fail(node, e.what());
    }
    return s;
  }

  fs::path base_;
  std::string name_;
  int width_ = 0;
  int height_ = 0;
};

}  // namespace

SceneDescription parse_scene(const std::string& text, const fs::path& base_dir, const std::string& display_name) {
  return SceneParser(base_dir, display_name).parse(text);
}

SceneDescription load_scene_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path.parent_path(), path.string());
}

}  // namespace mattefuse
