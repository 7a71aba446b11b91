#include "s2cgan/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

using nlohmann::json;

namespace {

class TomlLine {
 public:
  TomlLine(std::string_view text, int number) : s_(text), line_(number) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    while (consume('.')) parts.push_back(key_part());
    return parts;
  }

  json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string key_part() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '"') return basic_string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        switch (s_[pos_++]) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string literal_string() {
    const std::size_t end = s_.find('\'', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  json array() {
    ++pos_;
    json arr = json::array();
    if (consume(']')) return arr;
    while (true) {
      arr.push_back(value());
      if (consume(']')) return arr;
      expect(',');
      if (consume(']')) return arr;
    }
  }

  json number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '+' ||
                                s_[pos_] == '-' || s_[pos_] == '.' || s_[pos_] == '_')) {
      ++pos_;
    }
    std::string tok;
    for (char c : s_.substr(start, pos_ - start)) {
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos;
    const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (is_float) {
      double d = 0.0;
      const auto r = std::from_chars(first, last, d);
      if (r.ec != std::errc() || r.ptr != last) fail("bad number '" + tok + "'");
      return d;
    }
    std::int64_t i = 0;
    const auto r = std::from_chars(first, last, i);
    if (r.ec != std::errc() || r.ptr != last) fail("bad value '" + tok + "'");
    return i;
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

json& descend(json& root, const std::vector<std::string>& path, const TomlLine& line) {
  json* node = &root;
  for (const auto& part : path) {
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) line.fail("'" + part + "' is not a table");
    node = &child;
  }
  return *node;
}

// Overwrites `field` from j[key] when present and removes the key, so that
// leftovers can be reported as unknown.
template <typename T>
void take(json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config key '") + key + "' has the wrong type");
  }
  j.erase(key);
}

void reject_leftovers(const json& j, const std::string& table) {
  if (!j.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + table + "." + j.begin().key() + "'");
  }
}

json section(json& root, const char* name) {
  if (!root.contains(name)) return json::object();
  json s = root.at(name);
  root.erase(name);
  if (!s.is_object()) throw Error(ErrorCode::kInvalidArgument, std::string("config '") + name + "' must be a table");
  return s;
}

}  // namespace

json parse_toml(std::string_view text) {
  json root = json::object();
  json* table = &root;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    start = end + 1;
    ++number;
    TomlLine line(raw, number);
    if (line.at_end()) continue;
    if (line.consume('[')) {
      const auto path = line.dotted_key();
      line.expect(']');
      if (!line.at_end()) line.fail("trailing characters after table header");
      table = &descend(root, path, line);
      continue;
    }
    auto path = line.dotted_key();
    line.expect('=');
    json v = line.value();
    if (!line.at_end()) line.fail("trailing characters after value");
    const std::string leaf = path.back();
    path.pop_back();
    json& target = descend(*table, path, line);
    if (target.contains(leaf)) line.fail("duplicate key '" + leaf + "'");
    target[leaf] = std::move(v);
  }
  return root;
}

json load_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

std::string config_hash(const json& config) {
  const std::string canonical = config.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical.data(), canonical.size())));
  return buf;
}

void RunConfig::validate() const {
  if (data.patch_size < 8 || data.patch_size % 8 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "data.patch_size must be a positive multiple of 8");
  }
  if (!(data.train_fraction > 0.0 && data.train_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "data.train_fraction must lie in (0, 1]");
  }
  noise.validate();
  generator.noise.validate();
  train.validate();
  threshold.validate();
}

RunConfig run_config_from_json(const json& input) {
  RunConfig cfg;
  json root = input.is_null() ? json::object() : input;

  json data = section(root, "data");
  take(data, "patch_size", cfg.data.patch_size);
  take(data, "train_fraction", cfg.data.train_fraction);
  take(data, "split_seed", cfg.data.split_seed);
  reject_leftovers(data, "data");

  json noise = section(root, "noise");
  take(noise, "sigma", cfg.noise.sigma);
  take(noise, "seed", cfg.noise.seed);
  reject_leftovers(noise, "noise");

  json gen = section(root, "generator");
  take(gen, "base_channels", cfg.generator.base_channels);
  take(gen, "dropout_rate", cfg.generator.noise.dropout_rate);
  std::string noise_mode = "dropout";
  take(gen, "noise_mode", noise_mode);
  if (noise_mode != "dropout" && noise_mode != "none") {
    throw Error(ErrorCode::kInvalidArgument, "generator.noise_mode must be 'dropout' or 'none'");
  }
  cfg.generator.noise.mode = noise_mode == "none" ? NoiseMode::kNone : NoiseMode::kDropout;
  reject_leftovers(gen, "generator");

  json disc = section(root, "discriminator");
  take(disc, "hidden_channels", cfg.discriminator.hidden_channels);
  reject_leftovers(disc, "discriminator");

  json train = section(root, "train");
  take(train, "epochs", cfg.train.epochs);
  take(train, "batch_size", cfg.train.batch_size);
  take(train, "momentum", cfg.train.momentum);
  take(train, "learning_rate_g", cfg.train.learning_rate_g);
  take(train, "learning_rate_d", cfg.train.learning_rate_d);
  take(train, "lambda_l1", cfg.train.lambda_l1);
  take(train, "seed", cfg.train.seed);
  reject_leftovers(train, "train");

  json thr = section(root, "threshold");
  std::string mode = "local";
  take(thr, "mode", mode);
  if (mode != "local" && mode != "otsu") {
    throw Error(ErrorCode::kInvalidArgument, "threshold.mode must be 'otsu' or 'local'");
  }
  cfg.threshold.mode = mode == "otsu" ? ThresholdMode::kGlobalOtsu : ThresholdMode::kLocalAdaptive;
  take(thr, "window", cfg.threshold.window);
  cfg.threshold.stride = cfg.threshold.window / 2;
  take(thr, "stride", cfg.threshold.stride);
  take(thr, "min_contrast", cfg.threshold.min_contrast);
  take(thr, "min_separability", cfg.threshold.min_separability);
  reject_leftovers(thr, "threshold");

  json det = section(root, "detect");
  std::string fusion = "aligned";
  take(det, "fusion", fusion);
  if (fusion != "aligned" && fusion != "literal") {
    throw Error(ErrorCode::kInvalidArgument, "detect.fusion must be 'literal' or 'aligned'");
  }
  cfg.fusion = fusion == "literal" ? FusionMode::kLiteral : FusionMode::kPolarityAligned;
  take(det, "stochastic", cfg.stochastic_inference);
  take(det, "noise_seed", cfg.inference_seed);
  reject_leftovers(det, "detect");

  if (!root.empty()) throw Error(ErrorCode::kInvalidArgument, "unknown config table '" + root.begin().key() + "'");
  cfg.validate();
  return cfg;
}

json to_json(const RunConfig& c) {
  return {
      {"data", {{"patch_size", c.data.patch_size}, {"train_fraction", c.data.train_fraction}, {"split_seed", c.data.split_seed}}},
      {"noise", {{"sigma", c.noise.sigma}, {"seed", c.noise.seed}}},
      {"generator",
       {{"base_channels", c.generator.base_channels},
        {"dropout_rate", c.generator.noise.dropout_rate},
        {"noise_mode", c.generator.noise.mode == NoiseMode::kNone ? "none" : "dropout"}}},
      {"discriminator", {{"hidden_channels", c.discriminator.hidden_channels}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"momentum", c.train.momentum},
        {"learning_rate_g", c.train.learning_rate_g},
        {"learning_rate_d", c.train.learning_rate_d},
        {"lambda_l1", c.train.lambda_l1},
        {"seed", c.train.seed}}},
      {"threshold",
       {{"mode", std::string(to_string(c.threshold.mode))},
        {"window", c.threshold.window},
        {"stride", c.threshold.stride},
        {"min_contrast", c.threshold.min_contrast},
        {"min_separability", c.threshold.min_separability}}},
      {"detect",
       {{"fusion", std::string(to_string(c.fusion))},
        {"stochastic", c.stochastic_inference},
        {"noise_seed", c.inference_seed}}},
  };
}

}  // namespace s2cgan
