#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "s2cgan/error.hpp"
#include "s2cgan/raster.hpp"

namespace s2cgan {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- Raster

Raster::Raster(int height, int width, int bands, float fill)
    : height_(height),
      width_(width),
      bands_(bands),
      data_(static_cast<std::size_t>(height) * width * bands, fill) {
  if (height < 0 || width < 0 || bands < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative raster dimension");
  }
}

void Raster::record_read() const {
  if (probe_) probe_->reads.fetch_add(1, std::memory_order_relaxed);
}

std::span<const float> Raster::values() const {
  record_read();
  return data_;
}

std::span<const float> Raster::band(int b) const {
  record_read();
  return std::span<const float>(data_).subspan(static_cast<std::size_t>(b) * plane_size(), plane_size());
}

std::span<float> Raster::mutable_band(int b) noexcept {
  return std::span<float>(data_).subspan(static_cast<std::size_t>(b) * plane_size(), plane_size());
}

std::size_t BinaryMask::count_ones() const {
  std::size_t n = 0;
  for (auto v : values) n += v != 0 ? 1 : 0;
  return n;
}

double BinaryMask::fraction() const {
  return values.empty() ? 0.0 : static_cast<double>(count_ones()) / static_cast<double>(values.size());
}

json band_stats_to_json(const BandStats& stats) {
  json arr = json::array();
  for (const auto& r : stats) arr.push_back({{"min", r.min}, {"max", r.max}});
  return arr;
}

BandStats band_stats_from_json(const json& j) {
  BandStats stats;
  for (const auto& e : j) stats.push_back({e.at("min").get<double>(), e.at("max").get<double>()});
  return stats;
}

// -------------------------------------------------------------------- IO

namespace {

struct Header {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::string dtype;
};

bool is_geotiff(const fs::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".tif" || ext == ".tiff";
}

Header parse_header(const fs::path& path) {
  if (is_geotiff(path)) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": GeoTIFF input is not supported by this build; convert to raw BSQ");
  }
  json j = read_sidecar(path);
  Header h;
  try {
    h.width = j.at("width").get<int>();
    h.height = j.at("height").get<int>();
    h.bands = j.at("bands").get<int>();
    h.dtype = j.at("dtype").get<std::string>();
    const auto order = j.value("order", std::string("bsq"));
    if (order != "bsq") {
      throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": order '" + order + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": bad sidecar: " + e.what());
  }
  if (h.dtype != "f32" && h.dtype != "u8") {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": dtype '" + h.dtype + "'");
  }
  if (h.width <= 0 || h.height <= 0 || h.bands <= 0) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + ": non-positive dimensions");
  }
  return h;
}

std::vector<char> read_bytes(const fs::path& path, std::size_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> buf(expected);
  in.read(buf.data(), static_cast<std::streamsize>(expected));
  if (static_cast<std::size_t>(in.gcount()) != expected || in.peek() != EOF) {
    throw Error(ErrorCode::kIo, path.string() + ": size does not match sidecar");
  }
  return buf;
}

float load_f32_le(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  return std::bit_cast<float>(bits);
}

void store_f32_le(float v, char* p) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  }
  std::memcpy(p, &bits, 4);
}

void write_file(const fs::path& path, const char* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(data, static_cast<std::streamsize>(size));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_sidecar(const fs::path& data_path, int width, int height, int bands,
                   const std::string& dtype, const json& provenance) {
  json j = {{"width", width}, {"height", height}, {"bands", bands}, {"dtype", dtype}, {"order", "bsq"}};
  if (!provenance.is_null()) j["provenance"] = provenance;
  const std::string text = j.dump(2) + "\n";
  write_file(sidecar_path(data_path), text.data(), text.size());
}

}  // namespace

fs::path sidecar_path(const fs::path& data_path) {
  return fs::path(data_path.string() + ".json");
}

json read_sidecar(const fs::path& data_path) {
  const fs::path side = sidecar_path(data_path);
  std::ifstream in(side);
  if (!in) throw Error(ErrorCode::kIo, "missing sidecar " + side.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, side.string() + ": " + e.what());
  }
}

Raster read_raster(const fs::path& path) {
  const Header h = parse_header(path);
  Raster r(h.height, h.width, h.bands);
  auto out = r.mutable_values();
  if (h.dtype == "f32") {
    const auto bytes = read_bytes(path, out.size() * 4);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = load_f32_le(bytes.data() + 4 * i);
  } else {
    const auto bytes = read_bytes(path, out.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<unsigned char>(bytes[i]);
  }
  return r;
}

void write_raster(const fs::path& path, const Raster& raster, const json& provenance) {
  const auto vals = raster.values();
  std::vector<char> bytes(vals.size() * 4);
  for (std::size_t i = 0; i < vals.size(); ++i) store_f32_le(vals[i], bytes.data() + 4 * i);
  write_file(path, bytes.data(), bytes.size());
  write_sidecar(path, raster.width(), raster.height(), raster.bands(), "f32", provenance);
}

BinaryMask read_mask(const fs::path& path) {
  const Header h = parse_header(path);
  if (h.bands != 1) {
    throw Error(ErrorCode::kBadMask, path.string() + ": mask must be single-band");
  }
  BinaryMask m(h.height, h.width);
  if (h.dtype == "u8") {
    const auto bytes = read_bytes(path, m.values.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) m.values[i] = bytes[i] != 0 ? 1 : 0;
  } else {
    const auto bytes = read_bytes(path, m.values.size() * 4);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const float v = load_f32_le(bytes.data() + 4 * i);
      if (v != 0.0f && v != 1.0f) {
        throw Error(ErrorCode::kBadMask, path.string() + ": non-binary value in float mask");
      }
      m.values[i] = v != 0.0f ? 1 : 0;
    }
  }
  return m;
}

void write_mask(const fs::path& path, const BinaryMask& mask, const json& provenance) {
  std::vector<char> bytes(mask.values.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<char>(mask.values[i] != 0 ? 255 : 0);
  }
  write_file(path, bytes.data(), bytes.size());
  write_sidecar(path, mask.width, mask.height, 1, "u8", provenance);
}

void write_png_gray(const fs::path& path, int height, int width, std::span<const std::uint8_t> pixels) {
  if (pixels.size() != static_cast<std::size_t>(height) * width) {
    throw Error(ErrorCode::kShapeMismatch, "png pixel buffer size");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::kIo, "libpng failure writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < height; ++row) {
    png_write_row(png, pixels.data() + static_cast<std::size_t>(row) * width);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace s2cgan
