#include "branchdepth/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <png.h>

namespace branchdepth {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(path, "cannot open");
  return f;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const fs::path& path) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) fail(path, "bad number '" + s + "'");
  return v;
}

long parse_long(const std::string& s, const fs::path& path) {
  long v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) fail(path, "bad integer '" + s + "'");
  return v;
}

}  // namespace

// ----------------------------------------------------------------- PFM

RealPlane read_pfm(const fs::path& path) {
  FilePtr f = open_file(path, "rb");

  auto next_token = [&]() -> std::string {
    std::string tok;
    int c;
    while ((c = std::fgetc(f.get())) != EOF && std::isspace(c)) {
    }
    if (c == EOF) fail(path, "truncated PFM header");
    do {
      tok.push_back(static_cast<char>(c));
    } while ((c = std::fgetc(f.get())) != EOF && !std::isspace(c));
    if (c == EOF) fail(path, "truncated PFM header");
    // The single whitespace after the scale token separates header and data.
    return tok;
  };

  const std::string magic = next_token();
  if (magic == "PF") fail(path, "color PFM not supported");
  if (magic != "Pf") fail(path, "not a PFM file");
  const long w = parse_long(next_token(), path);
  const long h = parse_long(next_token(), path);
  if (w < 1 || h < 1 || w > 100000 || h > 100000) fail(path, "bad dimensions");
  const double scale = parse_double(next_token(), path);
  if (scale == 0.0) fail(path, "zero PFM scale");
  const bool little_endian = scale < 0.0;

  RealPlane plane(h, w);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 4);
  for (long k = 0; k < h; ++k) {
    if (std::fread(row.data(), 1, row.size(), f.get()) != row.size())
      fail(path, "truncated PFM data");
    if (!little_endian)
      for (long j = 0; j < w; ++j)
        std::swap(row[4 * j], row[4 * j + 3]), std::swap(row[4 * j + 1], row[4 * j + 2]);
    // PFM stores rows bottom-up.
    std::memcpy(plane.row(h - 1 - k).data(), row.data(), row.size());
  }
  return plane;
}

void write_pfm(const fs::path& path, const RealPlane& plane) {
  FilePtr f = open_file(path, "wb");
  const long h = plane.rows(), w = plane.cols();
  std::fprintf(f.get(), "Pf\n%ld %ld\n-1.0\n", w, h);
  for (long i = h - 1; i >= 0; --i) {
    const std::size_t bytes = static_cast<std::size_t>(w) * 4;
    if (std::fwrite(plane.row(i).data(), 1, bytes, f.get()) != bytes)
      fail(path, "short write");
  }
  if (std::fflush(f.get()) != 0) fail(path, "flush failed");
}

// ----------------------------------------------------------------- PNG

namespace {

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Decodes any 8/16-bit gray/palette/RGB(A) PNG to 8-bit with `channels`
// output channels (3 = RGB, 1 = gray).
std::vector<std::uint8_t> decode_png(const fs::path& path, int channels,
                                     png_uint_32& width, png_uint_32& height) {
  FilePtr f = open_file(path, "rb");
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) fail(path, "libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) fail(path, "PNG decode failed");

  png_init_io(r.png, f.get());
  png_read_info(r.png, r.info);

  int bit_depth = 0, color_type = 0;
  png_get_IHDR(r.png, r.info, &width, &height, &bit_depth, &color_type,
               nullptr, nullptr, nullptr);
  if (width < 1 || height < 1) fail(path, "bad PNG dimensions");

  if (bit_depth == 16) png_set_strip_16(r.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(r.png);
  if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
  if (channels == 3 &&
      (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA))
    png_set_gray_to_rgb(r.png);
  if (channels == 1 &&
      (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
       color_type == PNG_COLOR_TYPE_PALETTE))
    png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
  if (rowbytes != static_cast<std::size_t>(width) * channels)
    fail(path, "unexpected PNG layout");

  std::vector<std::uint8_t> data(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 i = 0; i < height; ++i) rows[i] = data.data() + i * rowbytes;
  png_read_image(r.png, rows.data());
  return data;
}

void encode_png(const fs::path& path, const std::uint8_t* data, long width,
                long height, int color_type) {
  FilePtr f = open_file(path, "wb");
  PngWriter wtr;
  wtr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!wtr.png) fail(path, "libpng init failed");
  wtr.info = png_create_info_struct(wtr.png);
  if (!wtr.info) fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(wtr.png))) fail(path, "PNG encode failed");

  png_init_io(wtr.png, f.get());
  png_set_IHDR(wtr.png, wtr.info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wtr.png, wtr.info);

  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (long i = 0; i < height; ++i)
    rows[static_cast<std::size_t>(i)] = const_cast<png_bytep>(data + i * rowbytes);
  png_write_image(wtr.png, rows.data());
  png_write_end(wtr.png, wtr.info);
}

}  // namespace

RgbImage read_png_rgb(const fs::path& path) {
  png_uint_32 w = 0, h = 0;
  std::vector<std::uint8_t> data = decode_png(path, 3, w, h);
  RgbImage img;
  img.r.resize(h, w);
  img.g.resize(h, w);
  img.b.resize(h, w);
  for (png_uint_32 i = 0; i < h; ++i)
    for (png_uint_32 j = 0; j < w; ++j) {
      const std::uint8_t* px = data.data() + (std::size_t(i) * w + j) * 3;
      img.r(i, j) = px[0];
      img.g(i, j) = px[1];
      img.b(i, j) = px[2];
    }
  return img;
}

void write_png_rgb(const fs::path& path, const RgbImage& img) {
  const long h = img.height(), w = img.width();
  std::vector<std::uint8_t> data(static_cast<std::size_t>(h) * w * 3);
  for (long i = 0; i < h; ++i)
    for (long j = 0; j < w; ++j) {
      std::uint8_t* px = data.data() + (std::size_t(i) * w + j) * 3;
      px[0] = img.r(i, j);
      px[1] = img.g(i, j);
      px[2] = img.b(i, j);
    }
  encode_png(path, data.data(), w, h, PNG_COLOR_TYPE_RGB);
}

MaskPlane read_png_mask(const fs::path& path) {
  png_uint_32 w = 0, h = 0;
  std::vector<std::uint8_t> data = decode_png(path, 1, w, h);
  MaskPlane m(h, w);
  for (png_uint_32 i = 0; i < h; ++i)
    for (png_uint_32 j = 0; j < w; ++j)
      m(i, j) = data[std::size_t(i) * w + j] != 0 ? 1 : 0;
  return m;
}

void write_png_mask(const fs::path& path, const MaskPlane& mask) {
  require_binary(mask, "write_png_mask");
  const long h = mask.rows(), w = mask.cols();
  std::vector<std::uint8_t> data(static_cast<std::size_t>(h) * w);
  for (long i = 0; i < h; ++i)
    for (long j = 0; j < w; ++j)
      data[std::size_t(i) * w + j] = mask(i, j) ? 255 : 0;
  encode_png(path, data.data(), w, h, PNG_COLOR_TYPE_GRAY);
}

// ----------------------------------------------------------------- PLY

void write_ply(const fs::path& path, const PointCloud& cloud) {
  FilePtr f = open_file(path, "wb");
  std::fprintf(f.get(),
               "ply\nformat ascii 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "end_header\n",
               cloud.points.size());
  for (const CloudPoint& p : cloud.points)
    // 9 significant digits round-trip a 32-bit float exactly.
    std::fprintf(f.get(), "%.9g %.9g %.9g %u %u %u\n", double(p.x), double(p.y),
                 double(p.z), unsigned(p.r), unsigned(p.g), unsigned(p.b));
  if (std::fflush(f.get()) != 0) fail(path, "flush failed");
}

PointCloud read_ply(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") fail(path, "not a PLY file");
  if (!std::getline(in, line) || trim(line) != "format ascii 1.0")
    fail(path, "only ascii 1.0 PLY supported");

  long count = -1;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment") continue;
    if (word == "element") {
      std::string what;
      ls >> what >> count;
      if (what != "vertex" || count < 0) fail(path, "unsupported PLY element");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    } else {
      fail(path, "unsupported PLY header line: " + line);
    }
  }
  const std::vector<std::string> expected = {
      "float x",    "float y",     "float z",
      "uchar red",  "uchar green", "uchar blue"};
  if (count < 0 || props != expected) fail(path, "unsupported PLY layout");

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    if (!std::getline(in, line)) fail(path, "truncated PLY body");
    std::istringstream ls(line);
    CloudPoint p;
    int r = -1, g = -1, b = -1;
    if (!(ls >> p.x >> p.y >> p.z >> r >> g >> b)) fail(path, "bad PLY vertex");
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
      fail(path, "bad PLY color");
    p.r = static_cast<std::uint8_t>(r);
    p.g = static_cast<std::uint8_t>(g);
    p.b = static_cast<std::uint8_t>(b);
    cloud.points.push_back(p);
  }
  return cloud;
}

// ----------------------------------------------------- key=value files

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::vector<std::string> KeyValueFile::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

KeyValueFile read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  KeyValueFile kv;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(path, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(path, "line " + std::to_string(lineno) + ": empty key");
    kv.entries.emplace_back(key, value);
  }
  return kv;
}

CameraIntrinsics read_intrinsics(const fs::path& path) {
  KeyValueFile kv = read_key_values(path);
  CameraIntrinsics k;
  struct Field {
    const char* name;
    double* dst;
  };
  const Field fields[] = {{"fx", &k.fx},
                          {"fy", &k.fy},
                          {"cx", &k.cx},
                          {"cy", &k.cy},
                          {"baseline_mm", &k.baseline_mm}};
  for (const Field& f : fields) {
    const std::string* v = kv.find(f.name);
    if (!v) fail(path, std::string("missing key '") + f.name + "'");
    *f.dst = parse_double(*v, path);
  }
  k.validate();
  return k;
}

void write_intrinsics(const fs::path& path, const CameraIntrinsics& k) {
  FilePtr f = open_file(path, "wb");
  std::fprintf(f.get(),
               "fx = %.17g\nfy = %.17g\ncx = %.17g\ncy = %.17g\n"
               "baseline_mm = %.17g\n",
               k.fx, k.fy, k.cx, k.cy, k.baseline_mm);
}

// ----------------------------------------------------------- manifests

SceneInputs read_manifest(const fs::path& manifest_path) {
  KeyValueFile kv = read_key_values(manifest_path);
  const fs::path base = manifest_path.parent_path();
  auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : base / p;
  };

  auto require = [&](const char* key) -> const std::string& {
    const std::string* v = kv.find(key);
    if (!v) fail(manifest_path, std::string("missing key '") + key + "'");
    return *v;
  };

  SceneInputs s;
  s.rgb = read_png_rgb(resolve(require("rgb")));
  s.disparity = read_pfm(resolve(require("disparity")));
  s.intrinsics = read_intrinsics(resolve(require("intrinsics")));
  if (s.disparity.rows() != s.rgb.height() || s.disparity.cols() != s.rgb.width())
    fail(manifest_path, "disparity and rgb dimensions differ");

  for (const std::string& m : kv.all("mask")) {
    std::istringstream ls(m);
    int id = 0;
    double score = 0.0;
    if (!(ls >> id >> score)) fail(manifest_path, "bad mask line: " + m);
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);
    if (rest.empty()) fail(manifest_path, "mask line missing path: " + m);
    BranchInstance inst;
    inst.id = id;
    inst.score = score;
    inst.mask = read_png_mask(resolve(rest));
    if (inst.mask.rows() != s.rgb.height() || inst.mask.cols() != s.rgb.width())
      fail(manifest_path, "mask dimensions differ: " + rest);
    for (const BranchInstance& prev : s.instances)
      if (prev.id == id) fail(manifest_path, "duplicate branch id " + std::to_string(id));
    s.instances.push_back(std::move(inst));
  }
  if (s.instances.empty()) fail(manifest_path, "no mask lines");
  return s;
}

SceneSpec read_scene_spec(const fs::path& path) {
  KeyValueFile kv = read_key_values(path);
  SceneSpec spec;

  auto ints = [&](const std::string& v) { return static_cast<int>(parse_long(v, path)); };
  auto dbl = [&](const std::string& v) { return parse_double(v, path); };

  for (const auto& [key, value] : kv.entries) {
    std::istringstream vs(value);
    if (key == "width") {
      spec.width = ints(value);
    } else if (key == "height") {
      spec.height = ints(value);
    } else if (key == "background_depth_mm") {
      spec.background_depth_mm = dbl(value);
    } else if (key == "color_jitter") {
      spec.color_jitter = dbl(value);
    } else if (key == "background_rgb") {
      int r, g, b;
      if (!(vs >> r >> g >> b)) fail(path, "background_rgb wants 'r g b'");
      spec.background_rgb = {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
    } else if (key == "intrinsics.fx") {
      spec.intrinsics.fx = dbl(value);
    } else if (key == "intrinsics.fy") {
      spec.intrinsics.fy = dbl(value);
    } else if (key == "intrinsics.cx") {
      spec.intrinsics.cx = dbl(value);
    } else if (key == "intrinsics.cy") {
      spec.intrinsics.cy = dbl(value);
    } else if (key == "intrinsics.baseline_mm") {
      spec.intrinsics.baseline_mm = dbl(value);
    } else if (key == "noise.gaussian_sigma_mm") {
      spec.noise.gaussian_sigma_mm = dbl(value);
    } else if (key == "noise.outlier_fraction") {
      spec.noise.outlier_fraction = dbl(value);
    } else if (key == "noise.outlier_offset_min_mm") {
      spec.noise.outlier_offset_min_mm = dbl(value);
    } else if (key == "noise.outlier_offset_max_mm") {
      spec.noise.outlier_offset_max_mm = dbl(value);
    } else if (key == "noise.spike_count") {
      spec.noise.spike_count = ints(value);
    } else if (key == "noise.spike_offset_mm") {
      spec.noise.spike_offset_mm = dbl(value);
    } else if (key == "rect") {
      ScenePrimitive p;
      p.kind = ScenePrimitive::Kind::Rect;
      if (!(vs >> p.branch_id >> p.depth_mm >> p.rect.x >> p.rect.y >>
            p.rect.w >> p.rect.h))
        fail(path, "rect wants 'id depth x y w h'");
      spec.primitives.push_back(p);
    } else if (key == "polyline") {
      ScenePrimitive p;
      p.kind = ScenePrimitive::Kind::Polyline;
      if (!(vs >> p.branch_id >> p.depth_mm))
        fail(path, "polyline wants 'id depth x0 y0 x1 y1 ...'");
      int x, y;
      while (vs >> x >> y) p.points.emplace_back(x, y);
      if (p.points.size() < 2) fail(path, "polyline needs >= 2 points");
      spec.primitives.push_back(p);
    } else if (key == "branch") {
      int id, r, g, b;
      double score;
      if (!(vs >> id >> score >> r >> g >> b))
        fail(path, "branch wants 'id score r g b'");
      spec.branches[id] = {score, {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)}};
    } else {
      fail(path, "unknown key '" + key + "'");
    }
  }
  return spec;
}

void write_scene(const fs::path& dir, const SyntheticScene& scene) {
  fs::create_directories(dir / "masks");
  write_png_rgb(dir / "left.png", scene.rgb);
  write_pfm(dir / "disparity.pfm", scene.disparity);
  write_pfm(dir / "gt_depth.pfm", scene.gt_depth);
  write_intrinsics(dir / "intrinsics.txt", scene.intrinsics);

  FilePtr mf = open_file(dir / "manifest.txt", "wb");
  std::fprintf(mf.get(), "rgb = left.png\ndisparity = disparity.pfm\n"
                         "intrinsics = intrinsics.txt\n");
  for (const BranchInstance& inst : scene.instances) {
    char name[64];
    std::snprintf(name, sizeof name, "masks/branch_%02d.png", inst.id);
    write_png_mask(dir / name, inst.mask);
    std::fprintf(mf.get(), "mask = %d %.17g %s\n", inst.id, inst.score, name);
  }
}

}  // namespace branchdepth
