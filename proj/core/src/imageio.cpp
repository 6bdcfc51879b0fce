#include "optomx/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "optomx/csv.hpp"

namespace optomx {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  return f;
}

bool has_png_signature(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && !png_sig_cmp(sig, 0, 8);
}

// ---- PGM (binary P5) ----

int pgm_next_token(std::ifstream& in, std::string& tok,
                   double* scale_out = nullptr) {
  tok.clear();
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string comment;
      while (in.get(c) && c != '\n') comment.push_back(c);
      const auto pos = comment.find("scale=");
      if (scale_out && pos != std::string::npos) {
        const double s = std::strtod(comment.c_str() + pos + 6, nullptr);
        if (s > 0.0) *scale_out = s;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return 1;
      continue;
    }
    tok.push_back(c);
  }
  return tok.empty() ? 0 : 1;
}

void read_pgm_raw(const std::string& path, std::vector<std::uint32_t>& pixels,
                  int& width, int& height, int& maxval,
                  double* scale_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  if (scale_out) *scale_out = 1.0;
  std::string tok;
  if (!pgm_next_token(in, tok, scale_out) || tok != "P5")
    fail(ErrorCode::BadFormat, "'" + path + "': not a binary PGM (P5)");
  auto read_int = [&](const char* what) {
    if (!pgm_next_token(in, tok, scale_out))
      fail(ErrorCode::BadFormat, std::string("PGM header truncated at ") + what);
    return std::stoi(tok);
  };
  width = read_int("width");
  height = read_int("height");
  maxval = read_int("maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    fail(ErrorCode::BadFormat, "'" + path + "': bad PGM dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  pixels.resize(n);
  if (maxval < 256) {
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      fail(ErrorCode::BadFormat, "'" + path + "': PGM pixel data truncated");
    std::copy(raw.begin(), raw.end(), pixels.begin());
  } else {
    std::vector<std::uint8_t> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
    if (static_cast<std::size_t>(in.gcount()) != n * 2)
      fail(ErrorCode::BadFormat, "'" + path + "': PGM pixel data truncated");
    for (std::size_t i = 0; i < n; ++i)
      pixels[i] = (static_cast<std::uint32_t>(raw[2 * i]) << 8) | raw[2 * i + 1];
  }
}

// ---- PNG ----

void read_png_gray(const std::string& path, std::vector<std::uint32_t>& pixels,
                   int& width, int& height, int& maxval) {
  FilePtr f = open_file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::BadFormat, "'" + path + "': PNG decode error");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::BadFormat, "'" + path + "': expected grayscale PNG");
  }
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    bit_depth = 8;
  }
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  maxval = bit_depth == 16 ? 65535 : 255;
  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> raw(stride * height);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = raw.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(width) * height;
  pixels.resize(n);
  if (bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i)  // PNG stores 16-bit big-endian
      pixels[i] = (static_cast<std::uint32_t>(raw[2 * i]) << 8) | raw[2 * i + 1];
  } else {
    std::copy(raw.begin(), raw.begin() + n, pixels.begin());
  }
}

void write_png_impl(const std::string& path, const std::uint8_t* data, int width,
                    int height, int bit_depth, int color_type) {
  FilePtr f = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoFailure, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoFailure, "'" + path + "': PNG encode error");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t stride =
      static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r)
    rows[r] = const_cast<png_bytep>(data + stride * r);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage counts_to_image(const std::vector<std::uint32_t>& pixels, int width,
                          int height, double pitch) {
  GrayImage img(width, height, pitch);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    img[i] = static_cast<double>(pixels[i]);
  return img;
}

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

GrayImage read_gray_image(const std::string& path, double pixel_pitch_mm,
                          double* scale_out) {
  std::vector<std::uint32_t> pixels;
  int width = 0, height = 0, maxval = 0;
  if (scale_out) *scale_out = 1.0;
  if (has_png_signature(path))
    read_png_gray(path, pixels, width, height, maxval);
  else
    read_pgm_raw(path, pixels, width, height, maxval, scale_out);
  return counts_to_image(pixels, width, height, pixel_pitch_mm);
}

std::vector<std::uint8_t> read_label_mask(const std::string& path, int& width,
                                          int& height) {
  std::vector<std::uint32_t> pixels;
  int maxval = 0;
  if (has_png_signature(path))
    read_png_gray(path, pixels, width, height, maxval);
  else
    read_pgm_raw(path, pixels, width, height, maxval);
  std::vector<std::uint8_t> labels(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] > 3)
      fail(ErrorCode::BadFormat, "'" + path + "': mask value outside {0,1,2,3}");
    labels[i] = static_cast<std::uint8_t>(pixels[i]);
  }
  return labels;
}

void write_pgm16(const std::string& path, const GrayImage& img, double max_value) {
  if (!(max_value > 0.0)) fail(ErrorCode::BadConfig, "write_pgm16: max_value <= 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  out << "P5\n# scale=" << format_real(max_value / 65535.0) << "\n"
      << img.width() << " " << img.height() << "\n65535\n";
  for (double v : img.values()) {
    const double scaled = std::clamp(v / max_value, 0.0, 1.0) * 65535.0;
    const auto q = static_cast<std::uint16_t>(std::lround(scaled));
    const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
    out.write(bytes, 2);
  }
}

void write_pgm8(const std::string& path, const std::vector<std::uint8_t>& pixels,
                int width, int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void write_png16_gray(const std::string& path, const GrayImage& img,
                      double max_value) {
  if (!(max_value > 0.0)) fail(ErrorCode::BadConfig, "write_png16: max_value <= 0");
  const std::size_t n = img.size();
  std::vector<std::uint8_t> raw(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = std::clamp(img[i] / max_value, 0.0, 1.0) * 65535.0;
    const auto q = static_cast<std::uint16_t>(std::lround(scaled));
    raw[2 * i] = static_cast<std::uint8_t>(q >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
  }
  write_png_impl(path, raw.data(), img.width(), img.height(), 16,
                 PNG_COLOR_TYPE_GRAY);
}

void write_png8_gray(const std::string& path,
                     const std::vector<std::uint8_t>& pixels, int width,
                     int height) {
  write_png_impl(path, pixels.data(), width, height, 8, PNG_COLOR_TYPE_GRAY);
}

void write_png8_rgb(const std::string& path, const std::vector<std::uint8_t>& rgb,
                    int width, int height) {
  write_png_impl(path, rgb.data(), width, height, 8, PNG_COLOR_TYPE_RGB);
}

std::vector<std::uint8_t> read_png8_rgb(const std::string& path, int& width,
                                        int& height) {
  FilePtr f = open_file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoFailure, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::BadFormat, "'" + path + "': PNG decode error");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB ||
      png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::BadFormat, "'" + path + "': expected 8-bit RGB PNG");
  }
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t stride = png_get_rowbytes(png, info);
  std::vector<std::uint8_t> raw(stride * height);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = raw.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  raw.resize(static_cast<std::size_t>(width) * height * 3);
  return raw;
}

void write_float_grid(const std::string& path, const GrayImage& img,
                      std::uint32_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write '" + path + "'");
  std::string header = "OPMP";
  put_u32le(header, static_cast<std::uint32_t>(img.width()));
  put_u32le(header, static_cast<std::uint32_t>(img.height()));
  put_u32le(header, config_hash);
  out.write(header.data(), 16);
  for (double v : img.values()) {
    const float fv = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &fv, 4);
    std::string word;
    put_u32le(word, bits);
    out.write(word.data(), 4);
  }
}

GrayImage read_float_grid(const std::string& path, std::uint32_t& config_hash,
                          double pixel_pitch_mm) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open '" + path + "'");
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  if (in.gcount() != 16 || std::memcmp(header, "OPMP", 4) != 0)
    fail(ErrorCode::BadFormat, "'" + path + "': not a float grid (OPMP)");
  const int width = static_cast<int>(get_u32le(header + 4));
  const int height = static_cast<int>(get_u32le(header + 8));
  config_hash = get_u32le(header + 12);
  if (width < 1 || height < 1 || width > 1 << 20 || height > 1 << 20)
    fail(ErrorCode::BadFormat, "'" + path + "': implausible grid dimensions");
  GrayImage img(width, height, pixel_pitch_mm);
  const std::size_t n = img.size();
  std::vector<unsigned char> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 4));
  if (static_cast<std::size_t>(in.gcount()) != n * 4)
    fail(ErrorCode::BadFormat, "'" + path + "': float grid truncated");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = get_u32le(raw.data() + 4 * i);
    float fv;
    std::memcpy(&fv, &bits, 4);
    img[i] = fv;
  }
  return img;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot open manifest '" + path + "'");
  const auto base = std::filesystem::path(path).parent_path();
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::BadFormat, "manifest '" + path + "' is empty");
  if (split_csv_line(line) !=
      std::vector<std::string>{"slice_id", "patient_id", "dose_group", "image",
                               "mask"})
    fail(ErrorCode::BadFormat, "manifest '" + path + "': unexpected header");
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      fail(ErrorCode::BadFormat, "manifest '" + path + "': malformed row");
    ManifestEntry e;
    e.slice_id = fields[0];
    e.patient_id = fields[1];
    try {
      e.dose_group = std::stoi(fields[2]);
    } catch (const std::exception&) {
      fail(ErrorCode::BadFormat, "manifest '" + path + "': bad dose_group");
    }
    e.image_path = (base / fields[3]).string();
    e.mask_path = (base / fields[4]).string();
    entries.push_back(std::move(e));
  }
  if (entries.empty())
    fail(ErrorCode::BadFormat, "manifest '" + path + "' lists no slices");
  return entries;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoFailure, "cannot write manifest '" + path + "'");
  const auto base = std::filesystem::path(path).parent_path();
  out << "slice_id,patient_id,dose_group,image,mask\n";
  for (const auto& e : entries) {
    out << e.slice_id << "," << e.patient_id << "," << e.dose_group << ","
        << std::filesystem::relative(e.image_path, base).generic_string() << ","
        << std::filesystem::relative(e.mask_path, base).generic_string() << "\n";
  }
}

std::vector<LabeledSlice> load_study(const std::string& manifest_path,
                                     double pixel_pitch_mm) {
  const auto entries = read_manifest(manifest_path);
  std::vector<LabeledSlice> slices;
  slices.reserve(entries.size());
  for (const auto& e : entries) {
    LabeledSlice s;
    double scale = 1.0;
    s.image = read_gray_image(e.image_path, pixel_pitch_mm, &scale);
    if (scale != 1.0)
      for (double& v : s.image.values()) v *= scale;
    int mw = 0, mh = 0;
    s.labels = read_label_mask(e.mask_path, mw, mh);
    if (mw != s.image.width() || mh != s.image.height())
      fail(ErrorCode::ShapeMismatch,
           "slice '" + e.slice_id + "': mask shape differs from image");
    s.slice_id = e.slice_id;
    s.patient_id = e.patient_id;
    s.dose_group = e.dose_group;
    s.validate();
    slices.push_back(std::move(s));
  }
  return slices;
}

}  // namespace optomx
