#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optomx/image.hpp"

namespace optomx {

// Grayscale image input: 8/16-bit PGM (binary P5) or 8/16-bit gray PNG,
// selected by file content. Raw counts are returned unscaled as doubles.
// A "# scale=<v>" PGM header comment, when present, is reported through
// scale_out (1.0 otherwise); counts * scale recovers physical units.
GrayImage read_gray_image(const std::string& path,
                          double pixel_pitch_mm = kDefaultPixelPitchMm,
                          double* scale_out = nullptr);

// Label masks are 8-bit PGM/PNG with values {0,1,2,3}.
std::vector<std::uint8_t> read_label_mask(const std::string& path, int& width,
                                          int& height);

// Quantizes to 16-bit codes against max_value and records the quantum
// (max_value / 65535) as a "# scale=" header comment.
void write_pgm16(const std::string& path, const GrayImage& img, double max_value);
void write_pgm8(const std::string& path, const std::vector<std::uint8_t>& pixels,
                int width, int height);
void write_png16_gray(const std::string& path, const GrayImage& img,
                      double max_value);
void write_png8_gray(const std::string& path,
                     const std::vector<std::uint8_t>& pixels, int width,
                     int height);
// Interleaved RGB, 3 bytes per pixel.
void write_png8_rgb(const std::string& path,
                    const std::vector<std::uint8_t>& rgb, int width, int height);
std::vector<std::uint8_t> read_png8_rgb(const std::string& path, int& width,
                                        int& height);

// Binary float32 grid with a 16-byte header: magic "OPMP", u32 width,
// u32 height, u32 config hash (little-endian). Used for probability maps
// and standardized-slice intermediates.
void write_float_grid(const std::string& path, const GrayImage& img,
                      std::uint32_t config_hash);
GrayImage read_float_grid(const std::string& path, std::uint32_t& config_hash,
                          double pixel_pitch_mm = kDefaultPixelPitchMm);

// Study manifest: CSV with header slice_id,patient_id,dose_group,image,mask;
// image/mask paths are resolved relative to the manifest location.
struct ManifestEntry {
  std::string slice_id;
  std::string patient_id;
  int dose_group = 1;
  std::string image_path;
  std::string mask_path;
};

std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries);

// Loads every slice listed in a manifest (unstandardized); image counts are
// multiplied by the recorded scale so slices come back in physical units.
std::vector<LabeledSlice> load_study(const std::string& manifest_path,
                                     double pixel_pitch_mm = kDefaultPixelPitchMm);

}  // namespace optomx
