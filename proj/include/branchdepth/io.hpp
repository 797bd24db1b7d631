#pragma once

#include "branchdepth/evaluate.hpp"
#include "branchdepth/raster.hpp"
#include "branchdepth/stereo.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace branchdepth {

// --- PFM: grayscale "Pf", 32-bit float, scale -1.0 (little endian),
// bottom-up row order.  NaN payloads survive the round trip bitwise. ---
RealPlane read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const RealPlane& plane);

// --- PNG (8-bit) ---
RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);
// Single channel; any nonzero sample reads as 1.
MaskPlane read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const MaskPlane& mask);

// --- ASCII PLY (x y z float mm, red green blue uchar) ---
// Floats print with 9 significant digits so write -> read -> write is
// byte-identical.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

// --- flat "key = value" text ---
struct KeyValueFile {
  std::vector<std::pair<std::string, std::string>> entries;  // file order
  const std::string* find(const std::string& key) const;
  std::vector<std::string> all(const std::string& key) const;
};
KeyValueFile read_key_values(const std::filesystem::path& path);

CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path,
                      const CameraIntrinsics& k);

struct SceneInputs {
  RgbImage rgb;
  RealPlane disparity;
  std::vector<BranchInstance> instances;
  CameraIntrinsics intrinsics;
};

// Manifest keys: rgb, disparity, intrinsics, and one
//   mask = <id> <score> <path>
// line per branch.  Relative paths resolve against the manifest directory.
// Dimension mismatches and missing files raise std::runtime_error.
SceneInputs read_manifest(const std::filesystem::path& manifest_path);

// Scene description for the synth subcommand (same key=value format plus
// repeated "branch = ..." lines).
SceneSpec read_scene_spec(const std::filesystem::path& path);

// Writes left.png, disparity.pfm, intrinsics.txt, masks/branch_NN.png,
// gt_depth.pfm and manifest.txt for a generated scene.
void write_scene(const std::filesystem::path& dir, const SyntheticScene& scene);

}  // namespace branchdepth
