#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberparc/streamline.hpp"

namespace fiberparc {

enum class BundleFamily { Helix, Arc, Sine };

BundleFamily bundle_family_from_string(const std::string& name);
std::string to_string(BundleFamily family);

struct BundleSpec {
  std::string name;
  BundleFamily family = BundleFamily::Helix;
  Point3 center;
  double size = 1.0;
  int count = 1;
};

/*
 * Synthetic spec file format (UTF-8 text):
 *
 *   SPEC 1
 *   noise <sigma>
 *   points <m>
 *   bundle <name> <family> <cx> <cy> <cz> <size> <count>
 *   ...
 *
 * Families: helix, arc, sine. The seed is not part of the file; it comes
 * from the caller (CLI --seed flag).
 */
struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::vector<BundleSpec> bundles;
  double noise_sigma = 0.0;
  int points_per_streamline = 2;
};

SyntheticSpec parse_synthetic_spec_text(const std::string& text, const std::string& origin);
SyntheticSpec parse_synthetic_spec_file(const std::string& path);

/// Generates labeled streamlines, deterministically for a given spec.
///
/// Per-streamline shape parameters (radius, phase, extent, plane offset) are
/// drawn sequentially from one generator seeded with spec.seed, then points
/// are exact parametric evaluations plus optional isotropic Gaussian noise.
/// A bundle centered at negative x mirrors its local x displacement, so a
/// pair of bundles at (-cx) and (+cx) are mirror images of each other.
///
/// Families, with t in [0,1] sampled at points_per_streamline values:
///   helix: circle of radius ~0.35*size in x-y around the center axis,
///          z linear over ~[-size/2, size/2], 1.5 turns.
///   arc:   circular segment of radius ~0.8*size in the x-z plane,
///          spanning ~120 degrees, small per-streamline y offset.
///   sine:  one sinusoid period of amplitude ~0.3*size in y, laid out
///          along x over ~2*size, small per-streamline z offset.
StreamlineSet generate_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace fiberparc
