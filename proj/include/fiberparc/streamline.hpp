#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fiberparc {

/// One 3D point in world coordinates.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

bool is_finite(const Point3& p);

/// An ordered polyline of 3D points representing one fiber trajectory.
/// `label` is the bundle name; an empty string means unlabeled.
/// A valid streamline has at least two points, all finite.
struct Streamline {
  std::uint64_t id = 0;
  std::vector<Point3> points;
  std::string label;
};

struct StreamlineSet {
  std::vector<Streamline> streamlines;
  std::string source;  // file path or generator provenance
};

/// Per-axis affine map taking world coordinates into [-1, 1]:
/// mapped = (v - offset) * scale. Scales are strictly positive.
struct NormalizationTransform {
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  std::array<double, 3> scale{1.0, 1.0, 1.0};
};

/// Total length of the piecewise-linear curve through the points.
double arc_length(const Streamline& s);

/// Resamples the polyline to n points at equal arc-length spacing.
/// The first and last output points equal the original endpoints exactly.
/// Throws std::invalid_argument for n < 2 or zero total arc length.
Streamline resample_uniform(const Streamline& s, int n);

/// Fits the affine transform mapping the axis-aligned bounding box of all
/// points in `sets` onto [-1,1]^3. Axes with zero extent map to 0 with unit
/// scale. Throws std::invalid_argument when there are no points at all.
NormalizationTransform fit_normalization(const std::vector<StreamlineSet>& sets);

Point3 apply_normalization(const NormalizationTransform& t, const Point3& p);
Point3 invert_normalization(const NormalizationTransform& t, const Point3& p);

/// Maps every point; id and label are preserved.
Streamline apply_normalization(const NormalizationTransform& t, const Streamline& s);
Streamline invert_normalization(const NormalizationTransform& t, const Streamline& s);

}  // namespace fiberparc
