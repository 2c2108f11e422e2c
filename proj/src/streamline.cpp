#include "fiberparc/streamline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fiberparc {

bool is_finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

namespace {

double segment_length(const Point3& a, const Point3& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point3 lerp(const Point3& a, const Point3& b, double u) {
  return Point3{a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u, a.z + (b.z - a.z) * u};
}

}  // namespace

double arc_length(const Streamline& s) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    total += segment_length(s.points[i], s.points[i + 1]);
  }
  return total;
}

Streamline resample_uniform(const Streamline& s, int n) {
  if (n < 2) {
    throw std::invalid_argument("resample_uniform: n must be >= 2");
  }
  if (s.points.size() < 2) {
    throw std::invalid_argument("resample_uniform: streamline needs at least 2 points");
  }

  const std::size_t m = s.points.size();
  std::vector<double> cum(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    cum[i + 1] = cum[i] + segment_length(s.points[i], s.points[i + 1]);
  }
  const double total = cum[m - 1];
  if (!(total > 0.0)) {
    throw std::invalid_argument("resample_uniform: zero total arc length");
  }

  Streamline out;
  out.id = s.id;
  out.label = s.label;
  out.points.resize(static_cast<std::size_t>(n));
  out.points.front() = s.points.front();
  out.points.back() = s.points.back();

  std::size_t seg = 0;
  for (int i = 1; i + 1 < n; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 2 < m && cum[seg + 1] < target) {
      ++seg;
    }
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    out.points[static_cast<std::size_t>(i)] = lerp(s.points[seg], s.points[seg + 1], u);
  }
  return out;
}

NormalizationTransform fit_normalization(const std::vector<StreamlineSet>& sets) {
  const double inf = std::numeric_limits<double>::infinity();
  std::array<double, 3> lo{inf, inf, inf};
  std::array<double, 3> hi{-inf, -inf, -inf};
  bool any = false;
  for (const auto& set : sets) {
    for (const auto& s : set.streamlines) {
      for (const auto& p : s.points) {
        lo[0] = std::min(lo[0], p.x);
        lo[1] = std::min(lo[1], p.y);
        lo[2] = std::min(lo[2], p.z);
        hi[0] = std::max(hi[0], p.x);
        hi[1] = std::max(hi[1], p.y);
        hi[2] = std::max(hi[2], p.z);
        any = true;
      }
    }
  }
  if (!any) {
    throw std::invalid_argument("fit_normalization: no points in input");
  }
  NormalizationTransform t;
  for (int a = 0; a < 3; ++a) {
    const double extent = hi[a] - lo[a];
    if (extent > 0.0) {
      t.offset[a] = 0.5 * (hi[a] + lo[a]);
      t.scale[a] = 2.0 / extent;
    } else {
      t.offset[a] = lo[a];
      t.scale[a] = 1.0;
    }
  }
  return t;
}

Point3 apply_normalization(const NormalizationTransform& t, const Point3& p) {
  return Point3{(p.x - t.offset[0]) * t.scale[0], (p.y - t.offset[1]) * t.scale[1],
                (p.z - t.offset[2]) * t.scale[2]};
}

Point3 invert_normalization(const NormalizationTransform& t, const Point3& p) {
  return Point3{p.x / t.scale[0] + t.offset[0], p.y / t.scale[1] + t.offset[1],
                p.z / t.scale[2] + t.offset[2]};
}

Streamline apply_normalization(const NormalizationTransform& t, const Streamline& s) {
  Streamline out;
  out.id = s.id;
  out.label = s.label;
  out.points.reserve(s.points.size());
  for (const auto& p : s.points) {
    out.points.push_back(apply_normalization(t, p));
  }
  return out;
}

Streamline invert_normalization(const NormalizationTransform& t, const Streamline& s) {
  Streamline out;
  out.id = s.id;
  out.label = s.label;
  out.points.reserve(s.points.size());
  for (const auto& p : s.points) {
    out.points.push_back(invert_normalization(t, p));
  }
  return out;
}

}  // namespace fiberparc
