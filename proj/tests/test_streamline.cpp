#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fiberparc/streamline.hpp"
#include "fiberparc/streamline_io.hpp"
#include "fiberparc/synthetic.hpp"

using namespace fiberparc;

namespace {

Streamline make_line(std::uint64_t id, std::vector<Point3> pts, std::string label = "") {
  Streamline s;
  s.id = id;
  s.points = std::move(pts);
  s.label = std::move(label);
  return s;
}

Streamline random_polyline(std::mt19937_64& rng, std::uint64_t id, int n) {
  std::uniform_real_distribution<double> step(-1.0, 1.0);
  Streamline s;
  s.id = id;
  Point3 p{10.0 * step(rng), 10.0 * step(rng), 10.0 * step(rng)};
  for (int i = 0; i < n; ++i) {
    s.points.push_back(p);
    p.x += step(rng);
    p.y += step(rng);
    p.z += step(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("resampling a 2-point segment to 3 points places the midpoint") {
  const Streamline s = make_line(0, {{0, 0, 0}, {1, 0, 0}});
  const Streamline r = resample_uniform(s, 3);
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[1].x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.points[1].y == 0.0);
  CHECK(r.points[1].z == 0.0);
}

TEST_CASE("resampling an already-uniform straight segment is the identity") {
  Streamline s = make_line(1, {});
  for (int i = 0; i < 5; ++i) {
    s.points.push_back({0.25 * i, 0.5 * i, -0.125 * i});
  }
  const Streamline r = resample_uniform(s, 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(r.points[i].x - s.points[i].x) <= 1e-12);
    CHECK(std::abs(r.points[i].y - s.points[i].y) <= 1e-12);
    CHECK(std::abs(r.points[i].z - s.points[i].z) <= 1e-12);
  }
}

namespace {

// Independent oracle: the point at arc-length position `target` along the
// polyline, by prefix sums over segments.
Point3 point_at_arc(const Streamline& s, double target) {
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    const Point3& a = s.points[i];
    const Point3& b = s.points[i + 1];
    const double seg = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) +
                                 (b.z - a.z) * (b.z - a.z));
    if (walked + seg >= target || i + 2 == s.points.size()) {
      const double t = seg > 0.0 ? std::min(1.0, std::max(0.0, (target - walked) / seg)) : 0.0;
      return Point3{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
    }
    walked += seg;
  }
  return s.points.back();
}

}  // namespace

TEST_CASE("resampled points sit at equal arc-length positions along the input") {
  std::mt19937_64 rng(42);
  const Streamline s = random_polyline(rng, 2, 37);
  const Streamline r = resample_uniform(s, 100);
  REQUIRE(r.points.size() == 100);

  const double total = arc_length(s);
  for (int i = 0; i < 100; ++i) {
    const Point3 expect = point_at_arc(s, total * i / 99.0);
    CHECK(std::abs(r.points[i].x - expect.x) <= 1e-9 * std::max(1.0, std::abs(expect.x)));
    CHECK(std::abs(r.points[i].y - expect.y) <= 1e-9 * std::max(1.0, std::abs(expect.y)));
    CHECK(std::abs(r.points[i].z - expect.z) <= 1e-9 * std::max(1.0, std::abs(expect.z)));
  }
}

TEST_CASE("resampling preserves endpoints bit-exactly") {
  std::mt19937_64 rng(7);
  const Streamline s = random_polyline(rng, 3, 21);
  const Streamline r1 = resample_uniform(s, 50);
  CHECK(r1.points.front().x == s.points.front().x);
  CHECK(r1.points.front().y == s.points.front().y);
  CHECK(r1.points.front().z == s.points.front().z);
  CHECK(r1.points.back().x == s.points.back().x);
  CHECK(r1.points.back().y == s.points.back().y);
  CHECK(r1.points.back().z == s.points.back().z);
}

TEST_CASE("resampling already-uniform input is idempotent") {
  // Equal chord lengths: vertices of a circular arc at equal angle steps.
  Streamline s = make_line(9, {});
  for (int i = 0; i < 50; ++i) {
    const double a = 0.04 * i;
    s.points.push_back({3.0 * std::cos(a), 3.0 * std::sin(a), 0.1 * i});
  }
  const Streamline r1 = resample_uniform(s, 50);
  const Streamline r2 = resample_uniform(r1, 50);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(std::abs(r1.points[i].x - s.points[i].x) <= 1e-9);
    CHECK(std::abs(r2.points[i].x - r1.points[i].x) <= 1e-9);
    CHECK(std::abs(r2.points[i].y - r1.points[i].y) <= 1e-9);
    CHECK(std::abs(r2.points[i].z - r1.points[i].z) <= 1e-9);
  }
}

TEST_CASE("resampling rejects degenerate input") {
  CHECK_THROWS_AS(resample_uniform(make_line(0, {{0, 0, 0}, {1, 0, 0}}), 1), std::invalid_argument);
  CHECK_THROWS_AS(resample_uniform(make_line(0, {{1, 2, 3}}), 5), std::invalid_argument);
  CHECK_THROWS_AS(resample_uniform(make_line(0, {{1, 2, 3}, {1, 2, 3}}), 5), std::invalid_argument);
}

TEST_CASE("normalization maps the bounding box onto the unit cube") {
  StreamlineSet set;
  set.streamlines.push_back(make_line(0, {{0, 0, 0}, {2, 2, 2}}));
  const NormalizationTransform t = fit_normalization({set});
  CHECK(t.offset[0] == doctest::Approx(1.0));
  CHECK(t.scale[0] == doctest::Approx(1.0));
  const Point3 hi = apply_normalization(t, Point3{2, 2, 2});
  CHECK(hi.x == doctest::Approx(1.0));
  CHECK(hi.y == doctest::Approx(1.0));
  CHECK(hi.z == doctest::Approx(1.0));
  const Point3 lo = apply_normalization(t, Point3{0, 0, 0});
  CHECK(lo.x == doctest::Approx(-1.0));
}

TEST_CASE("normalizing a degenerate extent maps the point to the origin") {
  StreamlineSet set;
  set.streamlines.push_back(make_line(0, {{5, 5, 5}, {5, 5, 5}}));
  const NormalizationTransform t = fit_normalization({set});
  const Point3 p = apply_normalization(t, Point3{5, 5, 5});
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 0.0);
}

TEST_CASE("fitted normalization keeps every point inside the unit cube") {
  std::mt19937_64 rng(11);
  StreamlineSet set;
  for (int i = 0; i < 10; ++i) {
    set.streamlines.push_back(random_polyline(rng, static_cast<std::uint64_t>(i), 15));
  }
  const NormalizationTransform t = fit_normalization({set});
  for (const auto& s : set.streamlines) {
    const Streamline n = apply_normalization(t, s);
    for (const auto& p : n.points) {
      CHECK(p.x >= -1.0 - 1e-12);
      CHECK(p.x <= 1.0 + 1e-12);
      CHECK(p.y >= -1.0 - 1e-12);
      CHECK(p.y <= 1.0 + 1e-12);
      CHECK(p.z >= -1.0 - 1e-12);
      CHECK(p.z <= 1.0 + 1e-12);
    }
    const Streamline back = invert_normalization(t, n);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      CHECK(std::abs(back.points[i].x - s.points[i].x) <=
            1e-12 * std::max(1.0, std::abs(s.points[i].x)));
      CHECK(std::abs(back.points[i].y - s.points[i].y) <=
            1e-12 * std::max(1.0, std::abs(s.points[i].y)));
      CHECK(std::abs(back.points[i].z - s.points[i].z) <=
            1e-12 * std::max(1.0, std::abs(s.points[i].z)));
    }
  }
}

TEST_CASE("a minimal streamline file parses") {
  const std::string text = "SLT 1\ncount 1\nstreamline 7 cst_left 2\n0 0 0\n1 0 0\n";
  const StreamlineSet set = parse_streamline_text(text, "<memory>");
  REQUIRE(set.streamlines.size() == 1);
  CHECK(set.streamlines[0].id == 7);
  CHECK(set.streamlines[0].label == "cst_left");
  REQUIRE(set.streamlines[0].points.size() == 2);
  CHECK(set.streamlines[0].points[1].x == 1.0);
}

TEST_CASE("parser reports malformed input with line numbers") {
  CHECK_THROWS_WITH_AS(parse_streamline_text("SLT 2\n", "f"),
                       doctest::Contains("malformed header"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_streamline_text("SLT 1\ncount 2\nstreamline 0 - 2\n0 0 0\n1 1 1\n", "f"),
      doctest::Contains("streamline count mismatch"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_streamline_text("SLT 1\ncount 1\nstreamline 0 - 2\n0 0 0\n1 1 1\nextra\n", "f"),
      doctest::Contains("streamline count mismatch"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_streamline_text("SLT 1\ncount 1\nstreamline 0 - 3\n0 0 0\n1 1 1\n", "f"),
                       doctest::Contains("point count mismatch"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      parse_streamline_text(
          "SLT 1\ncount 2\nstreamline 0 - 2\n0 0 0\n1 1 1\nstreamline 0 - 2\n0 0 0\n1 1 1\n", "f"),
      doctest::Contains("duplicate id"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_streamline_text("SLT 1\ncount 1\nstreamline 0 - 2\n0 0 nan\n1 1 1\n", "f"),
                       doctest::Contains("non-finite"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_streamline_text("SLT 1\ncount 1\nstreamline 0 - 2\n0 0 x\n1 1 1\n", "f"),
                       doctest::Contains("invalid number"), std::runtime_error);
}

TEST_CASE("an empty set writes a header-only file") {
  StreamlineSet set;
  CHECK(write_streamline_text(set) == "SLT 1\ncount 0\n");
}

TEST_CASE("streamline files round-trip exactly") {
  std::mt19937_64 rng(1234);
  StreamlineSet set;
  set.source = "test";
  for (int i = 0; i < 8; ++i) {
    Streamline s = random_polyline(rng, static_cast<std::uint64_t>(i * 3), 12);
    s.label = i % 3 == 0 ? std::string() : "bundle_" + std::to_string(i % 3);
    set.streamlines.push_back(std::move(s));
  }
  const std::string text = write_streamline_text(set);
  CHECK(write_streamline_text(set) == text);  // deterministic bytes

  const StreamlineSet back = parse_streamline_text(text, "<memory>");
  REQUIRE(back.streamlines.size() == set.streamlines.size());
  for (std::size_t i = 0; i < set.streamlines.size(); ++i) {
    CHECK(back.streamlines[i].id == set.streamlines[i].id);
    CHECK(back.streamlines[i].label == set.streamlines[i].label);
    REQUIRE(back.streamlines[i].points.size() == set.streamlines[i].points.size());
    for (std::size_t p = 0; p < set.streamlines[i].points.size(); ++p) {
      CHECK(back.streamlines[i].points[p].x == set.streamlines[i].points[p].x);
      CHECK(back.streamlines[i].points[p].y == set.streamlines[i].points[p].y);
      CHECK(back.streamlines[i].points[p].z == set.streamlines[i].points[p].z);
    }
  }
}

TEST_CASE("synthetic generation is a pure function of its spec") {
  SyntheticSpec spec;
  spec.seed = 99;
  spec.noise_sigma = 0.1;
  spec.points_per_streamline = 25;
  spec.bundles = {{"a", BundleFamily::Helix, {0, 0, 0}, 3.0, 10},
                  {"b", BundleFamily::Arc, {8, 0, 0}, 2.0, 10},
                  {"c", BundleFamily::Sine, {-8, 0, 0}, 2.0, 10},
                  {"d", BundleFamily::Arc, {-16, 0, 0}, 2.0, 10}};
  const StreamlineSet s1 = generate_synthetic_dataset(spec);
  const StreamlineSet s2 = generate_synthetic_dataset(spec);
  CHECK(write_streamline_text(s1) == write_streamline_text(s2));
  CHECK(s1.streamlines.size() == 40);

  int labels_seen = 0;
  std::string last;
  for (const auto& s : s1.streamlines) {
    if (s.label != last) {
      ++labels_seen;
      last = s.label;
    }
  }
  CHECK(labels_seen == 4);
}

TEST_CASE("a noiseless helix lies on a circular cylinder with linear height") {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.noise_sigma = 0.0;
  spec.points_per_streamline = 64;
  spec.bundles = {{"h", BundleFamily::Helix, {2.0, -1.0, 3.0}, 4.0, 1}};
  const StreamlineSet set = generate_synthetic_dataset(spec);
  REQUIRE(set.streamlines.size() == 1);
  const auto& pts = set.streamlines[0].points;

  const double r0 = std::hypot(pts[0].x - 2.0, pts[0].y + 1.0);
  CHECK(r0 >= 0.35 * 4.0 * 0.85 - 1e-9);
  CHECK(r0 <= 0.35 * 4.0 * 1.15 + 1e-9);
  for (const auto& p : pts) {
    CHECK(std::hypot(p.x - 2.0, p.y + 1.0) == doctest::Approx(r0).epsilon(1e-9));
  }
  // Height is linear in the parameter: constant increments.
  const double dz = pts[1].z - pts[0].z;
  CHECK(dz > 0.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    CHECK(pts[i + 1].z - pts[i].z == doctest::Approx(dz).epsilon(1e-9));
  }
}

TEST_CASE("a noiseless arc is planar and equidistant from its center") {
  SyntheticSpec spec;
  spec.seed = 17;
  spec.noise_sigma = 0.0;
  spec.points_per_streamline = 40;
  spec.bundles = {{"a", BundleFamily::Arc, {-6.0, 0.5, 1.0}, 3.0, 1}};
  const auto pts = generate_synthetic_dataset(spec).streamlines[0].points;
  const double y0 = pts[0].y;
  const double r0 = std::hypot(pts[0].x + 6.0, pts[0].z - 1.0);
  for (const auto& p : pts) {
    CHECK(p.y == doctest::Approx(y0).epsilon(1e-12));
    CHECK(std::hypot(p.x + 6.0, p.z - 1.0) == doctest::Approx(r0).epsilon(1e-9));
  }
}

TEST_CASE("a noiseless sine runs along x at constant z") {
  SyntheticSpec spec;
  spec.seed = 23;
  spec.noise_sigma = 0.0;
  spec.points_per_streamline = 40;
  spec.bundles = {{"s", BundleFamily::Sine, {4.0, 0.0, -2.0}, 2.0, 1}};
  const auto pts = generate_synthetic_dataset(spec).streamlines[0].points;
  const double dx = pts[1].x - pts[0].x;
  const double z0 = pts[0].z;
  CHECK(dx != 0.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    CHECK(pts[i + 1].x - pts[i].x == doctest::Approx(dx).epsilon(1e-9));
    CHECK(pts[i].z == doctest::Approx(z0).epsilon(1e-12));
  }
}

TEST_CASE("spec files parse and reject unknown content") {
  const std::string good =
      "SPEC 1\nnoise 0.25\npoints 50\nbundle left arc -5 0 0 3 20\nbundle right arc 5 0 0 3 20\n";
  const SyntheticSpec spec = parse_synthetic_spec_text(good, "<memory>");
  CHECK(spec.noise_sigma == 0.25);
  CHECK(spec.points_per_streamline == 50);
  REQUIRE(spec.bundles.size() == 2);
  CHECK(spec.bundles[0].name == "left");
  CHECK(spec.bundles[1].center.x == 5.0);

  CHECK_THROWS_AS(parse_synthetic_spec_text("SPEC 2\n", "f"), std::runtime_error);
  CHECK_THROWS_AS(parse_synthetic_spec_text("SPEC 1\nbogus 1\n", "f"), std::runtime_error);
  CHECK_THROWS_AS(parse_synthetic_spec_text("SPEC 1\nbundle a arc 0 0 0\n", "f"),
                  std::runtime_error);

  // Semantic validation happens at generation time.
  const SyntheticSpec zero_count =
      parse_synthetic_spec_text("SPEC 1\nnoise 0\npoints 5\nbundle a arc 0 0 0 3 0\n", "f");
  CHECK_THROWS_AS(generate_synthetic_dataset(zero_count), std::invalid_argument);
}
