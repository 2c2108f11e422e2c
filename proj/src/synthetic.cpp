#include "fiberparc/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace fiberparc {

BundleFamily bundle_family_from_string(const std::string& name) {
  if (name == "helix") return BundleFamily::Helix;
  if (name == "arc") return BundleFamily::Arc;
  if (name == "sine") return BundleFamily::Sine;
  throw std::invalid_argument("unknown bundle family '" + name + "'");
}

std::string to_string(BundleFamily family) {
  switch (family) {
    case BundleFamily::Helix: return "helix";
    case BundleFamily::Arc: return "arc";
    case BundleFamily::Sine: return "sine";
  }
  throw std::logic_error("invalid BundleFamily");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const SyntheticSpec& spec) {
  if (spec.bundles.empty()) {
    throw std::invalid_argument("synthetic spec has no bundles");
  }
  if (!(spec.noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigma must be >= 0");
  }
  if (spec.points_per_streamline < 2) {
    throw std::invalid_argument("points per streamline must be >= 2");
  }
  std::unordered_set<std::string> names;
  for (const auto& b : spec.bundles) {
    if (b.name.empty() || !names.insert(b.name).second) {
      throw std::invalid_argument("bundle names must be unique and non-empty");
    }
    if (b.count < 1) {
      throw std::invalid_argument("bundle '" + b.name + "' needs count >= 1");
    }
    if (!(b.size > 0.0)) {
      throw std::invalid_argument("bundle '" + b.name + "' needs size > 0");
    }
    if (!is_finite(b.center)) {
      throw std::invalid_argument("bundle '" + b.name + "' has non-finite center");
    }
  }
}

Streamline make_streamline(const BundleSpec& bundle, int num_points, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const double sgn = bundle.center.x < 0.0 ? -1.0 : 1.0;
  Streamline s;
  s.label = bundle.name;
  s.points.resize(static_cast<std::size_t>(num_points));

  switch (bundle.family) {
    case BundleFamily::Helix: {
      const double radius = 0.35 * bundle.size * uniform(0.85, 1.15);
      const double phase = uniform(0.0, kTwoPi);
      const double height = bundle.size * uniform(0.9, 1.1);
      for (int i = 0; i < num_points; ++i) {
        const double t = static_cast<double>(i) / (num_points - 1);
        const double theta = phase + 1.5 * kTwoPi * t;
        s.points[i] = Point3{bundle.center.x + sgn * radius * std::cos(theta),
                             bundle.center.y + radius * std::sin(theta),
                             bundle.center.z + height * (t - 0.5)};
      }
      break;
    }
    case BundleFamily::Arc: {
      const double radius = 0.8 * bundle.size * uniform(0.9, 1.1);
      const double start = uniform(0.0, kTwoPi / 12.0);
      const double span = (kTwoPi / 3.0) * uniform(0.9, 1.1);
      const double y_off = 0.1 * bundle.size * uniform(-1.0, 1.0);
      for (int i = 0; i < num_points; ++i) {
        const double t = static_cast<double>(i) / (num_points - 1);
        const double alpha = start + span * t;
        s.points[i] = Point3{bundle.center.x + sgn * radius * std::cos(alpha),
                             bundle.center.y + y_off,
                             bundle.center.z + radius * std::sin(alpha)};
      }
      break;
    }
    case BundleFamily::Sine: {
      const double length = 2.0 * bundle.size * uniform(0.9, 1.1);
      const double amplitude = 0.3 * bundle.size * uniform(0.8, 1.2);
      const double phase = uniform(0.0, kTwoPi);
      const double z_off = 0.1 * bundle.size * uniform(-1.0, 1.0);
      for (int i = 0; i < num_points; ++i) {
        const double t = static_cast<double>(i) / (num_points - 1);
        s.points[i] = Point3{bundle.center.x + sgn * length * (t - 0.5),
                             bundle.center.y + amplitude * std::sin(kTwoPi * t + phase),
                             bundle.center.z + z_off};
      }
      break;
    }
  }
  return s;
}

}  // namespace

StreamlineSet generate_synthetic_dataset(const SyntheticSpec& spec) {
  validate(spec);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  StreamlineSet set;
  set.source = "synthetic:seed=" + std::to_string(spec.seed);
  std::uint64_t next_id = 0;
  for (const auto& bundle : spec.bundles) {
    for (int j = 0; j < bundle.count; ++j) {
      Streamline s = make_streamline(bundle, spec.points_per_streamline, rng);
      s.id = next_id++;
      if (spec.noise_sigma > 0.0) {
        for (auto& p : s.points) {
          p.x += gauss(rng);
          p.y += gauss(rng);
          p.z += gauss(rng);
        }
      }
      set.streamlines.push_back(std::move(s));
    }
  }
  return set;
}

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_num(const std::string& tok, const std::string& origin, std::size_t line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (tok.empty() || end != begin + tok.size() || !std::isfinite(v)) {
    fail(origin, line, "invalid number '" + tok + "'");
  }
  return v;
}

}  // namespace

SyntheticSpec parse_synthetic_spec_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    fail(origin, 1, "empty spec file");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "SPEC 1") {
    fail(origin, line_no, "malformed header, expected 'SPEC 1'");
  }

  SyntheticSpec spec;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) {
      continue;  // blank line
    }
    if (keyword == "noise") {
      std::string tok;
      if (!(ls >> tok)) fail(origin, line_no, "expected 'noise <sigma>'");
      spec.noise_sigma = parse_num(tok, origin, line_no);
    } else if (keyword == "points") {
      std::string tok;
      if (!(ls >> tok)) fail(origin, line_no, "expected 'points <m>'");
      spec.points_per_streamline = static_cast<int>(parse_num(tok, origin, line_no));
    } else if (keyword == "bundle") {
      BundleSpec b;
      std::string family, cx, cy, cz, size, count;
      if (!(ls >> b.name >> family >> cx >> cy >> cz >> size >> count)) {
        fail(origin, line_no, "expected 'bundle <name> <family> <cx> <cy> <cz> <size> <count>'");
      }
      try {
        b.family = bundle_family_from_string(family);
      } catch (const std::invalid_argument& e) {
        fail(origin, line_no, e.what());
      }
      b.center = Point3{parse_num(cx, origin, line_no), parse_num(cy, origin, line_no),
                        parse_num(cz, origin, line_no)};
      b.size = parse_num(size, origin, line_no);
      b.count = static_cast<int>(parse_num(count, origin, line_no));
      spec.bundles.push_back(std::move(b));
    } else {
      fail(origin, line_no, "unknown spec keyword '" + keyword + "'");
    }
  }
  return spec;
}

SyntheticSpec parse_synthetic_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open spec file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_synthetic_spec_text(buf.str(), path);
}

}  // namespace fiberparc
