#include "fiberparc/streamline_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace fiberparc {

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

struct LineReader {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  bool next(std::string& out) {
    if (pos >= text.size()) {
      return false;
    }
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      out = text.substr(pos);
      pos = text.size();
    } else {
      out = text.substr(pos, nl - pos);
      pos = nl + 1;
    }
    if (!out.empty() && out.back() == '\r') {
      out.pop_back();
    }
    ++line_no;
    return true;
  }
};

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) {
    tokens.push_back(tok);
  }
  return tokens;
}

std::uint64_t parse_u64(const std::string& tok, const std::string& origin, std::size_t line,
                        const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(origin, line, std::string("invalid ") + what + " '" + tok + "'");
  }
  return value;
}

double parse_double(const std::string& tok, const std::string& origin, std::size_t line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end != begin + tok.size() || tok.empty()) {
    fail(origin, line, "invalid number '" + tok + "'");
  }
  if (!std::isfinite(value)) {
    fail(origin, line, "non-finite value '" + tok + "'");
  }
  return value;
}

void format_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

StreamlineSet parse_streamline_text(const std::string& text, const std::string& origin) {
  LineReader reader{text};
  std::string line;

  if (!reader.next(line) || line != "SLT 1") {
    fail(origin, reader.line_no == 0 ? 1 : reader.line_no, "malformed header, expected 'SLT 1'");
  }
  if (!reader.next(line)) {
    fail(origin, reader.line_no + 1, "malformed header, expected 'count <N>'");
  }
  auto count_tokens = split_ws(line);
  if (count_tokens.size() != 2 || count_tokens[0] != "count") {
    fail(origin, reader.line_no, "malformed header, expected 'count <N>'");
  }
  const std::uint64_t declared = parse_u64(count_tokens[1], origin, reader.line_no, "count");

  StreamlineSet set;
  set.source = origin;
  set.streamlines.reserve(declared);
  std::unordered_set<std::uint64_t> seen_ids;

  for (std::uint64_t k = 0; k < declared; ++k) {
    if (!reader.next(line)) {
      fail(origin, reader.line_no + 1, "streamline count mismatch: declared " +
                                           std::to_string(declared) + ", found " +
                                           std::to_string(k));
    }
    auto header = split_ws(line);
    if (header.size() != 4 || header[0] != "streamline") {
      fail(origin, reader.line_no,
           "expected 'streamline <id> <label> <num_points>', got '" + line + "'");
    }
    Streamline s;
    s.id = parse_u64(header[1], origin, reader.line_no, "streamline id");
    if (!seen_ids.insert(s.id).second) {
      fail(origin, reader.line_no, "duplicate id " + std::to_string(s.id));
    }
    s.label = header[2] == "-" ? std::string() : header[2];
    const std::uint64_t num_points = parse_u64(header[3], origin, reader.line_no, "point count");
    if (num_points < 2) {
      fail(origin, reader.line_no, "streamline must have at least 2 points");
    }

    s.points.reserve(num_points);
    for (std::uint64_t p = 0; p < num_points; ++p) {
      if (!reader.next(line)) {
        fail(origin, reader.line_no + 1, "point count mismatch: streamline " +
                                             std::to_string(s.id) + " declared " +
                                             std::to_string(num_points) + " points, found " +
                                             std::to_string(p));
      }
      auto coords = split_ws(line);
      if (coords.size() != 3) {
        fail(origin, reader.line_no, "point count mismatch: expected '<x> <y> <z>', got '" + line + "'");
      }
      s.points.push_back(Point3{parse_double(coords[0], origin, reader.line_no),
                                parse_double(coords[1], origin, reader.line_no),
                                parse_double(coords[2], origin, reader.line_no)});
    }
    set.streamlines.push_back(std::move(s));
  }

  while (reader.next(line)) {
    if (!split_ws(line).empty()) {
      fail(origin, reader.line_no, "streamline count mismatch: content past declared count of " +
                                       std::to_string(declared));
    }
  }
  return set;
}

StreamlineSet parse_streamline_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open streamline file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_streamline_text(buf.str(), path);
}

std::string write_streamline_text(const StreamlineSet& set) {
  std::string out;
  out += "SLT 1\n";
  out += "count " + std::to_string(set.streamlines.size()) + "\n";
  for (const auto& s : set.streamlines) {
    if (s.points.size() < 2) {
      throw std::runtime_error("write_streamline_text: streamline " + std::to_string(s.id) +
                               " has fewer than 2 points");
    }
    for (char c : s.label) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        throw std::runtime_error("write_streamline_text: label '" + s.label +
                                 "' contains whitespace");
      }
    }
    out += "streamline " + std::to_string(s.id) + " " + (s.label.empty() ? "-" : s.label) + " " +
           std::to_string(s.points.size()) + "\n";
    for (const auto& p : s.points) {
      if (!is_finite(p)) {
        throw std::runtime_error("write_streamline_text: non-finite point in streamline " +
                                 std::to_string(s.id));
      }
      format_double(out, p.x);
      out += ' ';
      format_double(out, p.y);
      out += ' ';
      format_double(out, p.z);
      out += '\n';
    }
  }
  return out;
}

void write_streamline_file(const StreamlineSet& set, const std::string& path) {
  const std::string text = write_streamline_text(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

}  // namespace fiberparc
