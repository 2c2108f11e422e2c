#include "fiberparc/model_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fiberparc/path_graph.hpp"

namespace fiberparc {

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

/// Whitespace tokenizer that tracks line numbers for error reporting.
struct TokenReader {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t line_no = 1;

  bool next(std::string& out) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])) != 0) {
      if (text[pos] == '\n') ++line_no;
      ++pos;
    }
    if (pos >= text.size()) return false;
    const std::size_t start = pos;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])) == 0) {
      ++pos;
    }
    out = text.substr(start, pos - start);
    return true;
  }
};

std::string expect_token(TokenReader& r, const std::string& origin) {
  std::string tok;
  if (!r.next(tok)) {
    fail(origin, r.line_no, "unexpected end of file (truncated model)");
  }
  return tok;
}

long expect_int(TokenReader& r, const std::string& origin, const char* what) {
  const std::string tok = expect_token(r, origin);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(origin, r.line_no, std::string("invalid ") + what + " '" + tok + "'");
  }
}

double expect_double(TokenReader& r, const std::string& origin) {
  const std::string tok = expect_token(r, origin);
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) {
    fail(origin, r.line_no, "invalid number '" + tok + "'");
  }
  if (!std::isfinite(v)) {
    fail(origin, r.line_no, "non-finite value '" + tok + "'");
  }
  return v;
}

void expect_tensor_header(TokenReader& r, const std::string& origin, const std::string& name,
                          const std::vector<long>& dims) {
  std::string tok = expect_token(r, origin);
  if (tok != "tensor") {
    fail(origin, r.line_no, "expected 'tensor', got '" + tok + "'");
  }
  tok = expect_token(r, origin);
  if (tok != name) {
    fail(origin, r.line_no, "expected tensor '" + name + "', got '" + tok + "'");
  }
  for (const long want : dims) {
    const long got = expect_int(r, origin, "tensor dimension");
    if (got != want) {
      fail(origin, r.line_no,
           "dimension inconsistency for tensor " + name + ": expected " + std::to_string(want) +
               ", got " + std::to_string(got));
    }
  }
}

void append_double(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_values(std::string& out, const double* values, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    append_double(out, values[i]);
    out += (i % 6 == 5 || i + 1 == count) ? '\n' : ' ';
  }
}

}  // namespace

std::string serialize_model_text(const GcnnModel& model) {
  for (char c : model.bundle) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      throw std::runtime_error("serialize_model: bundle name '" + model.bundle +
                               "' contains whitespace");
    }
  }
  std::string out;
  out += "GCM 1\n";
  out += "bundle " + model.bundle + "\n";
  out += "norm";
  for (int a = 0; a < 3; ++a) {
    out += ' ';
    append_double(out, model.normalization.offset[static_cast<std::size_t>(a)]);
  }
  for (int a = 0; a < 3; ++a) {
    out += ' ';
    append_double(out, model.normalization.scale[static_cast<std::size_t>(a)]);
  }
  out += '\n';
  const GcnnArchitecture& arch = model.arch;
  out += "arch " + std::to_string(arch.points) + " " + std::to_string(arch.levels) + " " +
         std::to_string(arch.conv1_channels) + " " + std::to_string(arch.conv2_channels) + " " +
         std::to_string(arch.fc_size) + " " + std::to_string(arch.num_classes) + "\n";

  const auto conv_section = [&out](const char* name, const SpectralConvParams& prm) {
    out += std::string("tensor ") + name + " " + std::to_string(prm.out_channels) + " " +
           std::to_string(prm.in_channels) + " " + std::to_string(prm.num_nodes) + "\n";
    const std::size_t count = prm.parameter_count();
    std::vector<double> flat(count);
    for (std::size_t f = 0; f < count; ++f) flat[f] = prm.coeff(f);
    append_values(out, flat.data(), count);
  };
  const auto matrix_section = [&out](const char* name, const Eigen::MatrixXd& W) {
    out += std::string("tensor ") + name + " " + std::to_string(W.rows()) + " " +
           std::to_string(W.cols()) + "\n";
    std::vector<double> flat(static_cast<std::size_t>(W.size()));
    std::size_t f = 0;
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat[f++] = W(r, c);
    }
    append_values(out, flat.data(), flat.size());
  };
  const auto vector_section = [&out](const char* name, const Eigen::VectorXd& b) {
    out += std::string("tensor ") + name + " " + std::to_string(b.size()) + "\n";
    append_values(out, b.data(), static_cast<std::size_t>(b.size()));
  };

  conv_section("conv1", model.conv1);
  conv_section("conv2", model.conv2);
  matrix_section("fc_W", model.fc.W);
  vector_section("fc_b", model.fc.b);
  matrix_section("out_W", model.out.W);
  vector_section("out_b", model.out.b);
  return out;
}

void serialize_model(const GcnnModel& model, const std::string& path) {
  const std::string text = serialize_model_text(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

GcnnModel deserialize_model_text(const std::string& text, const std::string& origin) {
  TokenReader r{text};

  std::string tok = expect_token(r, origin);
  if (tok != "GCM") {
    fail(origin, r.line_no, "malformed header, expected 'GCM 1'");
  }
  tok = expect_token(r, origin);
  if (tok != "1") {
    fail(origin, r.line_no, "version mismatch: expected GCM 1, got GCM " + tok);
  }

  tok = expect_token(r, origin);
  if (tok != "bundle") fail(origin, r.line_no, "expected 'bundle <name>'");
  const std::string bundle = expect_token(r, origin);

  tok = expect_token(r, origin);
  if (tok != "norm") fail(origin, r.line_no, "expected 'norm <6 floats>'");
  NormalizationTransform norm;
  for (int a = 0; a < 3; ++a) norm.offset[static_cast<std::size_t>(a)] = expect_double(r, origin);
  for (int a = 0; a < 3; ++a) {
    norm.scale[static_cast<std::size_t>(a)] = expect_double(r, origin);
    if (!(norm.scale[static_cast<std::size_t>(a)] > 0.0)) {
      fail(origin, r.line_no, "normalization scale must be positive");
    }
  }

  tok = expect_token(r, origin);
  if (tok != "arch") fail(origin, r.line_no, "expected 'arch <n> <levels> <c1> <c2> <fc> <classes>'");
  GcnnArchitecture arch;
  arch.points = static_cast<int>(expect_int(r, origin, "point count"));
  arch.levels = static_cast<int>(expect_int(r, origin, "level count"));
  arch.conv1_channels = static_cast<int>(expect_int(r, origin, "channel count"));
  arch.conv2_channels = static_cast<int>(expect_int(r, origin, "channel count"));
  arch.fc_size = static_cast<int>(expect_int(r, origin, "hidden size"));
  arch.num_classes = static_cast<int>(expect_int(r, origin, "class count"));
  if (arch.points < 2 || arch.levels < 3 || arch.conv1_channels < 1 || arch.conv2_channels < 1 ||
      arch.fc_size < 1 || arch.num_classes < 2) {
    fail(origin, r.line_no, "dimension inconsistency in arch line");
  }

  GcnnModel model = init_model(graclus_coarsen(build_path_graph(arch.points), arch.levels), 0,
                               norm, bundle, arch);
  const long k0 = model.hierarchy.levels[0].graph.num_nodes;
  const long k1 = model.hierarchy.levels[1].graph.num_nodes;

  expect_tensor_header(r, origin, "conv1", {arch.conv1_channels, 3, k0});
  for (std::size_t f = 0; f < model.conv1.parameter_count(); ++f) {
    model.conv1.coeff(f) = expect_double(r, origin);
  }
  expect_tensor_header(r, origin, "conv2", {arch.conv2_channels, arch.conv1_channels, k1});
  for (std::size_t f = 0; f < model.conv2.parameter_count(); ++f) {
    model.conv2.coeff(f) = expect_double(r, origin);
  }

  const auto read_matrix = [&](const char* name, Eigen::MatrixXd& W) {
    expect_tensor_header(r, origin, name, {W.rows(), W.cols()});
    for (Eigen::Index row = 0; row < W.rows(); ++row) {
      for (Eigen::Index col = 0; col < W.cols(); ++col) W(row, col) = expect_double(r, origin);
    }
  };
  const auto read_vector = [&](const char* name, Eigen::VectorXd& b) {
    expect_tensor_header(r, origin, name, {b.size()});
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = expect_double(r, origin);
  };
  read_matrix("fc_W", model.fc.W);
  read_vector("fc_b", model.fc.b);
  read_matrix("out_W", model.out.W);
  read_vector("out_b", model.out.b);

  if (r.next(tok)) {
    fail(origin, r.line_no, "trailing content after last tensor");
  }
  return model;
}

GcnnModel deserialize_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model_text(buf.str(), path);
}

}  // namespace fiberparc
