#pragma once

#include <string>

#include "fiberparc/gcnn.hpp"

namespace fiberparc {

/// GCM model file format (UTF-8 text, LF line endings):
///   line 1: `GCM 1`
///   line 2: `bundle <name>`
///   line 3: `norm <ox> <oy> <oz> <sx> <sy> <sz>`
///   line 4: `arch <n> <levels> <c1> <c2> <fc> <classes>`
///   then, in this order, one section per parameter tensor:
///     `tensor conv1 <q> <p> <m>`, `tensor conv2 <q> <p> <m>`,
///     `tensor fc_W <out> <in>`, `tensor fc_b <out>`,
///     `tensor out_W <out> <in>`, `tensor out_b <out>`,
///   each followed by its whitespace-separated values at 17 significant
///   digits: spectral tensors in (out channel, in channel, eigen-index)
///   order, dense weights row-major.
/// The coarsening hierarchy is not stored; it is rebuilt deterministically
/// from <n> and <levels> on load.
std::string serialize_model_text(const GcnnModel& model);
void serialize_model(const GcnnModel& model, const std::string& path);

/// origin names the input in error messages (file path or "<memory>").
GcnnModel deserialize_model_text(const std::string& text, const std::string& origin);
GcnnModel deserialize_model(const std::string& path);

}  // namespace fiberparc
