#pragma once

#include <string>

#include "fiberparc/streamline.hpp"

namespace fiberparc {

/*
 * SLT streamline file format (UTF-8, LF line endings):
 *
 *   line 1: SLT 1
 *   line 2: count <N>
 *   then per streamline:
 *     streamline <id> <label-or-minus> <num_points>
 *     <x> <y> <z>          (num_points lines, decimal or scientific notation)
 *
 * A label of "-" means unlabeled. Writers emit 17 significant digits, so a
 * write/parse round trip reproduces every coordinate exactly.
 */

/// Parses an SLT file. Errors (malformed header, streamline count mismatch,
/// point-count mismatch, non-finite value, duplicate id) are reported as
/// std::runtime_error with the offending line number.
StreamlineSet parse_streamline_file(const std::string& path);

/// Parses SLT content from memory; `origin` names the source in error messages.
StreamlineSet parse_streamline_text(const std::string& text, const std::string& origin);

/// Writes the set in SLT format. Output bytes are deterministic for
/// identical input. Throws std::runtime_error on an unwritable path.
void write_streamline_file(const StreamlineSet& set, const std::string& path);

std::string write_streamline_text(const StreamlineSet& set);

}  // namespace fiberparc
