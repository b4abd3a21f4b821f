#pragma once

#include <string>
#include <vector>

namespace tproj {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Shortest round-trip decimal form, so repeated runs give identical bytes.
std::string format_number(double v);

std::string csv_row(const std::vector<double>& values);

/// Prefixes every line of `text` with "# ".
std::string comment_block(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace tproj
