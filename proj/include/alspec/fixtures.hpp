#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Specification fixtures baked into the library at build time.

namespace alspec {

std::vector<std::string> fixture_names();
std::optional<std::string_view> fixture_text(const std::string& name);

}  // namespace alspec
