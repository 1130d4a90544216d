#pragma once

#include <string_view>

namespace gbsplit {

/// git-describe style build identifier, fixed at configure time.
std::string_view version_string() noexcept;

}  // namespace gbsplit
