#pragma once

#include <string_view>

namespace amgan {

std::string_view version() noexcept;

}  // namespace amgan
