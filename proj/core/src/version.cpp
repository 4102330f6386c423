#include "amgan/version.hpp"

namespace amgan {

std::string_view version() noexcept { return AMGAN_VERSION; }

}  // namespace amgan
