#pragma once

namespace shiftconv {

/// Library version, "major.minor.patch".
const char* version() noexcept;

}  // namespace shiftconv
