#include "shiftconv/version.hpp"

#ifndef SHIFTCONV_VERSION
#define SHIFTCONV_VERSION "0.0.0"
#endif

namespace shiftconv {

const char* version() noexcept { return SHIFTCONV_VERSION; }

}  // namespace shiftconv
