#include "igno/version.hpp"

namespace igno {

const char* version() { return kVersion; }

}  // namespace igno
