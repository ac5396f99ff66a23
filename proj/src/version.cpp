#include "dsmt/version.hpp"

namespace dsmt {

const char* version() { return "0.1.0"; }

} // namespace dsmt
