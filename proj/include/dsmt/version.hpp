#pragma once

namespace dsmt {

const char* version();

} // namespace dsmt
