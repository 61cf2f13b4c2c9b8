#pragma once

#include <string>

namespace aplab {

/// printf %.*g with the given number of significant digits. All serialized
/// numbers go through here so output bytes are reproducible.
std::string fmt_g(double v, int significant);

}  // namespace aplab
