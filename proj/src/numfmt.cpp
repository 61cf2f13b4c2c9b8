#include "aplab/numfmt.hpp"

#include <cstdio>

namespace aplab {

std::string fmt_g(double v, int significant) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
  return buf;
}

}  // namespace aplab
