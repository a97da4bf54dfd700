#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

// Number formatting for CSV/JSON outputs. Fixed printf formats keep the
// emitted files byte-identical across reruns.
namespace caa::format {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace caa::format
