#ifndef GEOCONNECT_LOG_HPP
#define GEOCONNECT_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <string>

namespace geoconnect {

// GEO_LOG=info or GEO_LOG=debug enables progress output on stderr.
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("GEO_LOG");
    if (!env) return 0;
    const std::string s = env;
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_line(int level, const std::string& msg) {
  if (log_level() >= level) std::fprintf(stderr, "[geoconnect] %s\n", msg.c_str());
}

}  // namespace geoconnect

#endif  // GEOCONNECT_LOG_HPP
