#pragma once

// Experiment defaults. Each can be overridden by an environment variable
// (ARW_PPW, ARW_MQ, ARW_EPS0, ARW_C0, ARW_THREADS, ARW_CACHE_DIR) and then by
// command-line flags.

#include <cstdlib>
#include <string>

#include "arw/error.hpp"

namespace arw {

struct Config {
  double ppw = 40.0;      // Monte Carlo grid points per wavelength
  std::size_t mq = 0;     // Kac-Rice cells per axis; 0 means 40 ceil(sqrt n)
  double eps0 = 0.1;      // singular-square threshold
  double c0 = 0.25;       // singular-square side is c0 / sqrt n
  int probes = 3;         // probes per square side
  double kr_tolerance = 0.01;
  unsigned threads = 1;   // 0 = all hardware threads
  std::string cache_dir = "cache";
};

namespace detail {

inline const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

inline double env_double(const char* name, double fallback) {
  const char* v = env(name);
  if (!v) return fallback;
  char* end = nullptr;
  const double d = std::strtod(v, &end);
  if (end == v || *end != '\0') throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not a number: " + v);
  return d;
}

inline unsigned long long env_unsigned(const char* name, unsigned long long fallback) {
  const char* v = env(name);
  if (!v) return fallback;
  char* end = nullptr;
  const auto d = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0') throw Error(ErrorCode::InvalidArgument, std::string(name) + " is not an integer: " + v);
  return d;
}

}  // namespace detail

inline Config config_from_env(Config c = {}) {
  c.ppw = detail::env_double("ARW_PPW", c.ppw);
  c.mq = static_cast<std::size_t>(detail::env_unsigned("ARW_MQ", c.mq));
  c.eps0 = detail::env_double("ARW_EPS0", c.eps0);
  c.c0 = detail::env_double("ARW_C0", c.c0);
  c.threads = static_cast<unsigned>(detail::env_unsigned("ARW_THREADS", c.threads));
  if (const char* d = detail::env("ARW_CACHE_DIR")) c.cache_dir = d;
  return c;
}

}  // namespace arw
