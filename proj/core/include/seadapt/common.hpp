// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace seadapt {

// Runtime failure inside the library (bad data, numeric blow-up, broken
// file). The CLI maps this to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration or usage failure (unknown key, out-of-range value, missing
// required flag). The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

namespace detail {
inline void append_all(std::ostringstream&) {}

template <typename T, typename... Rest>
void append_all(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  append_all(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  detail::append_all(os, args...);
  return os.str();
}

template <typename... Args>
[[noreturn]] void fail(const Args&... args) {
  throw Error(concat(args...));
}

template <typename... Args>
[[noreturn]] void fail_config(const Args&... args) {
  throw ConfigError(concat(args...));
}

template <typename... Args>
void require(bool condition, const Args&... args) {
  if (!condition) fail(args...);
}

}  // namespace seadapt
