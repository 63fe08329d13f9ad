#pragma once

#include <stdexcept>
#include <string>

namespace kcl {

enum class ErrorKind {
  config,      // invalid parameters or malformed input
  io,          // file system failures
  capability,  // request exceeds a documented size/feature cap
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
  throw Error(ErrorKind::config, msg);
}
[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}
[[noreturn]] inline void throw_capability(const std::string& msg) {
  throw Error(ErrorKind::capability, msg);
}

}  // namespace kcl
