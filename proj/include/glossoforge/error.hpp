#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace glossoforge {

// Base for every domain failure (bad input data). The CLI maps these to exit
// status 1; usage mistakes are reported separately.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::size_t line_;
};

class InputError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "input_error"; }
};

}  // namespace glossoforge
