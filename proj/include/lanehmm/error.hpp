#ifndef LANEHMM_ERROR_HPP
#define LANEHMM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lanehmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or runtime parameter outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries "path:line: ..." context.
class ParseError : public Error {
 public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : Error(where + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Inputs that are individually valid but inconsistent with each other.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace lanehmm

#endif  // LANEHMM_ERROR_HPP
