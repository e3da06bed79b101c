#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chicle {

// All library errors derive from Error so callers can catch one type at the
// top level and map it to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedBuffer : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidPlan : public Error {
 public:
  using Error::Error;
};

class InvalidTransition : public Error {
 public:
  using Error::Error;
};

class GapNegative : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class ConnectionLost : public Error {
 public:
  using Error::Error;
};

class WorkerFailure : public Error {
 public:
  using Error::Error;
};

class TransferFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace chicle
