#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nnpipe {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapsError : public Error {
 public:
  using Error::Error;
};

// A link whose two sides have no common caps.
class NegotiationError : public Error {
 public:
  using Error::Error;
};

// Structural problem in a pipeline graph (cycle, dangling ref, bad property).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failure while frames are flowing; carries the element that raised it.
class StreamError : public Error {
 public:
  StreamError(std::string element, const std::string& what)
      : Error(element + ": " + what), element_(std::move(element)) {}
  const std::string& element() const { return element_; }

 private:
  std::string element_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string token,
             const std::string& message)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message +
              (token.empty() ? std::string() : " near '" + token + "'")),
        line_(line),
        column_(column),
        token_(std::move(token)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& token() const { return token_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

// Malformed or inconsistent file contents; offset is the byte position.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& message)
      : Error(message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace nnpipe
