// include/lexstab/error.hpp
//
// Exception types thrown by the core library. Each carries a coarse kind so
// the C API and the CLI can map it onto a status code / exit code.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexstab {

enum class ErrorKind {
  parse,    // malformed Newick
  data,     // malformed or inconsistent cognate table / cache
  domain,   // precondition of an analysis not met
  io,       // unreadable or unwritable file
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Newick syntax error; `offset` is the 0-based character position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  const std::string& message() const noexcept { return message_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string message_;
  std::size_t offset_;
};

/// Cognate-table error; `line` is 1-based (header is line 1), 0 if not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t line = 0);
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string message_;
  std::size_t line_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace lexstab
