#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pafa {

enum class ErrorKind {
  DuplicateClass,
  UnknownTargetClass,
  DuplicateMember,
  UnknownClass,
  UnknownMember,
  UnknownObject,
  KindMismatch,
  MultiplicityViolation,
  ContainmentCycle,
  SyntaxError,
  ParseError,
  DanglingReference,
  DuplicateName,
  UnknownElement,
  NoFiniteK,
  CutSetExplosion,
  MalformedTable,
  PastCycle,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

// Every recoverable failure in the library is reported as a pafa::Error with
// a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& expected)
      : Error(ErrorKind::SyntaxError,
              "at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(expected) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

}  // namespace pafa
