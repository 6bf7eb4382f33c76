#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morsefield {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownVariableError : public ParseError {
 public:
  UnknownVariableError(const std::string& name, std::size_t offset)
      : ParseError("unknown variable '" + name + "'", offset), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Evaluation left the domain of an elementary function; carries the printed subterm.
class DomainError : public Error {
 public:
  DomainError(const std::string& message, const std::string& subterm)
      : Error(message + " in '" + subterm + "'"), subterm_(subterm) {}
  const std::string& subterm() const { return subterm_; }

 private:
  std::string subterm_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class GaugeError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

class IntegratorError : public Error {
 public:
  using Error::Error;
};

class FocalPointError : public Error {
 public:
  using Error::Error;
};

class ChartRadiusError : public Error {
 public:
  using Error::Error;
};

class NoIndicesError : public Error {
 public:
  using Error::Error;
};

class UmbilicPointError : public Error {
 public:
  using Error::Error;
};

class ThetaViolationError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class SpdViolationError : public Error {
 public:
  using Error::Error;
};

/// Patch definition file problem, with 1-based line number (0 = whole file).
class PatchFileError : public Error {
 public:
  PatchFileError(const std::string& file, std::size_t line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace morsefield
