#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vtask {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A structured response or region that cannot be encoded for its task.
class CodecError : public Error {
 public:
  using Error::Error;
};

class LexError : public CodecError {
 public:
  LexError(const std::string& what, std::size_t byte_offset)
      : CodecError(what + " at byte " + std::to_string(byte_offset)), offset_(byte_offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public CodecError {
 public:
  ParseError(const std::string& what, std::size_t item_index)
      : CodecError(what + " at item " + std::to_string(item_index)), item_(item_index) {}
  std::size_t item() const noexcept { return item_; }

 private:
  std::size_t item_;
};

class PromptError : public Error {
 public:
  using Error::Error;
};

class ConlluError : public Error {
 public:
  ConlluError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class MergeError : public Error {
 public:
  using Error::Error;
};

// Record does not conform to the JSONL schema or violates a record invariant.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vtask
