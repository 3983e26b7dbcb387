#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tracenet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON or missing/mistyped fields.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Structural invariant violated. `subject` names the offending node or edge.
class ValidationError : public Error {
 public:
  ValidationError(std::string subject, const std::string& what)
      : Error(what + " [" + subject + "]"), subject_(std::move(subject)) {}
  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

class CapTooSmall : public Error {
 public:
  using Error::Error;
};

// Token game reached a marking with tokens but no enabled node.
class DeadlockError : public Error {
 public:
  DeadlockError(std::string marking, const std::string& what)
      : Error(what + " [marking: " + marking + "]"), marking_(std::move(marking)) {}
  const std::string& marking() const noexcept { return marking_; }

 private:
  std::string marking_;
};

// Exit fired while tokens were still in flight (e.g. AND split closed by an XOR join).
class ImproperTermination : public Error {
 public:
  using Error::Error;
};

class UnknownToken : public Error {
 public:
  explicit UnknownToken(const std::string& token)
      : Error("unknown token '" + token + "'"), token_(token) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class EmptyVocab : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class EmptyMap : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class VocabExhausted : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace tracenet
