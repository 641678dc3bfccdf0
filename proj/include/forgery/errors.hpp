#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace forgery {

// Unreadable or unwritable files, undecodable media.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed structured-text input; carries the 1-based line number (0 if unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Submission does not cover the ground truth exactly.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> missing, std::vector<std::string> extra)
      : std::runtime_error(what), missing_(std::move(missing)), extra_(std::move(extra)) {}
  const std::vector<std::string>& missing() const { return missing_; }
  const std::vector<std::string>& extra() const { return extra_; }

 private:
  std::vector<std::string> missing_;
  std::vector<std::string> extra_;
};

}  // namespace forgery
