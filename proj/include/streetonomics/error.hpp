#pragma once

#include <stdexcept>
#include <string>

namespace streetonomics {

// Exit codes of the command-line tool map one-to-one onto these categories.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, network = 3 };

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

private:
  ExitCode code_;
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(ExitCode::usage, what) {}
};

/// Malformed or inconsistent input data (schema mismatch, bad geometry, ...).
class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ExitCode::data, what) {}
};

class NetworkError : public Error {
public:
  explicit NetworkError(const std::string& what) : Error(ExitCode::network, what) {}
};

}  // namespace streetonomics
