#pragma once

#include <stdexcept>
#include <string>

namespace nh {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class NonConvergence : public std::runtime_error {
public:
  explicit NonConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

class LinearSolveFailure : public std::runtime_error {
public:
  explicit LinearSolveFailure(const std::string& msg) : std::runtime_error(msg) {}
};

class AssemblyError : public std::runtime_error {
public:
  explicit AssemblyError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace nh
