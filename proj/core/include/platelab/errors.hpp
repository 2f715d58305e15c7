#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace platelab {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A named parameter (or config field) violates its precondition.
class InvalidParameter : public Error {
public:
  InvalidParameter(std::string field, const std::string& why)
      : Error(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// Root search could not bracket or converge; carries the interval searched.
class RootSearchError : public Error {
public:
  RootSearchError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

private:
  double lo_, hi_;
};

class IntegrationError : public Error {
public:
  IntegrationError(const std::string& what, double t, std::vector<double> last_state)
      : Error(what), t_(t), last_state_(std::move(last_state)) {}
  double t() const noexcept { return t_; }
  const std::vector<double>& last_state() const noexcept { return last_state_; }

private:
  double t_;
  std::vector<double> last_state_;
};

class ConfigError : public Error {
public:
  ConfigError(std::string path, const std::string& why)
      : Error(path + ": " + why), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace platelab
