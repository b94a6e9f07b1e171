#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ssmopt {

/// Raised when a parameter set fails one or more admissibility conditions.
/// `failed()` lists every violated condition by its canonical name, e.g.
/// "lambda4 <= lambda5" or "b2 < b1".
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> failed, const std::string& context = {});

  const std::vector<std::string>& failed() const noexcept { return failed_; }
  bool names(const std::string& condition) const;

 private:
  std::vector<std::string> failed_;
};

/// A state left the domain where the dynamics are defined (e.g. nu <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Discrete update whose second-moment retention factor 1 - delta*(b2 + b3)
/// is negative.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Polynomial degree outside what the closed-form root finder handles.
class DegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A diagnostic was asked for on parameters it does not apply to.
class PresetMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sample grid that is empty, non-uniform or inconsistent with the request.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or schema-violating configuration input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ssmopt
