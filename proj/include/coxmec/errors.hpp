#pragma once

#include <stdexcept>
#include <string>

namespace coxmec {

// API misuse: bad argument combinations, empty inputs, size guards.
class usage_error : public std::invalid_argument {
public:
  explicit usage_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid data: malformed files, values outside the model's domain.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape-constraint violations: Lipschitz band, nonnegativity, floors.
class constraint_error : public std::runtime_error {
public:
  explicit constraint_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failures: singular matrices, underflow, degenerate problems.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace coxmec
