#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ntknas {

// Bad user input: shapes, lengths, unnormalized rows, malformed files.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical breakdown (e.g. a kernel that cannot be repaired to PSD).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class divergence_error : public std::runtime_error {
 public:
  divergence_error(std::size_t iteration, const std::string& what)
      : std::runtime_error(what + " at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

// Every candidate of an architecture search failed.
class search_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ntknas
