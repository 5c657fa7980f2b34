#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrsl {

// Error categories shared by every module. Callers that only care about
// "bad input" can catch std::invalid_argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RegimeViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Row-major n x dim matrix of coordinates.
struct PointCloud {
  std::size_t dim = 0;
  std::vector<double> coords;

  PointCloud() = default;
  explicit PointCloud(std::size_t d) : dim(d) {}
  PointCloud(std::size_t d, std::vector<double> c) : dim(d), coords(std::move(c)) {
    if (dim == 0 || coords.size() % dim != 0) {
      throw InvalidArgument("PointCloud: coordinate count is not a multiple of dim");
    }
  }

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {coords.data() + i * dim, dim};
  }
  std::span<double> row(std::size_t i) noexcept { return {coords.data() + i * dim, dim}; }

  void push_back(std::span<const double> p) {
    if (p.size() != dim) throw InvalidArgument("PointCloud::push_back: dimension mismatch");
    coords.insert(coords.end(), p.begin(), p.end());
  }

  bool operator==(const PointCloud&) const = default;
};

/// Squared Euclidean distance with a fixed summation order. Every module
/// goes through this function so that different search paths produce
/// bit-identical distances.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;

// Seeding. One global seed fans out to children through splitmix64:
//   child(seed, label) = splitmix64(seed ^ fnv1a64(label))
//   child(seed, index) = splitmix64(seed + golden * (index + 1))
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t child_seed(std::uint64_t seed, std::string_view label) noexcept;
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index) noexcept;

std::string to_hex(std::uint64_t v);
/// Shortest text that round-trips a double ("%.17g").
std::string format_double(double v);

}  // namespace mrsl
