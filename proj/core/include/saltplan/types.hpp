#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace saltplan {

enum class NodeId : std::int64_t {};
enum class EdgeId : std::int64_t {};
enum class DepotId : std::int64_t {};

template <typename Id>
constexpr std::int64_t raw(Id id) noexcept {
  return static_cast<std::int64_t>(id);
}

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Polyline = std::vector<Point>;

double polyline_length(const Polyline& line);

// Errors raised across the library. Violations found by the feasibility
// checker are data, never exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

class DepotUnreachableError : public Error {
 public:
  DepotUnreachableError(DepotId depot, const std::string& what)
      : Error(what), depot_(depot) {}
  DepotId depot() const noexcept { return depot_; }

 private:
  DepotId depot_;
};

class UnroutableEdgeError : public Error {
 public:
  UnroutableEdgeError(EdgeId edge, const std::string& what)
      : Error(what), edge_(edge) {}
  EdgeId edge() const noexcept { return edge_; }

 private:
  EdgeId edge_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace saltplan
