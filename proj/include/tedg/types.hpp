#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace tedg {

using Real = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::VectorXi;

struct Vec2 {
  Real x = 0.0;
  Real y = 0.0;
};

inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Real dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline Real cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline Real norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Base class for all failures the library reports. Subclasses map onto CLI
// exit codes: config/usage problems, input parsing, solver blow-up,
// iteration non-convergence, and file I/O.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line = 0;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class MaterialError : public Error {
 public:
  using Error::Error;
};

class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step(step) {}
  long step = 0;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<Real> residual_history)
      : Error(what), history(std::move(residual_history)) {}
  std::vector<Real> history;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tedg
