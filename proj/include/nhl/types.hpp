#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace nhl {

/// A point in R^d for d in {1,2}. Unused trailing coordinates are zero.
using Point = std::array<double, 2>;

inline double norm(const Point& z, int dim)
{
    return dim == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]);
}

inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

/// Copies a coordinate span into a Point, checking it against the expected dimension.
Point to_point(std::span<const double> coords, int dim);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature ran out of its refinement budget before meeting the tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Configuration or precondition violation; `key()` names the offending setting when known.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace nhl
