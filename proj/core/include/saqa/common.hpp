#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace saqa {

// Exit-code contract shared with the CLI: Validation -> 2, Io -> 1.
enum class ErrorKind { Validation, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& msg) {
  throw Error(ErrorKind::Validation, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
  throw Error(ErrorKind::Io, msg);
}

// Row-major 2-D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return v_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return v_[r * cols_ + c];
  }

  std::vector<T>& data() noexcept { return v_; }
  const std::vector<T>& data() const noexcept { return v_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> v_;
};

using RealGrid = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;

// Row-major 3-D tensor, index order (i, j, k).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), v_(d0 * d1 * d2, fill) {}

  std::size_t dim0() const noexcept { return d0_; }
  std::size_t dim1() const noexcept { return d1_; }
  std::size_t dim2() const noexcept { return d2_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return v_[(i * d1_ + j) * d2_ + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return v_[(i * d1_ + j) * d2_ + k];
  }

  std::vector<double>& data() noexcept { return v_; }
  const std::vector<double>& data() const noexcept { return v_; }

 private:
  std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> v_;
};

// Row-major 4-D tensor, index order (i, j, k, l).
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3,
          double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), d3_(d3), v_(d0 * d1 * d2 * d3, fill) {}

  std::size_t dim0() const noexcept { return d0_; }
  std::size_t dim1() const noexcept { return d1_; }
  std::size_t dim2() const noexcept { return d2_; }
  std::size_t dim3() const noexcept { return d3_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k,
                     std::size_t l) {
    return v_[((i * d1_ + j) * d2_ + k) * d3_ + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k,
                    std::size_t l) const {
    return v_[((i * d1_ + j) * d2_ + k) * d3_ + l];
  }

  bool same_shape(const Tensor4& o) const noexcept {
    return d0_ == o.d0_ && d1_ == o.d1_ && d2_ == o.d2_ && d3_ == o.d3_;
  }

  std::vector<double>& data() noexcept { return v_; }
  const std::vector<double>& data() const noexcept { return v_; }

 private:
  std::size_t d0_ = 0, d1_ = 0, d2_ = 0, d3_ = 0;
  std::vector<double> v_;
};

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Principal value in (-pi, pi].
inline double wrap_phase(double x) {
  double r = std::fmod(x + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  if (r == -kPi) r = kPi;
  return r;
}

}  // namespace saqa
