#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad user/config input (CLI maps this to exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure inside a solver (distinct from infeasibility, which is a
/// regular result). CLI maps this to exit code 1.
struct SolverError : Error {
  using Error::Error;
};

/// A binary sequence over a horizon: N steps of n_delta bits each, stored
/// flat step-major (bit i of step k lives at k*n_delta + i).
class BinarySequence {
 public:
  BinarySequence() = default;
  BinarySequence(int steps, int bits_per_step)
      : steps_(steps), bits_(bits_per_step),
        data_(static_cast<size_t>(steps) * bits_per_step, 0) {}

  int steps() const { return steps_; }
  int bits_per_step() const { return bits_; }
  int size() const { return static_cast<int>(data_.size()); }
  bool empty() const { return data_.empty(); }

  uint8_t bit(int step, int i) const { return data_[idx(step, i)]; }
  void set_bit(int step, int i, uint8_t v) { data_[idx(step, i)] = v ? 1 : 0; }
  uint8_t flat(int j) const { return data_[static_cast<size_t>(j)]; }
  void set_flat(int j, uint8_t v) { data_[static_cast<size_t>(j)] = v ? 1 : 0; }

  /// One step as a column vector of doubles.
  VectorXd step_vector(int step) const {
    VectorXd v(bits_);
    for (int i = 0; i < bits_; ++i) v[i] = bit(step, i);
    return v;
  }

  /// Whole sequence flattened to doubles (step-major).
  VectorXd to_vector() const {
    VectorXd v(size());
    for (int j = 0; j < size(); ++j) v[j] = data_[static_cast<size_t>(j)];
    return v;
  }

  bool any() const {
    for (uint8_t b : data_)
      if (b) return true;
    return false;
  }

  /// Number of steps k >= 1 whose bit column differs from step k-1.
  int transition_count() const {
    int k_count = 0;
    for (int k = 1; k < steps_; ++k) {
      for (int i = 0; i < bits_; ++i) {
        if (bit(k, i) != bit(k - 1, i)) {
          ++k_count;
          break;
        }
      }
    }
    return k_count;
  }

  /// Indices k >= 1 where the bit column changes.
  std::vector<int> transitions() const {
    std::vector<int> t;
    for (int k = 1; k < steps_; ++k) {
      for (int i = 0; i < bits_; ++i) {
        if (bit(k, i) != bit(k - 1, i)) {
          t.push_back(k);
          break;
        }
      }
    }
    return t;
  }

  friend bool operator==(const BinarySequence& a, const BinarySequence& b) {
    return a.steps_ == b.steps_ && a.bits_ == b.bits_ && a.data_ == b.data_;
  }
  friend bool operator!=(const BinarySequence& a, const BinarySequence& b) {
    return !(a == b);
  }
  /// Lexicographic order on the flat bit string.
  friend bool operator<(const BinarySequence& a, const BinarySequence& b) {
    if (a.steps_ != b.steps_) return a.steps_ < b.steps_;
    if (a.bits_ != b.bits_) return a.bits_ < b.bits_;
    return a.data_ < b.data_;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(data_.size() + steps_);
    for (int k = 0; k < steps_; ++k) {
      if (k) s.push_back('|');
      for (int i = 0; i < bits_; ++i) s.push_back(bit(k, i) ? '1' : '0');
    }
    return s;
  }

  struct Hash {
    size_t operator()(const BinarySequence& s) const {
      // FNV-1a over the flat bits plus the shape.
      uint64_t h = 1469598103934665603ull;
      auto mix = [&h](uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
      };
      mix(static_cast<uint64_t>(s.steps_));
      mix(static_cast<uint64_t>(s.bits_));
      for (uint8_t b : s.data_) mix(b);
      return static_cast<size_t>(h);
    }
  };

 private:
  size_t idx(int step, int i) const {
    return static_cast<size_t>(step) * bits_ + i;
  }
  int steps_ = 0;
  int bits_ = 0;
  std::vector<uint8_t> data_;
};

}  // namespace bmpc
