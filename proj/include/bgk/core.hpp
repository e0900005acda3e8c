#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bgk {

using Index = Eigen::Index;

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Phase-space storage: one row per spatial cell, one column per velocity node.
template <typename Scalar>
using FieldArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Density below which a cell is treated as vacuum.
inline constexpr double kRhoFloor = 1e-13;

/// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation left the regime where its output is meaningful. Maps to CLI exit code 3.
class RuntimeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CflError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

class VacuumError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

class EnvelopeError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

class CorrectionError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

/// The velocity grid cannot represent the basis to the requested accuracy.
class ResolutionError : public RuntimeAbort {
 public:
  using RuntimeAbort::RuntimeAbort;
};

namespace detail {

template <typename Scalar, typename Getter>
Scalar pairwise_sum_impl(Index begin, Index end, const Getter& get) {
  const Index count = end - begin;
  if (count <= 8) {
    Scalar s(0);
    for (Index i = begin; i < end; ++i) s += get(i);
    return s;
  }
  const Index mid = begin + count / 2;
  return pairwise_sum_impl<Scalar>(begin, mid, get) + pairwise_sum_impl<Scalar>(mid, end, get);
}

}  // namespace detail

/// Pairwise summation in a fixed tree order; the result depends only on the values.
template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const auto& v = values.derived();
  return detail::pairwise_sum_impl<Scalar>(0, v.size(), [&](Index i) { return Scalar(v(i)); });
}

/// Pairwise sum of an arbitrary indexed term.
template <typename Scalar, typename Fn>
Scalar pairwise_sum(Index count, const Fn& term) {
  return detail::pairwise_sum_impl<Scalar>(0, count, term);
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once, so results never depend on the thread count as long
/// as fn(i) only writes to slot i.
template <typename Fn>
void parallel_for(Index count, int threads, const Fn& fn) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(count, 1));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  const Index chunk = (count + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn, &err = errors[static_cast<std::size_t>(w)]] {
      try {
        for (Index i = begin; i < end; ++i) fn(i);
      } catch (...) {
        err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  // lowest chunk first, so the reported error matches the serial run
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bgk
