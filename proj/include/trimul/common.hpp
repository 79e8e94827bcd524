// common.hpp
//
// Shared plumbing: error taxonomy, deterministic seeding, least-squares
// slope fits, FNV-1a digests, and a join-based parallel_for.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trimul {

// Precondition violations that a caller can anticipate and avoid
// (resolution too coarse, scale out of range, ...). CLI exit code 3.
class refusal_error : public std::runtime_error {
 public:
  explicit refusal_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem problems while emitting reports. CLI exit code 4.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// FNV-1a 64-bit digest of a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string to_hex(std::uint64_t v);

// Derives an independent stream seed from a base seed and a task label,
// so parallel tasks never share generator state.
std::uint64_t derive_seed(std::uint64_t base, const std::string& label);

// Least-squares slope of ys against xs. Requires xs.size() == ys.size() >= 2.
double lsq_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
// Work is split into contiguous chunks; the caller must make fn
// side-effect-free except for writes to disjoint slots indexed by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Chunked deterministic reduction: splits [0, n) into ordered chunks,
// accumulates chunk_sum(i) serially inside each chunk on worker threads,
// then adds the chunk totals in chunk order on the calling thread.
double parallel_sum(std::size_t n,
                    const std::function<double(std::size_t)>& term);

inline bool almost_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

}  // namespace trimul
