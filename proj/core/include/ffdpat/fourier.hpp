#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ffdpat/grid.hpp"

namespace ffdpat {

/// Sets the thread count used by transforms and pointwise loops. Call before
/// creating any FourierMultiplier; n <= 0 keeps the OpenMP default.
void set_thread_count(int n);

/// u -> IFFT[ m(|xi|) * FFT[u] ] on a Grid3, for a real radial symbol m.
///
/// The symbol is even in xi, so the operator is real and symmetric with
/// respect to the Euclidean inner product. Instances own their transform
/// buffers and are not safe to share between threads; distinct instances
/// are independent.
class FourierMultiplier {
 public:
  FourierMultiplier(const Grid3& grid,
                    const std::function<double(double)>& radial_symbol);
  ~FourierMultiplier();
  FourierMultiplier(FourierMultiplier&&) noexcept;
  FourierMultiplier& operator=(FourierMultiplier&&) noexcept;
  FourierMultiplier(const FourierMultiplier&) = delete;
  FourierMultiplier& operator=(const FourierMultiplier&) = delete;

  const Grid3& grid() const;
  void apply(const Field3& in, Field3& out);
  Field3 apply(const Field3& in);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ffdpat
