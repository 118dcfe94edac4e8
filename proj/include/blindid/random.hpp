#ifndef BLINDID_RANDOM_HPP
#define BLINDID_RANDOM_HPP

#include <array>
#include <cstdint>

#include "blindid/types.hpp"

namespace blindid {

/// Philox4x32-10 block function: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// Stream (seed, id) is the Philox sequence keyed by `seed` with the upper
/// counter words fixed to `id`, so any (seed, trial) pair has its own
/// independent stream that can be rebuilt in O(1) on any thread.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// CN(0, 1) sample: real and imaginary parts independent N(0, 1/2).
  Complex complex_gaussian();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int position_ = 4;
};

/// Fills `out` with independent CN(0, 1) entries (E|N_i|^2 = 1).
template <typename Derived>
void fill_complex_gaussian(RandomStream& stream, Eigen::MatrixBase<Derived> const& out_) {
  auto& out = const_cast<Eigen::MatrixBase<Derived>&>(out_);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = stream.complex_gaussian();
}

ComplexVector sample_complex_gaussian(RandomStream& stream, Eigen::Index count);

}  // namespace blindid

#endif  // BLINDID_RANDOM_HPP
