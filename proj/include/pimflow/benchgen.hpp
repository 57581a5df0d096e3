#pragma once

#include <pimflow/isa.hpp>
#include <pimflow/netlist.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace pimflow
{

enum class benchmark_kind
{
  adder,
  multiplier,
  vmm,
  random
};

struct benchmark_spec
{
  benchmark_kind kind{ benchmark_kind::adder };
  std::uint32_t width{ 8u };
  std::uint32_t vector_len{ 5u };
  std::uint32_t dim{ 5u };
  std::uint32_t element_bits{ 8u };
  std::uint32_t gates{ 20u };
  std::uint32_t inputs{ 6u };
  std::uint64_t seed{ 1u };

  static benchmark_spec adder( std::uint32_t width );
  static benchmark_spec multiplier( std::uint32_t width );
  static benchmark_spec vmm( std::uint32_t vector_len, std::uint32_t dim, std::uint32_t element_bits );
  static benchmark_spec random( std::uint32_t gates, std::uint32_t inputs, std::uint64_t seed );

  /*! \brief Short identifier such as `adder8`, `mult4`, `vmm5x5x8` or `random30_10_s7`. */
  std::string name() const;
};

/*! \brief Parses `adder:N`, `mult:N`, `vmm:LxDxB` or `random:G:I:SEED`; throws `error` otherwise. */
benchmark_spec parse_benchmark_spec( std::string_view text );

/*! \brief Builds the benchmark over NOT, AND2, OR2 and XOR2 taken from `base_set`.
 *
 * ADDER(n): inputs a0.., b0..; outputs s0..s(n-1), cout.
 * MULTIPLIER(n): inputs a0.., b0..; outputs p0..p(2n-1).
 * VMM(L, D, B): inputs v<i>_<k>, m<i>_<j>_<k>; outputs y<j>_<k>, unsigned, each
 * accumulation widening the sum by one bit.
 * RANDOM: gates drawn from every base-set instruction with at most four inputs.
 * Throws `library_error` when the base set lacks one of the four gates.
 */
netlist generate( benchmark_spec const& spec, instruction_set const& base_set );

} // namespace pimflow
