#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimflow
{

/*! \brief Dense truth table of a single-output boolean function.
 *
 * Row `r` holds f(x) where variable `i` is bit `i` of `r` (variable 0 is the
 * least significant index). At most 16 variables.
 */
class truth_table
{
public:
  static constexpr std::uint32_t max_vars = 16u;

  truth_table() = default;
  explicit truth_table( std::uint32_t num_vars );

  static truth_table from_function( std::uint32_t num_vars, std::function<bool( std::uint64_t )> const& fn );

  /*! \brief Parses a '0'/'1' string whose k-th character is row k. Length must be a power of two. */
  static truth_table from_string( std::string_view bits );

  std::uint32_t num_vars() const noexcept { return num_vars_; }
  std::uint64_t num_bits() const noexcept { return std::uint64_t{ 1 } << num_vars_; }

  bool get( std::uint64_t row ) const;
  void set( std::uint64_t row, bool value );

  bool is_constant() const;
  /*! \brief Index of the variable this function copies, if it is a projection. */
  std::optional<std::uint32_t> projection() const;
  bool depends_on( std::uint32_t var ) const;

  std::string to_string() const;

  bool operator==( truth_table const& other ) const = default;

private:
  std::uint32_t num_vars_{ 0u };
  std::vector<std::uint64_t> words_;
};

} // namespace pimflow
