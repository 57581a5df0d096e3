#include <pimflow/errors.hpp>
#include <pimflow/truth_table.hpp>

#include <bit>

namespace pimflow
{

truth_table::truth_table( std::uint32_t num_vars )
    : num_vars_( num_vars )
{
  if ( num_vars > max_vars )
  {
    throw library_error( "truth table with " + std::to_string( num_vars ) + " variables exceeds the limit of 16" );
  }
  words_.assign( ( num_bits() + 63u ) / 64u, 0u );
}

truth_table truth_table::from_function( std::uint32_t num_vars, std::function<bool( std::uint64_t )> const& fn )
{
  truth_table tt( num_vars );
  for ( std::uint64_t row = 0u; row < tt.num_bits(); ++row )
  {
    tt.set( row, fn( row ) );
  }
  return tt;
}

truth_table truth_table::from_string( std::string_view bits )
{
  if ( bits.empty() || !std::has_single_bit( bits.size() ) )
  {
    throw library_error( "truth table length " + std::to_string( bits.size() ) + " is not a power of two" );
  }
  truth_table tt( static_cast<std::uint32_t>( std::countr_zero( bits.size() ) ) );
  for ( std::size_t row = 0u; row < bits.size(); ++row )
  {
    if ( bits[row] != '0' && bits[row] != '1' )
    {
      throw library_error( std::string( "invalid truth table character '" ) + bits[row] + "'" );
    }
    tt.set( row, bits[row] == '1' );
  }
  return tt;
}

bool truth_table::get( std::uint64_t row ) const
{
  return ( words_[row >> 6u] >> ( row & 63u ) ) & 1u;
}

void truth_table::set( std::uint64_t row, bool value )
{
  auto const bit = std::uint64_t{ 1 } << ( row & 63u );
  if ( value )
    words_[row >> 6u] |= bit;
  else
    words_[row >> 6u] &= ~bit;
}

bool truth_table::is_constant() const
{
  bool const first = get( 0u );
  for ( std::uint64_t row = 1u; row < num_bits(); ++row )
  {
    if ( get( row ) != first )
      return false;
  }
  return true;
}

std::optional<std::uint32_t> truth_table::projection() const
{
  for ( std::uint32_t var = 0u; var < num_vars_; ++var )
  {
    bool match = true;
    for ( std::uint64_t row = 0u; row < num_bits() && match; ++row )
    {
      match = get( row ) == static_cast<bool>( ( row >> var ) & 1u );
    }
    if ( match )
      return var;
  }
  return std::nullopt;
}

bool truth_table::depends_on( std::uint32_t var ) const
{
  auto const stride = std::uint64_t{ 1 } << var;
  for ( std::uint64_t row = 0u; row < num_bits(); ++row )
  {
    if ( ( row & stride ) == 0u && get( row ) != get( row | stride ) )
      return true;
  }
  return false;
}

std::string truth_table::to_string() const
{
  std::string s;
  s.reserve( num_bits() );
  for ( std::uint64_t row = 0u; row < num_bits(); ++row )
  {
    s.push_back( get( row ) ? '1' : '0' );
  }
  return s;
}

} // namespace pimflow
