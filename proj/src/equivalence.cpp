#include <pimflow/errors.hpp>
#include <pimflow/lowering.hpp>

#include <algorithm>
#include <bit>
#include <map>
#include <random>

namespace pimflow
{

equivalence_result check_equivalence( netlist const& a, netlist const& b )
{
  if ( a.inputs().size() != b.inputs().size() || a.outputs().size() != b.outputs().size() )
  {
    throw netlist_error( "equivalence check needs matching interfaces" );
  }
  auto const ia = index_netlist( a );
  auto const ib = index_netlist( b );

  // b's inputs are matched to a's by name when the names agree, otherwise by position.
  std::vector<std::size_t> b_input_of( a.inputs().size() );
  bool by_name = true;
  std::map<std::string, std::size_t> b_pos;
  for ( std::size_t i = 0u; i < b.inputs().size(); ++i )
    b_pos[b.inputs()[i]] = i;
  for ( std::size_t i = 0u; i < a.inputs().size(); ++i )
  {
    auto it = b_pos.find( a.inputs()[i] );
    if ( it == b_pos.end() )
    {
      by_name = false;
      break;
    }
    b_input_of[i] = it->second;
  }
  if ( !by_name )
  {
    for ( std::size_t i = 0u; i < a.inputs().size(); ++i )
      b_input_of[i] = i;
  }

  auto const n = a.inputs().size();
  equivalence_result result;
  result.exhaustive = n <= 16u;

  std::mt19937_64 rng( 0x5eedULL );
  std::uint64_t const total = result.exhaustive ? ( std::uint64_t{ 1 } << n ) : 10000u;
  std::vector<std::uint64_t> wa( n ), wb( n );
  for ( std::uint64_t base = 0u; base < total; base += 64u )
  {
    auto const lanes = std::min<std::uint64_t>( 64u, total - base );
    for ( std::size_t i = 0u; i < n; ++i )
    {
      std::uint64_t w = 0u;
      if ( result.exhaustive )
      {
        for ( std::uint64_t l = 0u; l < lanes; ++l )
          w |= ( ( ( base + l ) >> i ) & 1u ) << l;
      }
      else
      {
        w = rng();
      }
      wa[i] = w;
      wb[b_input_of[i]] = w;
    }
    auto const oa = simulate_words( ia, wa );
    auto const ob = simulate_words( ib, wb );
    std::uint64_t const mask = lanes == 64u ? ~std::uint64_t{ 0 } : ( ( std::uint64_t{ 1 } << lanes ) - 1u );
    std::uint64_t diff = 0u;
    for ( std::size_t o = 0u; o < oa.size(); ++o )
      diff |= ( oa[o] ^ ob[o] ) & mask;
    if ( diff != 0u )
    {
      auto const lane = static_cast<std::uint32_t>( std::countr_zero( diff ) );
      bit_vector cex( n );
      for ( std::size_t i = 0u; i < n; ++i )
        cex[i] = ( wa[i] >> lane ) & 1u;
      result.equivalent = false;
      result.counterexample = std::move( cex );
      return result;
    }
  }
  return result;
}

} // namespace pimflow
