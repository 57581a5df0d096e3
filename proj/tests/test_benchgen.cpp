#include <doctest.h>

#include "support.hpp"

#include <pimflow/benchgen.hpp>
#include <pimflow/errors.hpp>

#include <set>

using namespace pimflow;

namespace
{

// 64 lanes of random operands; lane l of each input word gets one bit of operand l
struct lanes
{
  std::map<std::string, std::uint64_t> in_words;

  void set_word( std::string const& prefix, std::uint32_t bits, std::vector<std::uint64_t> const& values )
  {
    for ( std::uint32_t k = 0; k < bits; ++k )
    {
      std::uint64_t w = 0;
      for ( std::size_t l = 0; l < 64; ++l )
        w |= ( ( values[l] >> k ) & 1u ) << l;
      in_words[prefix + std::to_string( k )] = w;
    }
  }

  std::vector<std::uint64_t> run( netlist const& ntk ) const
  {
    std::vector<std::uint64_t> words;
    for ( auto const& s : ntk.inputs() )
      words.push_back( in_words.at( s ) );
    return simulate_words( index_netlist( ntk ), words );
  }
};

std::uint64_t decode( std::vector<std::uint64_t> const& out, std::size_t first, std::size_t bits, std::size_t lane )
{
  std::uint64_t v = 0;
  for ( std::size_t k = 0; k < bits; ++k )
    v |= ( ( out[first + k] >> lane ) & 1u ) << k;
  return v;
}

std::vector<std::uint64_t> draw( std::mt19937_64& rng, std::uint32_t bits )
{
  std::vector<std::uint64_t> v( 64 );
  for ( auto& x : v )
    x = rng() & ( ( std::uint64_t{ 1 } << bits ) - 1u );
  return v;
}

} // namespace

TEST_CASE( "names and spec parsing" )
{
  CHECK( benchmark_spec::adder( 8 ).name() == "adder8" );
  CHECK( benchmark_spec::multiplier( 4 ).name() == "mult4" );
  CHECK( benchmark_spec::vmm( 5, 5, 8 ).name() == "vmm5x5x8" );
  CHECK( benchmark_spec::random( 30, 10, 7 ).name() == "random30_10_s7" );

  auto const v = parse_benchmark_spec( "vmm:3x2x4" );
  CHECK( v.kind == benchmark_kind::vmm );
  CHECK( v.vector_len == 3u );
  CHECK( v.dim == 2u );
  CHECK( v.element_bits == 4u );
  CHECK( parse_benchmark_spec( "mult:4" ).name() == "mult4" );
  CHECK( parse_benchmark_spec( "random:30:10:7" ).name() == "random30_10_s7" );
  CHECK_THROWS_AS( parse_benchmark_spec( "adder" ), error );
  CHECK_THROWS_AS( parse_benchmark_spec( "adder:x" ), error );
  CHECK_THROWS_AS( parse_benchmark_spec( "vmm:3x2" ), error );
  CHECK_THROWS_AS( parse_benchmark_spec( "divider:4" ), error );
}

TEST_CASE( "adders add" )
{
  auto const is2 = builtin_set( "IS2" );
  std::mt19937_64 rng( 1 );
  for ( std::uint32_t n : { 1u, 2u, 5u, 8u, 16u } )
  {
    CAPTURE( n );
    auto const ntk = generate( benchmark_spec::adder( n ), is2 );
    CHECK( ntk.model() == "adder" + std::to_string( n ) );
    REQUIRE( ntk.inputs().size() == 2u * n );
    REQUIRE( ntk.outputs().size() == n + 1u );
    CHECK( ntk.outputs().back() == "cout" );
    CHECK( ntk.outputs().front() == "s0" );
    auto const a = draw( rng, n ), b = draw( rng, n );
    lanes l;
    l.set_word( "a", n, a );
    l.set_word( "b", n, b );
    auto const out = l.run( ntk );
    for ( std::size_t lane = 0; lane < 64; ++lane )
      CHECK( decode( out, 0, n + 1, lane ) == a[lane] + b[lane] );
  }
}

TEST_CASE( "multipliers multiply" )
{
  auto const is2 = builtin_set( "IS2" );
  std::mt19937_64 rng( 2 );
  for ( std::uint32_t n : { 1u, 2u, 3u, 4u, 8u } )
  {
    CAPTURE( n );
    auto const ntk = generate( benchmark_spec::multiplier( n ), is2 );
    REQUIRE( ntk.outputs().size() == 2u * n );
    auto const a = draw( rng, n ), b = draw( rng, n );
    lanes l;
    l.set_word( "a", n, a );
    l.set_word( "b", n, b );
    auto const out = l.run( ntk );
    for ( std::size_t lane = 0; lane < 64; ++lane )
      CHECK( decode( out, 0, 2 * n, lane ) == a[lane] * b[lane] );
  }
}

TEST_CASE( "vector-matrix products" )
{
  auto const is2 = builtin_set( "IS2" );
  std::mt19937_64 rng( 3 );
  struct dims
  {
    std::uint32_t len, dim, bits;
  };
  for ( auto const d : { dims{ 1, 1, 3 }, dims{ 2, 3, 4 }, dims{ 5, 5, 8 } } )
  {
    CAPTURE( d.len );
    CAPTURE( d.dim );
    auto const ntk = generate( benchmark_spec::vmm( d.len, d.dim, d.bits ), is2 );
    std::size_t const out_bits = 2u * d.bits + d.len - 1u;
    REQUIRE( ntk.inputs().size() == d.len * d.bits * ( 1u + d.dim ) );
    REQUIRE( ntk.outputs().size() == d.dim * out_bits );

    std::vector<std::vector<std::uint64_t>> v, m;
    lanes l;
    for ( std::uint32_t i = 0; i < d.len; ++i )
    {
      v.push_back( draw( rng, d.bits ) );
      l.set_word( "v" + std::to_string( i ) + "_", d.bits, v.back() );
    }
    for ( std::uint32_t i = 0; i < d.len; ++i )
      for ( std::uint32_t j = 0; j < d.dim; ++j )
      {
        m.push_back( draw( rng, d.bits ) );
        l.set_word( "m" + std::to_string( i ) + "_" + std::to_string( j ) + "_", d.bits, m.back() );
      }
    auto const out = l.run( ntk );
    for ( std::size_t lane = 0; lane < 64; ++lane )
      for ( std::uint32_t j = 0; j < d.dim; ++j )
      {
        std::uint64_t want = 0;
        for ( std::uint32_t i = 0; i < d.len; ++i )
          want += v[i][lane] * m[i * d.dim + j][lane];
        CHECK( decode( out, j * out_bits, out_bits, lane ) == want );
      }
  }

  // identity matrix hands back the vector
  auto const ntk = generate( benchmark_spec::vmm( 3, 3, 4 ), is2 );
  lanes l;
  std::vector<std::vector<std::uint64_t>> v;
  for ( std::uint32_t i = 0; i < 3; ++i )
  {
    v.push_back( draw( rng, 4 ) );
    l.set_word( "v" + std::to_string( i ) + "_", 4, v.back() );
    for ( std::uint32_t j = 0; j < 3; ++j )
      l.set_word( "m" + std::to_string( i ) + "_" + std::to_string( j ) + "_", 4,
                  std::vector<std::uint64_t>( 64, i == j ? 1u : 0u ) );
  }
  auto const out = l.run( ntk );
  for ( std::size_t lane = 0; lane < 64; ++lane )
    for ( std::uint32_t j = 0; j < 3; ++j )
      CHECK( decode( out, j * 10, 10, lane ) == v[j][lane] );
}

TEST_CASE( "random netlists" )
{
  auto const is2 = builtin_set( "IS2" );
  auto const spec = benchmark_spec::random( 30, 10, 7 );
  auto const a = generate( spec, is2 );
  CHECK( a == generate( spec, is2 ) );
  CHECK_FALSE( a == generate( benchmark_spec::random( 30, 10, 8 ), is2 ) );
  CHECK( a.model() == "random30_10_s7" );
  CHECK( a.gates().size() == 30u );
  CHECK( a.inputs().size() == 10u );
  CHECK_FALSE( a.outputs().empty() );
  CHECK( detect_cycles( a ).ok() );
  for ( auto const& g : a.gates() )
  {
    CHECK( is2.contains( g.instruction ) );
    CHECK( is2.at( g.instruction ).num_inputs <= 4u );
  }
  // every gate output is consumed or observed
  std::set<std::string> used( a.outputs().begin(), a.outputs().end() );
  for ( auto const& g : a.gates() )
    used.insert( g.inputs.begin(), g.inputs.end() );
  for ( auto const& g : a.gates() )
    for ( auto const& o : g.outputs )
      CHECK( used.count( o ) == 1u );
  CHECK_THROWS_AS( generate( benchmark_spec::random( 5, 0, 1 ), is2 ), error );
}

TEST_CASE( "base set must provide the building blocks" )
{
  CHECK_THROWS_AS( generate( benchmark_spec::adder( 4 ), builtin_set( "TS0" ) ), library_error );
  CHECK_THROWS_AS( generate( benchmark_spec::adder( 4 ), builtin_set( "TS1" ) ), library_error );
  CHECK_NOTHROW( generate( benchmark_spec::adder( 4 ), builtin_set( "IS3" ) ) );
  CHECK_THROWS_AS( generate( benchmark_spec::adder( 0 ), builtin_set( "IS2" ) ), error );
  CHECK_THROWS_AS( generate( benchmark_spec::vmm( 0, 1, 1 ), builtin_set( "IS2" ) ), error );
}
