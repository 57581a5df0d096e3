#include <doctest.h>

#include "support.hpp"

#include <pimflow/errors.hpp>
#include <pimflow/mapper.hpp>

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <optional>

using namespace pimflow;
using test_support::bits_of;
using test_support::oracle_eval;

namespace
{

// Random tree: every signal feeds exactly one gate, leaves are distinct inputs.
netlist random_tree( std::mt19937& rng, std::size_t max_nodes )
{
  auto const is3 = builtin_set( "IS3" );
  char const* kinds[] = { "NOT", "NOR2", "NOR3", "AND2", "XOR3" };
  netlist ntk( "tree" );
  std::size_t nodes = 1, leaves = 0, gates = 0;
  std::function<std::string( std::size_t )> build = [&]( std::size_t depth ) -> std::string {
    if ( depth > 0 && ( nodes >= max_nodes || rng() % 3 == 0 ) )
    {
      auto name = "x" + std::to_string( leaves++ );
      ntk.add_input( name );
      return name;
    }
    auto const& instr = is3.at( kinds[rng() % 5] );
    if ( nodes + instr.num_inputs > max_nodes )
    {
      auto name = "x" + std::to_string( leaves++ );
      ntk.add_input( name );
      return name;
    }
    nodes += instr.num_inputs;
    std::vector<std::string> ins;
    for ( std::uint32_t p = 0; p < instr.num_inputs; ++p )
      ins.push_back( build( depth + 1 ) );
    auto out = "t" + std::to_string( gates++ );
    ntk.add_gate( instr, ins, { out } );
    return out;
  };
  ntk.add_output( build( 0 ) );
  return ntk;
}

// Peak live values when a tree is evaluated in `order`: a leaf takes a cell
// when visited, a gate hands its children's cells back before taking one.
std::uint32_t replay_peak( mapping_graph const& g, std::vector<std::uint32_t> const& order )
{
  std::uint32_t live = 0, peak = 0;
  for ( auto v : order )
  {
    live -= static_cast<std::uint32_t>( g.nodes[v].children.size() );
    ++live;
    peak = std::max( peak, live );
  }
  return peak;
}

// Minimum of replay_peak over all topological orders, by DP over visited subsets.
std::uint32_t brute_force_min_peak( mapping_graph const& g )
{
  auto const n = g.nodes.size();
  REQUIRE( n <= 16u );
  std::vector<std::uint32_t> child_mask( n, 0 );
  for ( std::size_t v = 0; v < n; ++v )
    for ( auto const& c : g.nodes[v].children )
      child_mask[v] |= 1u << c.node;
  auto const full = ( 1u << n ) - 1u;
  std::vector<std::uint32_t> best( full + 1u, std::numeric_limits<std::uint32_t>::max() );
  best[0] = 0;
  for ( std::uint32_t s = 0; s <= full; ++s )
  {
    if ( best[s] == std::numeric_limits<std::uint32_t>::max() )
      continue;
    for ( std::size_t v = 0; v < n; ++v )
    {
      if ( ( s >> v ) & 1u || ( child_mask[v] & s ) != child_mask[v] )
        continue;
      auto const t = s | ( 1u << v );
      // live values: visited nodes whose parent is not yet visited
      std::uint32_t live = 0;
      for ( std::size_t u = 0; u < n; ++u )
      {
        if ( !( ( t >> u ) & 1u ) )
          continue;
        bool consumed = false;
        for ( std::size_t w = 0; w < n; ++w )
          consumed = consumed || ( ( ( t >> w ) & 1u ) && ( ( child_mask[w] >> u ) & 1u ) );
        live += consumed ? 0u : 1u;
      }
      best[t] = std::min( best[t], std::max( best[s], live ) );
    }
  }
  return best[full];
}

// Executes a program over cells holding optional values, straight from the truth tables.
bit_vector run_cells( compiled_program const& p, netlist const& ntk, bit_vector const& in )
{
  std::vector<std::optional<bool>> cell( p.row_size );
  for ( std::size_t i = 0; i < in.size(); ++i )
    cell.at( p.input_placement[i].second ) = in[i];
  for ( auto const& step : p.steps )
  {
    auto const& instr = ntk.cell( step.instruction );
    std::uint64_t row = 0;
    for ( std::size_t k = 0; k < step.inputs.size(); ++k )
    {
      auto const& v = cell.at( step.inputs[k] );
      REQUIRE( v.has_value() );
      row |= std::uint64_t{ *v } << k;
    }
    for ( std::size_t o = 0; o < step.outputs.size(); ++o )
      cell.at( step.outputs[o] ) = instr.evaluate( static_cast<std::uint32_t>( o ), row );
  }
  bit_vector out;
  for ( auto const& [name, c] : p.output_placement )
  {
    REQUIRE( cell.at( c ).has_value() );
    out.push_back( *cell.at( c ) );
  }
  return out;
}

// Live values at each step of a program, from def/last-use intervals.
std::uint32_t interval_peak( compiled_program const& p )
{
  struct value
  {
    long def, last;
    bool pinned;
  };
  std::vector<value> values;
  std::vector<long> current( p.row_size, -1 );
  for ( auto const& [name, c] : p.input_placement )
  {
    current[c] = static_cast<long>( values.size() );
    values.push_back( { -1, -1, false } );
  }
  for ( long t = 0; t < static_cast<long>( p.steps.size() ); ++t )
  {
    for ( auto c : p.steps[t].inputs )
      values[current[c]].last = t;
    for ( auto c : p.steps[t].outputs )
    {
      current[c] = static_cast<long>( values.size() );
      values.push_back( { t, t, false } );
    }
  }
  for ( auto const& [name, c] : p.output_placement )
    values[current[c]].pinned = true;
  std::uint32_t peak = static_cast<std::uint32_t>( p.input_placement.size() );
  for ( long t = 0; t < static_cast<long>( p.steps.size() ); ++t )
  {
    std::uint32_t live = 0;
    for ( auto const& v : values )
      live += ( v.def <= t && ( v.pinned || v.last >= t ) ) ? 1u : 0u;
    peak = std::max( peak, live );
  }
  return peak;
}

} // namespace

TEST_CASE( "cell usage of small shapes" )
{
  auto const is3 = builtin_set( "IS3" );
  auto const two = parse_netlist( ".inputs a b\n.outputs y\n.gate NOR2 a b -> y\n", is3 );
  auto const a2 = compute_cu( build_dag( two ) );
  CHECK( a2.cu[0] == 1u );
  CHECK( a2.cu[2] == 2u );

  // children with cu 3, 3 and 1
  auto const wide = parse_netlist( R"(.inputs a b c d e f g h i
.outputs y
.gate NOR2 a b -> p
.gate NOR2 c d -> q
.gate NOR2 p q -> l
.gate NOR2 e f -> r
.gate NOR2 g h -> s
.gate NOR2 r s -> m
.gate NOR3 l m i -> y
)",
                                   is3 );
  auto const g = build_dag( wide );
  auto const aw = compute_cu( g );
  CHECK( aw.cu[g.gate_node( 2 )] == 3u );
  CHECK( aw.cu[g.gate_node( 5 )] == 3u );
  CHECK( aw.cu[g.gate_node( 6 )] == 4u );
  CHECK( brute_force_min_peak( g ) == 4u );

  // a two-output gate needs at least two cells, a repeated child counts once
  auto const ha = parse_netlist( ".inputs a\n.outputs s c\n.gate NOT a -> n\n.gate HA n n -> s c\n", is3 );
  auto const ah = compute_cu( build_dag( ha ) );
  CHECK( ah.cu[2] == 2u );
}

TEST_CASE( "cell usage matches the minimal tree evaluation" )
{
  std::mt19937 rng( 8 );
  for ( int k = 0; k < 150; ++k )
  {
    auto const ntk = random_tree( rng, 4 + rng() % 9 );
    auto const g = build_dag( ntk );
    REQUIRE( g.nodes.size() <= 12u );
    auto const a = compute_cu( g );
    auto const root = g.gate_node( ntk.gates().size() - 1 );
    CAPTURE( write_netlist( ntk ) );
    CHECK( a.visit_order.size() == g.nodes.size() );
    CHECK( replay_peak( g, a.visit_order ) == a.cu[root] );
    CHECK( brute_force_min_peak( g ) == a.cu[root] );
  }
}

TEST_CASE( "half adder schedule" )
{
  auto const ntk = load_netlist( test_support::data( "ha_nor.net" ), builtin_set( "TS0" ) );
  auto const p = schedule( build_dag( ntk ), 512u, "TS0" );
  CHECK( p.code_size() == 5u );
  CHECK( p.input_placement == std::vector<std::pair<std::string, std::uint32_t>>{ { "a", 0u }, { "b", 1u } } );
  CHECK( check_liveness( p ).ok );
  for ( std::uint64_t v = 0; v < 4; ++v )
    CHECK( run_cells( p, ntk, bits_of( v, 2 ) ) == oracle_eval( ntk, bits_of( v, 2 ) ) );
  CHECK( schedule( build_dag( ntk ), 512u, "TS0" ) == p );
}

TEST_CASE( "NOT chain reuses cells" )
{
  std::string text = ".inputs a\n.outputs y\n";
  std::string prev = "a";
  for ( int i = 0; i < 9; ++i )
  {
    text += ".gate NOT " + prev + " -> n" + std::to_string( i ) + "\n";
    prev = "n" + std::to_string( i );
  }
  text += ".gate NOT " + prev + " -> y\n";
  auto const ntk = parse_netlist( text, builtin_set( "TS0" ) );
  auto const g = build_dag( ntk );
  CHECK( peak_live_cells( g ) == 2u );
  auto const p = schedule( g, 3u );
  CHECK( p.code_size() == 10u );
  for ( auto const& s : p.steps )
    CHECK( s.outputs[0] < 2u );
  CHECK( run_cells( p, ntk, { true } ) == bit_vector{ true } );
  CHECK_NOTHROW( schedule( g, 2u ) );
  try
  {
    schedule( g, 1u );
    FAIL( "expected overflow" );
  }
  catch ( row_overflow_error const& e )
  {
    CHECK( e.peak_live() == 2u );
    CHECK( e.row_size() == 1u );
  }
}

TEST_CASE( "schedules are correct and their peak is exact" )
{
  std::mt19937 rng( 77 );
  auto const is3 = builtin_set( "IS3" );
  for ( int k = 0; k < 60; ++k )
  {
    auto const ntk = test_support::random_dag( rng, is3, 1 + rng() % 8, 1 + rng() % 40 );
    auto const g = build_dag( ntk );
    auto const p = schedule( g, 512u );
    CAPTURE( write_netlist( ntk ) );
    auto const live = check_liveness( p );
    CHECK( live.ok );
    CHECK( interval_peak( p ) == peak_live_cells( g ) );
    CHECK( live.peak_live == peak_live_cells( g ) );
    for ( std::uint64_t v = 0; v < ( 1u << ntk.inputs().size() ); v += 1 + rng() % 5 )
      CHECK( run_cells( p, ntk, bits_of( v, ntk.inputs().size() ) ) == oracle_eval( ntk, bits_of( v, ntk.inputs().size() ) ) );
    // a row one cell short of the peak overflows
    auto const peak = peak_live_cells( g );
    CHECK_NOTHROW( schedule( g, peak ) );
    CHECK_THROWS_AS( schedule( g, peak - 1 ), row_overflow_error );
  }
}

TEST_CASE( "gate cycle is refused" )
{
  auto const lib = merge_sets( "lib", builtin_set( "IS3" ), load_library( test_support::data( "and_pair.json" ) ) );
  auto const cyc = load_netlist( test_support::data( "and_pair_cycle.net" ), lib );
  CHECK_THROWS_AS( compute_cu( build_dag( cyc ) ), circular_dependency_error );
}

TEST_CASE( "program text round trip" )
{
  auto const ntk = load_netlist( test_support::data( "ha_nor.net" ), builtin_set( "TS0" ) );
  auto const p = schedule( build_dag( ntk ), 16u, "TS0" );
  auto const text = emit_program( p );
  CHECK( text.rfind( ".isa TS0\n.row 16\n", 0 ) == 0u );
  CHECK( parse_program( text ) == p );

  CHECK_THROWS_AS( parse_program( ".isa X\n.place_in a 0\n" ), parse_error );
  try
  {
    parse_program( ".isa X\n.row 4\nINSTR NOT in=0 out=9\nbogus\n" );
    FAIL( "expected parse error" );
  }
  catch ( parse_error const& e )
  {
    CHECK( e.line() == 4u );
  }
}

TEST_CASE( "liveness check rejects broken programs" )
{
  auto const base = parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 1\nINSTR NOT in=0 out=1\n" );
  CHECK( check_liveness( base ).ok );
  CHECK_FALSE( check_liveness( parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 1\nINSTR NOT in=2 out=1\n" ) ).ok );
  CHECK_FALSE( check_liveness( parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 1\nINSTR NOT in=0 out=7\n" ) ).ok );
  CHECK_FALSE(
      check_liveness( parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 0\nINSTR NOR2 in=0,1 out=0\n" ) ).ok );
  CHECK_FALSE( check_liveness( parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 3\nINSTR NOT in=0 out=1\n" ) ).ok );
}
