#include <doctest.h>

#include "support.hpp"

#include <pimflow/errors.hpp>
#include <pimflow/flow.hpp>
#include <pimflow/simulator.hpp>

#include <json.hpp>

using namespace pimflow;

TEST_CASE( "static metrics" )
{
  auto const ntk = load_netlist( test_support::data( "ha_nor.net" ), builtin_set( "TS0" ) );
  auto const program = compile( ntk, builtin_set( "TS0" ) );
  auto const m = compute_metrics( program, build_microcode_table( builtin_set( "TS0" ), builtin_machine( "TS0" ) ) );
  CHECK( m.isa == "TS0" );
  CHECK( m.machine == "TS0" );
  CHECK( m.code_size == 5u );
  CHECK( m.compute_cycles == 5u );
  CHECK( m.init_cycles == 5u );
  CHECK( m.total_cycles == 10u );
  CHECK( m.peak_live_cells >= 3u );

  auto const lib = load_library( test_support::data( "xor_and.json" ) );
  auto const ha2 = compile( load_netlist( test_support::data( "ha_xor_and.net" ), lib ), lib );
  auto const ext = load_microcode( test_support::data( "ts0_external_latency.json" ) );
  auto const m2 = compute_metrics( ha2, ext );
  CHECK( m2.code_size == 2u );
  CHECK( m2.compute_cycles == 9u );
  CHECK( m2.init_cycles == 2u );
  CHECK( m2.total_cycles == 11u );
  CHECK( m2.scratch_need == 5u );

  auto const empty = compute_metrics( compiled_program{}, ext );
  CHECK( empty.code_size == 0u );
  CHECK( empty.total_cycles == 0u );
  CHECK( empty.peak_live_cells == 0u );

  // HA is not in the external table
  auto const fused = compile( ntk, builtin_set( "IS2" ) );
  CHECK( fused.code_size() == 1u );
  CHECK_THROWS_AS( compute_metrics( fused, ext ), microcode_error );

  auto const j = nlohmann::json::parse( metrics_json( m ) );
  CHECK( j.at( "total_cycles" ).get<int>() == 10 );
  CHECK( j.at( "code_size" ).get<int>() == 5 );
}

TEST_CASE( "static totals match simulated totals" )
{
  std::mt19937 rng( 8 );
  auto const pool = builtin_set( "IS3" );
  for ( int k = 0; k < 10; ++k )
  {
    auto const ntk = test_support::random_dag( rng, pool, 3 + rng() % 5, 5 + rng() % 20 );
    for ( auto const* isa : { "TS0", "IS3" } )
      for ( auto const* mach : { "TS0", "TS1" } )
      {
        auto const program = compile( ntk, builtin_set( isa ) );
        auto const table = build_microcode_table( builtin_set( isa ), builtin_machine( mach ) );
        auto const m = compute_metrics( program, table );
        auto const r = run_program( program, table, test_support::bits_of( 0u, ntk.inputs().size() ), false );
        CHECK( m.compute_cycles == r.trace.compute_cycles );
        CHECK( m.init_cycles == r.trace.init_cycles );
        CHECK( m.code_size == r.trace.instruction_count );
      }
  }
}

TEST_CASE( "compile diagnoses" )
{
  auto const pair_isa = load_library( test_support::data( "and_pair.json" ) );
  auto const lib = merge_sets( "lib", builtin_set( "IS3" ), pair_isa );
  auto const cyc = load_netlist( test_support::data( "and_pair_cycle.net" ), lib );
  CHECK_THROWS_AS( compile( cyc, pair_isa ), circular_dependency_error );

  auto const adder = generate( benchmark_spec::adder( 8 ), builtin_set( "IS2" ) );
  CHECK_THROWS_AS( compile( adder, builtin_set( "TS0" ), 8u ), row_overflow_error );
  CHECK_NOTHROW( compile( adder, builtin_set( "TS0" ) ) );
}

TEST_CASE( "instruction sets get smaller programs" )
{
  auto const adder = generate( benchmark_spec::adder( 8 ), builtin_set( "IS2" ) );
  std::vector<std::size_t> sizes;
  for ( auto const* isa : { "TS0", "TS1", "IS2", "IS3" } )
    sizes.push_back( compile( adder, builtin_set( isa ) ).code_size() );
  CHECK( sizes[1] <= sizes[0] );
  CHECK( sizes[2] <= sizes[1] );
  CHECK( sizes[3] <= sizes[2] );
  CHECK( sizes[3] < sizes[0] );
}

TEST_CASE( "resolution of names and paths" )
{
  CHECK( resolve_isa( "IS2" ).name() == "IS2" );
  CHECK( resolve_isa( test_support::data( "xor_and.json" ) ).name() == "XOR_AND" );
  CHECK_THROWS_AS( resolve_isa( "IS9" ), error );
  CHECK( resolve_machine( "TS1" ).name == "TS1" );
  CHECK_THROWS_AS( resolve_machine( "nowhere/m.json" ), error );
}

TEST_CASE( "sweep configuration" )
{
  auto const c = parse_sweep_config(
      R"({"benchmarks": ["adder:4"], "isas": ["TS0", "IS3"], "machines": ["TS0"], "row_size": 64})" );
  CHECK( c.benchmarks == std::vector<std::string>{ "adder:4" } );
  CHECK( c.row_size == 64u );
  CHECK( c.base_set == "IS2" );
  CHECK_THROWS_AS( parse_sweep_config( R"({"benchmarks": [], "isas": ["TS0"], "machines": ["TS0"]})" ), error );
  CHECK_THROWS_AS( parse_sweep_config( R"({"benchmarks": ["adder:4"], "isas": ["TS0"]})" ), error );
  CHECK_THROWS_AS( parse_sweep_config( "{" ), parse_error );
}

TEST_CASE( "sweep" )
{
  sweep_config c;
  c.benchmarks = { "adder:4", test_support::data( "ha_nor.net" ) };
  c.isas = { "TS0", "IS3" };
  c.machines = { "TS0", "TS1" };
  auto const rows = sweep( c );
  REQUIRE( rows.size() == 8u );
  CHECK( rows[0].m.benchmark == "adder4" );
  CHECK( rows[0].m.isa == "TS0" );
  CHECK( rows[0].m.machine == "TS0" );
  CHECK( rows[1].m.machine == "TS1" );
  CHECK( rows[2].m.isa == "IS3" );
  CHECK( rows[4].m.benchmark == "ha_nor" );
  for ( auto const& r : rows )
  {
    CAPTURE( r.m.benchmark );
    CHECK( r.error.empty() );
    REQUIRE( r.norm_code_size.has_value() );
  }
  CHECK( *rows[0].norm_code_size == doctest::Approx( 1.0 ) );
  CHECK( *rows[0].norm_total_cycles == doctest::Approx( 1.0 ) );
  CHECK( *rows[2].norm_code_size == doctest::Approx( double( rows[2].m.code_size ) / double( rows[0].m.code_size ) ) );
  CHECK( rows[4].m.code_size == 5u );
  CHECK( rows[4].m.total_cycles == 10u );
  // TS0 programs on the TS0 machine spend one INIT per COMPUTE
  CHECK( rows[0].m.init_cycles == rows[0].m.compute_cycles );

  auto const csv = sweep_csv( rows );
  CHECK( csv.rfind( "benchmark,isa,machine,status,code_size,compute_cycles,init_cycles,total_cycles,peak_live_cells,"
                    "scratch_need,norm_code_size,norm_total_cycles,error\n",
                    0 ) == 0u );
  CHECK( std::count( csv.begin(), csv.end(), '\n' ) == 9 );
  CHECK( csv.find( "adder4,TS0,TS0,ok," ) != std::string::npos );
  CHECK( csv.find( ",1.0000,1.0000," ) != std::string::npos );

  auto const j = nlohmann::json::parse( sweep_json( rows ) );
  REQUIRE( j.is_array() );
  CHECK( j.size() == 8u );
}

TEST_CASE( "sweep keeps failures in their rows" )
{
  sweep_config c;
  c.benchmarks = { "adder:8" };
  c.isas = { "TS0", "IS3" };
  c.machines = { "TS0" };
  c.row_size = 24u;
  auto const rows = sweep( c );
  REQUIRE( rows.size() == 2u );
  CHECK_FALSE( rows[0].error.empty() );
  CHECK_FALSE( rows[0].norm_code_size.has_value() );
  CHECK( rows[0].error.rfind( "RowOverflow", 0 ) == 0u );
  CHECK( sweep_csv( rows ).find( "adder8,TS0,TS0,failed," ) != std::string::npos );
}

TEST_CASE( "diagnosis names" )
{
  CHECK( std::string( error_kind( row_overflow_error( 600, 512 ) ) ) == "RowOverflow" );
  CHECK( std::string( error_kind( circular_dependency_error( { "g0", "g1" } ) ) ) == "CircularDependency" );
  CHECK( std::string( error_kind( parse_error( "x", 3 ) ) ) == "ParseError" );
  CHECK( std::string( error_kind( error( "x" ) ) ) == "Error" );
}
