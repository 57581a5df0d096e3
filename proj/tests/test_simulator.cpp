#include <doctest.h>

#include "support.hpp"

#include <pimflow/errors.hpp>
#include <pimflow/flow.hpp>
#include <pimflow/simulator.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>

using namespace pimflow;
using test_support::bits_of;
using test_support::oracle_eval;

namespace
{

compiled_program map_as_is( netlist const& ntk, std::string const& isa_name, std::uint32_t row = 512u )
{
  return schedule( build_dag( ntk ), row, isa_name );
}

std::size_t count_lines( std::string const& s )
{
  return static_cast<std::size_t>( std::count( s.begin(), s.end(), '\n' ) );
}

} // namespace

TEST_CASE( "conditional switching" )
{
  auto const ts0 = builtin_machine( "TS0" );
  auto const& nor = ts0.primitives.at( "NOR2" );
  row_state row( 4 );
  row.set( 0, false );
  row.set( 1, false );

  resolved_op op;
  op.kind = op_kind::compute;
  op.primitive = &nor;
  op.init_value = true;
  op.inputs = { 0, 1 };
  op.output = 2;
  // output never initialized
  CHECK_THROWS_AS( execute_micro_op( row, op ), simulation_fault );

  row.set( 2, true );
  execute_micro_op( row, op );
  CHECK( row.value( 2 ) );

  // a cell already switched away from the init value stays put
  row.set( 1, true );
  row.set( 2, false );
  execute_micro_op( row, op );
  CHECK_FALSE( row.value( 2 ) );
  row.set( 0, true );
  row.set( 1, false );
  row.set( 3, true );
  op.output = 3;
  execute_micro_op( row, op );
  CHECK_FALSE( row.value( 3 ) );

  resolved_op undefined_read = op;
  undefined_read.inputs = { 0, 3 };
  row_state fresh( 4 );
  fresh.set( 0, true );
  fresh.set( 2, true );
  undefined_read.output = 2;
  try
  {
    execute_micro_op( fresh, undefined_read, 7u );
    FAIL( "expected a fault" );
  }
  catch ( simulation_fault const& f )
  {
    CHECK( f.cycle() == 7u );
    CHECK( f.cell() == 3u );
  }

  resolved_op init;
  init.kind = op_kind::init;
  init.cells = { 0, 1, 2, 3 };
  init.value = false;
  execute_micro_op( fresh, init );
  for ( std::size_t c = 0; c < 4; ++c )
  {
    CHECK( fresh.defined( c ) );
    CHECK_FALSE( fresh.value( c ) );
  }
}

TEST_CASE( "NOR half adder runs in ten cycles" )
{
  auto const ntk = load_netlist( test_support::data( "ha_nor.net" ), builtin_set( "TS0" ) );
  auto const program = map_as_is( ntk, "TS0" );
  auto const table = build_microcode_table( builtin_set( "TS0" ), builtin_machine( "TS0" ) );
  for ( std::uint64_t v = 0; v < 4; ++v )
  {
    auto const in = bits_of( v, 2 );
    auto const r = run_program( program, table, in );
    bool const a = v & 1, b = v & 2;
    CHECK( r.outputs == bit_vector{ a != b, a && b } );
    CHECK( r.trace.compute_cycles == 5u );
    CHECK( r.trace.init_cycles == 5u );
    CHECK( r.trace.total_cycles() == 10u );
    CHECK( r.trace.instruction_count == 5u );
    CHECK( r.trace.records.size() == 10u );
  }
}

TEST_CASE( "two-instruction half adder with an external table" )
{
  auto const lib = load_library( test_support::data( "xor_and.json" ) );
  auto const ntk = load_netlist( test_support::data( "ha_xor_and.net" ), lib );
  auto const program = compile( ntk, lib );
  CHECK( program.code_size() == 2u );
  auto const table = load_microcode( test_support::data( "ts0_external_latency.json" ) );
  auto const r = run_program( program, table, { true, true } );
  CHECK( r.outputs == bit_vector{ false, true } );
  CHECK( r.trace.total_cycles() == 11u );
  auto const report = verify_program( program, table, ntk, exhaustive_vectors( 2 ) );
  CHECK( report.ok() );
  CHECK( report.total_cycles() == 11u );
}

TEST_CASE( "traces" )
{
  auto const ntk = load_netlist( test_support::data( "ha_nor.net" ), builtin_set( "TS0" ) );
  auto const program = map_as_is( ntk, "TS0" );
  auto const table = build_microcode_table( builtin_set( "TS0" ), builtin_machine( "TS0" ) );
  auto const r = run_program( program, table, { true, false } );
  auto const csv = trace_csv( r.trace );
  CHECK( csv.rfind( "cycle,instr_index,instr_name,op_kind,cells,values\n", 0 ) == 0u );
  CHECK( count_lines( csv ) == 11u );
  for ( std::size_t k = 0; k < r.trace.records.size(); ++k )
    CHECK( r.trace.records[k].cycle == k );
  CHECK( r.trace.records[0].kind == op_kind::init );
  CHECK( r.trace.records[1].kind == op_kind::compute );

  auto const j = nlohmann::json::parse( trace_summary_json( r.trace ) );
  CHECK( j.at( "total_cycles" ).get<int>() == 10 );
  CHECK( j.at( "compute_cycles" ).get<int>() == 5 );

  auto const quiet = run_program( program, table, { true, false }, false );
  CHECK( quiet.trace.records.empty() );
  CHECK( quiet.trace.total_cycles() == 10u );
  CHECK( quiet.outputs == r.outputs );
}

TEST_CASE( "faults" )
{
  auto const table = build_microcode_table( builtin_set( "TS0" ), builtin_machine( "TS0" ) );
  // reads cell 2 before anything wrote it
  auto const bad = parse_program( ".isa TS0\n.row 4\n.place_in a 0\n.place_out y 1\nINSTR NOR2 in=0,2 out=1\n" );
  CHECK_THROWS_AS( run_program( bad, table, { true } ), simulation_fault );

  auto const unknown = parse_program( ".isa IS2\n.row 4\n.place_in a 0\n.place_out y 1\nINSTR XOR2 in=0,0 out=1\n" );
  CHECK_THROWS_AS( run_program( unknown, table, { true } ), error );
  CHECK_THROWS( run_program( bad, table, { true, false } ) );

  // verify counts traps as mismatches
  auto const ntk = parse_netlist( ".inputs a\n.outputs y\n.gate NOT a -> y\n", builtin_set( "TS0" ) );
  auto const report = verify_program( bad, table, ntk, exhaustive_vectors( 1 ) );
  CHECK( report.mismatches.size() == 2u );
  CHECK_FALSE( report.mismatches[0].fault.empty() );
}

TEST_CASE( "removing an INIT is caught" )
{
  auto const is2 = builtin_set( "IS2" );
  auto table = build_microcode_table( is2, builtin_machine( "TS0" ) );
  auto const program = parse_program( ".isa IS2\n.row 4\n.place_in a 0\n.place_in b 1\n.place_out y 2\nINSTR AND2 in=0,1 out=2\n" );
  auto const ntk = parse_netlist( ".inputs a b\n.outputs y\n.gate AND2 a b -> y\n", is2 );
  CHECK( verify_program( program, table, ntk, exhaustive_vectors( 2 ) ).ok() );
  for ( auto& e : table.entries )
    if ( e.instruction == "AND2" )
    {
      e.ops.erase( e.ops.begin() );
      e.ti = 0;
    }
  CHECK_FALSE( verify_program( program, table, ntk, exhaustive_vectors( 2 ) ).ok() );
}

TEST_CASE( "vector sets" )
{
  auto const ex = exhaustive_vectors( 3 );
  REQUIRE( ex.size() == 8u );
  for ( std::uint64_t k = 0; k < 8; ++k )
    CHECK( ex[k] == bits_of( k, 3 ) );
  auto const r1 = random_vectors( 40, 10, 5 );
  CHECK( r1.size() == 10u );
  CHECK( r1 == random_vectors( 40, 10, 5 ) );
  CHECK( r1 != random_vectors( 40, 10, 6 ) );
}

TEST_CASE( "end-to-end pipeline on random netlists" )
{
  std::mt19937 rng( 4242 );
  auto const pool = builtin_set( "IS3" );
  std::vector<std::string> const isas{ "TS0", "TS1", "IS2", "IS3" };
  std::vector<std::string> const machines{ "TS0", "TS1" };
  std::map<std::pair<std::string, std::string>, microcode_table> tables;
  for ( auto const& i : isas )
    for ( auto const& m : machines )
      tables.emplace( std::make_pair( i, m ), build_microcode_table( builtin_set( i ), builtin_machine( m ) ) );

  for ( int k = 0; k < 25; ++k )
  {
    auto const ntk = test_support::random_dag( rng, pool, 2 + rng() % 8, 1 + rng() % 30 );
    auto const n = ntk.inputs().size();
    for ( auto const& i : isas )
    {
      auto const program = compile( ntk, builtin_set( i ) );
      for ( auto const& m : machines )
      {
        CAPTURE( k );
        CAPTURE( i );
        CAPTURE( m );
        auto const& table = tables.at( { i, m } );
        auto const report = verify_program( program, table, ntk, exhaustive_vectors( n ) );
        CHECK( report.ok() );
        for ( std::uint64_t v = 0; v < ( 1u << n ); v += 1 + rng() % 7 )
        {
          auto const r = run_program( program, table, bits_of( v, n ), false );
          CHECK( r.outputs == oracle_eval( ntk, bits_of( v, n ) ) );
          CHECK( r.trace.total_cycles() == report.total_cycles() );
        }
      }
    }
  }
}
