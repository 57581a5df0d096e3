#include <pimflow/benchgen.hpp>
#include <pimflow/errors.hpp>
#include <pimflow/flow.hpp>
#include <pimflow/simulator.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

using namespace pimflow;

namespace
{

void write_output( std::string const& path, std::string const& text )
{
  if ( path.empty() || path == "-" )
  {
    std::cout << text;
    return;
  }
  std::ofstream out( path );
  if ( !out )
    throw error( "cannot write " + path );
  out << text;
}

// built-in IS3 covers every standard instruction a netlist may use; extra libraries add user instructions
instruction_set netlist_library( std::vector<std::string> const& extra )
{
  auto lib = builtin_set( "IS3" );
  for ( auto const& e : extra )
    lib = merge_sets( "netlist-library", lib, resolve_isa( e ) );
  return lib;
}

bit_vector parse_bits( std::string const& text, std::size_t expected )
{
  bit_vector bits;
  for ( char c : text )
  {
    if ( c == '0' || c == '1' )
      bits.push_back( c == '1' );
    else if ( c != '_' && c != ' ' )
      throw error( std::string( "input bits may only contain 0 and 1, got '" ) + c + "'" );
  }
  if ( bits.size() != expected )
    throw error( "program expects " + std::to_string( expected ) + " input bits, got " + std::to_string( bits.size() ) );
  return bits;
}

std::string format_bits( bit_vector const& bits )
{
  std::string s;
  for ( bool b : bits )
    s += b ? '1' : '0';
  return s;
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "pimflow: compile, map and simulate logic netlists for stateful in-memory computing" };
  app.require_subcommand( 1 );

  // compile
  auto* c_cmd = app.add_subcommand( "compile", "lower a netlist to an ISA and schedule it onto a row" );
  std::string c_netlist, c_isa, c_out, c_table, c_metrics;
  std::uint32_t c_row = default_row_size;
  std::vector<std::string> c_libs;
  c_cmd->add_option( "--netlist", c_netlist, "input netlist" )->required()->check( CLI::ExistingFile );
  c_cmd->add_option( "--isa", c_isa, "target ISA name or library file" )->required();
  c_cmd->add_option( "--row", c_row, "row size in cells" )->check( CLI::PositiveNumber );
  c_cmd->add_option( "--out", c_out, "program output (default stdout)" );
  c_cmd->add_option( "--lib", c_libs, "extra instruction libraries for parsing the netlist" );
  c_cmd->add_option( "--table", c_table, "microcode table for reporting metrics" )->check( CLI::ExistingFile );
  c_cmd->add_option( "--metrics", c_metrics, "write metrics JSON here (needs --table)" );

  // microgen
  auto* g_cmd = app.add_subcommand( "microgen", "generate the microcode table of an ISA for a machine" );
  std::string g_isa, g_machine, g_out;
  g_cmd->add_option( "--isa", g_isa, "ISA name or library file" )->required();
  g_cmd->add_option( "--machine", g_machine, "TS0, TS1 or machine file" )->required();
  g_cmd->add_option( "--out", g_out, "table output (default stdout)" );

  // run
  auto* r_cmd = app.add_subcommand( "run", "execute a program on one input vector" );
  std::string r_program, r_table, r_inputs, r_trace;
  r_cmd->add_option( "--program", r_program )->required()->check( CLI::ExistingFile );
  r_cmd->add_option( "--table", r_table )->required()->check( CLI::ExistingFile );
  r_cmd->add_option( "--inputs", r_inputs, "input bits, first character is the first input" )->required();
  r_cmd->add_option( "--trace", r_trace, "trace file (.json for a summary, otherwise CSV)" );

  // verify
  auto* v_cmd = app.add_subcommand( "verify", "check a program against its reference netlist" );
  std::string v_program, v_table, v_netlist;
  std::vector<std::string> v_libs;
  bool v_exhaustive = false;
  std::size_t v_vectors = 1000u;
  std::uint64_t v_seed = 1u;
  v_cmd->add_option( "--program", v_program )->required()->check( CLI::ExistingFile );
  v_cmd->add_option( "--table", v_table )->required()->check( CLI::ExistingFile );
  v_cmd->add_option( "--netlist", v_netlist )->required()->check( CLI::ExistingFile );
  v_cmd->add_option( "--lib", v_libs, "extra instruction libraries for parsing the netlist" );
  auto* v_ex = v_cmd->add_flag( "--exhaustive", v_exhaustive, "all 2^n input vectors" );
  v_cmd->add_option( "--vectors", v_vectors, "number of random vectors" )->excludes( v_ex );
  v_cmd->add_option( "--seed", v_seed, "random vector seed" )->excludes( v_ex );

  // bench
  auto* b_cmd = app.add_subcommand( "bench", "generate a benchmark netlist" );
  std::string b_kind, b_base = "IS2", b_out;
  std::uint32_t b_width = 8u, b_len = 5u, b_dim = 5u, b_bits = 8u, b_gates = 30u, b_inputs = 10u;
  std::uint64_t b_seed = 1u;
  b_cmd->add_option( "--kind", b_kind )->required()->check( CLI::IsMember( { "adder", "mult", "vmm", "random" } ) );
  b_cmd->add_option( "--width", b_width, "adder/multiplier operand width" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--len", b_len, "vmm vector length" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--dim", b_dim, "vmm matrix columns" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--bits", b_bits, "vmm element width" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--gates", b_gates, "random gate count" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--inputs", b_inputs, "random input count" )->check( CLI::PositiveNumber );
  b_cmd->add_option( "--seed", b_seed, "random seed" );
  b_cmd->add_option( "--base", b_base, "instruction set the netlist is written in" );
  b_cmd->add_option( "--out", b_out, "netlist output (default stdout)" );

  // sweep
  auto* s_cmd = app.add_subcommand( "sweep", "metrics over benchmarks x ISAs x machines" );
  std::string s_config, s_out, s_json;
  s_cmd->add_option( "--config", s_config )->required()->check( CLI::ExistingFile );
  s_cmd->add_option( "--out", s_out, "CSV report (default stdout)" );
  s_cmd->add_option( "--json", s_json, "JSON report" );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& e )
  {
    auto const code = app.exit( e );
    return code == 0 ? 0 : 2;
  }

  try
  {
    if ( *c_cmd )
    {
      auto const isa = resolve_isa( c_isa );
      auto libs = c_libs;
      if ( std::filesystem::exists( c_isa ) )
        libs.push_back( c_isa );
      auto const ntk = load_netlist( c_netlist, netlist_library( libs ) );
      auto const program = compile( ntk, isa, c_row );
      write_output( c_out, emit_program( program ) );
      std::cerr << "compiled " << ntk.gates().size() << " gates to " << program.code_size() << " " << isa.name()
                << " instructions, peak " << check_liveness( program ).peak_live << " of " << c_row << " cells\n";
      if ( !c_table.empty() )
      {
        auto m = compute_metrics( program, load_microcode( c_table ) );
        m.benchmark = ntk.model().empty() ? std::filesystem::path( c_netlist ).stem().string() : ntk.model();
        if ( c_metrics.empty() )
          std::cerr << metrics_json( m );
        else
          write_output( c_metrics, metrics_json( m ) );
      }
    }
    else if ( *g_cmd )
    {
      auto const table = build_microcode_table( resolve_isa( g_isa ), resolve_machine( g_machine ) );
      write_output( g_out, serialize_microcode( table ) );
    }
    else if ( *r_cmd )
    {
      auto const program = load_program( r_program );
      auto const table = load_microcode( r_table );
      auto const inputs = parse_bits( r_inputs, program.input_placement.size() );
      auto const result = run_program( program, table, inputs, !r_trace.empty() );
      for ( std::size_t j = 0u; j < program.output_placement.size(); ++j )
        std::cout << program.output_placement[j].first << " = " << ( result.outputs[j] ? 1 : 0 ) << "\n";
      std::cout << "outputs " << format_bits( result.outputs ) << "\n";
      std::cout << "cycles " << result.trace.total_cycles() << " (compute " << result.trace.compute_cycles << ", init "
                << result.trace.init_cycles << ")\n";
      if ( !r_trace.empty() )
      {
        auto const ext = std::filesystem::path( r_trace ).extension();
        write_output( r_trace, ext == ".json" ? trace_summary_json( result.trace ) : trace_csv( result.trace ) );
      }
    }
    else if ( *v_cmd )
    {
      auto const program = load_program( v_program );
      auto const table = load_microcode( v_table );
      auto const ntk = load_netlist( v_netlist, netlist_library( v_libs ) );
      auto const n = ntk.inputs().size();
      auto const vectors = v_exhaustive ? exhaustive_vectors( n ) : random_vectors( n, v_vectors, v_seed );
      auto const report = verify_program( program, table, ntk, vectors );
      std::cout << "vectors " << report.vectors << ", mismatches " << report.mismatches.size() << ", cycles/vector "
                << report.total_cycles() << "\n";
      for ( std::size_t k = 0u; k < report.mismatches.size() && k < 5u; ++k )
      {
        auto const& mm = report.mismatches[k];
        std::cout << "  inputs " << format_bits( mm.inputs ) << " expected " << format_bits( mm.expected );
        if ( mm.fault.empty() )
          std::cout << " got " << format_bits( mm.actual ) << "\n";
        else
          std::cout << " fault: " << mm.fault << "\n";
      }
      std::cout << ( report.ok() ? "PASS" : "FAIL" ) << "\n";
      return report.ok() ? 0 : 1;
    }
    else if ( *b_cmd )
    {
      benchmark_spec spec;
      if ( b_kind == "adder" )
        spec = benchmark_spec::adder( b_width );
      else if ( b_kind == "mult" )
        spec = benchmark_spec::multiplier( b_width );
      else if ( b_kind == "vmm" )
        spec = benchmark_spec::vmm( b_len, b_dim, b_bits );
      else
        spec = benchmark_spec::random( b_gates, b_inputs, b_seed );
      write_output( b_out, write_netlist( generate( spec, resolve_isa( b_base ) ) ) );
    }
    else if ( *s_cmd )
    {
      auto const rows = sweep( load_sweep_config( s_config ) );
      write_output( s_out, sweep_csv( rows ) );
      if ( !s_json.empty() )
        write_output( s_json, sweep_json( rows ) );
      std::size_t failed = 0u;
      for ( auto const& r : rows )
        failed += r.error.empty() ? 0u : 1u;
      if ( failed != 0u )
        std::cerr << failed << " of " << rows.size() << " sweep cells failed\n";
    }
  }
  catch ( error const& e )
  {
    std::cerr << "error: " << error_kind( e ) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
