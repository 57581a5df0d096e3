#include <pimflow/errors.hpp>
#include <pimflow/flow.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <variant>

namespace pimflow
{

compiled_program compile( netlist const& ntk, instruction_set const& isa, std::uint32_t row_size,
                          template_registry const& registry )
{
  auto const lowered = lower_to_isa( ntk, isa, registry );
  if ( auto const report = detect_cycles( lowered ); !report.ok() )
    throw circular_dependency_error( report.gates );
  return schedule( build_dag( lowered ), row_size, isa.name() );
}

metrics compute_metrics( compiled_program const& program, microcode_table const& table )
{
  metrics m;
  m.isa = program.isa_name;
  m.machine = table.machine.name;
  m.code_size = program.code_size();
  m.scratch_need = table.scratch_need;
  for ( auto const& step : program.steps )
  {
    auto const* entry = table.find( step.instruction );
    if ( entry == nullptr )
      throw microcode_error( "microcode table for " + table.machine.name + " has no entry for " + step.instruction );
    m.compute_cycles += entry->tc;
    m.init_cycles += entry->ti;
  }
  m.total_cycles = m.compute_cycles + m.init_cycles;
  if ( !program.steps.empty() || !program.input_placement.empty() )
    m.peak_live_cells = check_liveness( program ).peak_live;
  return m;
}

namespace
{

bool looks_like_path( std::string const& s )
{
  return s.find( '/' ) != std::string::npos || s.find( '.' ) != std::string::npos;
}

std::string read_text( std::filesystem::path const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw error( "cannot open " + path.string() );
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

instruction_set resolve_isa( std::string const& name_or_path )
{
  if ( looks_like_path( name_or_path ) )
    return load_library( name_or_path );
  return builtin_set( name_or_path );
}

target_machine resolve_machine( std::string const& name_or_path )
{
  if ( looks_like_path( name_or_path ) )
    return load_machine( name_or_path );
  return builtin_machine( name_or_path );
}

sweep_config parse_sweep_config( std::string_view json_text )
{
  sweep_config c;
  try
  {
    auto const j = nlohmann::json::parse( json_text );
    c.benchmarks = j.at( "benchmarks" ).get<std::vector<std::string>>();
    c.isas = j.at( "isas" ).get<std::vector<std::string>>();
    c.machines = j.at( "machines" ).get<std::vector<std::string>>();
    c.row_size = j.value( "row_size", default_row_size );
    c.base_set = j.value( "base_set", std::string( "IS2" ) );
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw parse_error( std::string( "sweep config: " ) + e.what(), 0u );
  }
  if ( c.benchmarks.empty() || c.isas.empty() || c.machines.empty() )
    throw parse_error( "sweep config needs non-empty benchmarks, isas and machines", 0u );
  if ( c.row_size == 0u )
    throw parse_error( "sweep config row_size must be positive", 0u );
  return c;
}

sweep_config load_sweep_config( std::filesystem::path const& path )
{
  return parse_sweep_config( read_text( path ) );
}

std::vector<sweep_row> sweep( sweep_config const& config )
{
  std::vector<instruction_set> isas;
  for ( auto const& s : config.isas )
    isas.push_back( resolve_isa( s ) );
  std::vector<target_machine> machines;
  for ( auto const& s : config.machines )
    machines.push_back( resolve_machine( s ) );
  auto const base = resolve_isa( config.base_set );
  auto library = merge_sets( "netlist-library", builtin_set( "IS3" ), base );
  for ( auto const& isa : isas )
    library = merge_sets( "netlist-library", library, isa );

  // microcode tables depend only on (isa, machine)
  std::map<std::pair<std::size_t, std::size_t>, std::variant<microcode_table, std::string>> tables;
  for ( std::size_t i = 0u; i < isas.size(); ++i )
  {
    for ( std::size_t m = 0u; m < machines.size(); ++m )
    {
      try
      {
        tables.emplace( std::make_pair( i, m ), build_microcode_table( isas[i], machines[m] ) );
      }
      catch ( error const& e )
      {
        tables.emplace( std::make_pair( i, m ), std::string( error_kind( e ) ) + ": " + e.what() );
      }
    }
  }

  std::vector<sweep_row> rows;
  for ( auto const& bench : config.benchmarks )
  {
    std::optional<netlist> ntk;
    std::string bench_error;
    std::string bench_name = bench;
    try
    {
      if ( std::filesystem::exists( bench ) )
      {
        ntk = load_netlist( bench, library );
        bench_name = ntk->model().empty() ? std::filesystem::path( bench ).stem().string() : ntk->model();
      }
      else
      {
        auto const spec = parse_benchmark_spec( bench );
        bench_name = spec.name();
        ntk = generate( spec, base );
      }
    }
    catch ( error const& e )
    {
      bench_error = std::string( error_kind( e ) ) + ": " + e.what();
    }

    auto const first_row = rows.size();
    for ( std::size_t i = 0u; i < isas.size(); ++i )
    {
      std::optional<compiled_program> program;
      std::string compile_error = bench_error;
      if ( compile_error.empty() )
      {
        try
        {
          program = compile( *ntk, isas[i], config.row_size );
        }
        catch ( error const& e )
        {
          compile_error = std::string( error_kind( e ) ) + ": " + e.what();
        }
      }
      for ( std::size_t m = 0u; m < machines.size(); ++m )
      {
        sweep_row row;
        row.m.benchmark = bench_name;
        row.m.isa = isas[i].name();
        row.m.machine = machines[m].name;
        row.error = compile_error;
        auto const& table = tables.at( { i, m } );
        if ( row.error.empty() && std::holds_alternative<std::string>( table ) )
          row.error = std::get<std::string>( table );
        if ( row.error.empty() )
        {
          try
          {
            auto const name = row.m.benchmark;
            row.m = compute_metrics( *program, std::get<microcode_table>( table ) );
            row.m.benchmark = name;
          }
          catch ( error const& e )
          {
            row.error = std::string( error_kind( e ) ) + ": " + e.what();
          }
        }
        rows.push_back( std::move( row ) );
      }
    }

    sweep_row const* baseline = nullptr;
    for ( auto r = first_row; r < rows.size(); ++r )
      if ( rows[r].m.isa == "TS0" && rows[r].m.machine == "TS0" && rows[r].error.empty() )
        baseline = &rows[r];
    if ( baseline != nullptr )
    {
      auto const base_cs = static_cast<double>( baseline->m.code_size );
      auto const base_tc = static_cast<double>( baseline->m.total_cycles );
      for ( auto r = first_row; r < rows.size(); ++r )
      {
        if ( !rows[r].error.empty() )
          continue;
        if ( base_cs > 0.0 )
          rows[r].norm_code_size = static_cast<double>( rows[r].m.code_size ) / base_cs;
        if ( base_tc > 0.0 )
          rows[r].norm_total_cycles = static_cast<double>( rows[r].m.total_cycles ) / base_tc;
      }
    }
  }
  return rows;
}

namespace
{

std::string csv_field( std::string s )
{
  if ( s.find_first_of( ",\"\n" ) == std::string::npos )
    return s;
  std::string out = "\"";
  for ( char c : s )
  {
    if ( c == '"' )
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string fixed( std::optional<double> v )
{
  if ( !v )
    return "";
  std::ostringstream os;
  os << std::fixed << std::setprecision( 4 ) << *v;
  return os.str();
}

nlohmann::json to_json( metrics const& m )
{
  return { { "benchmark", m.benchmark },         { "isa", m.isa },
           { "machine", m.machine },             { "code_size", m.code_size },
           { "compute_cycles", m.compute_cycles }, { "init_cycles", m.init_cycles },
           { "total_cycles", m.total_cycles },   { "peak_live_cells", m.peak_live_cells },
           { "scratch_need", m.scratch_need } };
}

} // namespace

std::string sweep_csv( std::vector<sweep_row> const& rows )
{
  std::ostringstream os;
  os << "benchmark,isa,machine,status,code_size,compute_cycles,init_cycles,total_cycles,peak_live_cells,scratch_need,"
        "norm_code_size,norm_total_cycles,error\n";
  for ( auto const& r : rows )
  {
    auto const& m = r.m;
    os << csv_field( m.benchmark ) << ',' << csv_field( m.isa ) << ',' << csv_field( m.machine ) << ','
       << ( r.error.empty() ? "ok" : "failed" ) << ',';
    if ( r.error.empty() )
      os << m.code_size << ',' << m.compute_cycles << ',' << m.init_cycles << ',' << m.total_cycles << ','
         << m.peak_live_cells << ',' << m.scratch_need << ',';
    else
      os << ",,,,,,";
    os << fixed( r.norm_code_size ) << ',' << fixed( r.norm_total_cycles ) << ',' << csv_field( r.error ) << '\n';
  }
  return os.str();
}

std::string sweep_json( std::vector<sweep_row> const& rows )
{
  auto a = nlohmann::json::array();
  for ( auto const& r : rows )
  {
    auto j = to_json( r.m );
    j["status"] = r.error.empty() ? "ok" : "failed";
    if ( !r.error.empty() )
      j["error"] = r.error;
    if ( r.norm_code_size )
      j["norm_code_size"] = *r.norm_code_size;
    if ( r.norm_total_cycles )
      j["norm_total_cycles"] = *r.norm_total_cycles;
    a.push_back( std::move( j ) );
  }
  return a.dump( 2 ) + "\n";
}

std::string metrics_json( metrics const& m )
{
  return to_json( m ).dump( 2 ) + "\n";
}

} // namespace pimflow
