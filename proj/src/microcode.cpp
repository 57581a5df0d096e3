#include <pimflow/errors.hpp>
#include <pimflow/microcode.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace pimflow
{

std::string cell_ref::to_string() const
{
  switch ( space )
  {
  case cell_space::input:
    return "IN:" + std::to_string( index );
  case cell_space::output:
    return "OUT:" + std::to_string( index );
  default:
    return "S:" + std::to_string( index );
  }
}

cell_ref cell_ref::parse( std::string_view text )
{
  auto const colon = text.find( ':' );
  if ( colon == std::string_view::npos || colon + 1u == text.size() )
    throw microcode_error( "bad cell reference '" + std::string( text ) + "'" );
  auto const prefix = text.substr( 0u, colon );
  auto const digits = text.substr( colon + 1u );
  if ( !std::all_of( digits.begin(), digits.end(), []( unsigned char c ) { return std::isdigit( c ); } ) ||
       digits.size() > 9u )
    throw microcode_error( "bad cell reference '" + std::string( text ) + "'" );
  cell_ref ref;
  ref.index = static_cast<std::uint32_t>( std::stoul( std::string( digits ) ) );
  if ( prefix == "IN" )
    ref.space = cell_space::input;
  else if ( prefix == "OUT" )
    ref.space = cell_space::output;
  else if ( prefix == "S" )
    ref.space = cell_space::scratch;
  else
    throw microcode_error( "bad cell reference '" + std::string( text ) + "'" );
  return ref;
}

microcode_entry const* microcode_table::find( std::string_view instruction ) const
{
  auto it = std::find_if( entries.begin(), entries.end(), [&]( auto const& e ) { return e.instruction == instruction; } );
  return it == entries.end() ? nullptr : &*it;
}

microcode_entry generate_microcode( instruction const& instr, target_machine const& machine,
                                    template_registry const& registry, std::uint32_t scratch_cap )
{
  auto const tmpl = find_expansion_template( instr, machine.primitives, registry );
  auto const& body = tmpl.body;
  auto const idx = index_netlist( body );

  std::map<std::uint32_t, cell_ref> where;
  for ( std::uint32_t i = 0u; i < idx.inputs.size(); ++i )
    where[idx.inputs[i]] = { cell_space::input, i };
  for ( std::uint32_t j = 0u; j < idx.outputs.size(); ++j )
  {
    if ( !where.emplace( idx.outputs[j], cell_ref{ cell_space::output, j } ).second )
      throw microcode_error( "template for " + instr.name + " routes one signal to two outputs" );
  }

  microcode_entry entry;
  entry.instruction = instr.name;
  std::vector<micro_op> computes;
  std::vector<cell_ref> init_true, init_false;
  for ( auto const& [g, o] : idx.order )
  {
    auto const& gate = idx.gates[g];
    auto const out_sig = gate.outputs[o];
    auto it = where.find( out_sig );
    if ( it == where.end() )
      it = where.emplace( out_sig, cell_ref{ cell_space::scratch, entry.scratch_need++ } ).first;
    micro_op op;
    op.kind = op_kind::compute;
    op.primitive = gate.instr->name;
    for ( auto in : gate.inputs )
      op.inputs.push_back( where.at( in ) );
    op.output = it->second;
    ( machine.init_value( op.primitive ) ? init_true : init_false ).push_back( op.output );
    computes.push_back( std::move( op ) );
  }
  if ( entry.scratch_need > scratch_cap )
  {
    throw microcode_error( instr.name + " needs " + std::to_string( entry.scratch_need ) +
                           " scratch cells, more than the cap of " + std::to_string( scratch_cap ) );
  }

  for ( bool value : { true, false } )
  {
    auto& cells = value ? init_true : init_false;
    if ( cells.empty() )
      continue;
    micro_op init;
    init.kind = op_kind::init;
    init.cells = std::move( cells );
    init.value = value;
    entry.ops.push_back( std::move( init ) );
    ++entry.ti;
  }
  entry.tc = static_cast<std::uint32_t>( computes.size() );
  std::move( computes.begin(), computes.end(), std::back_inserter( entry.ops ) );
  return entry;
}

microcode_table build_microcode_table( instruction_set const& isa, target_machine const& machine,
                                       template_registry const& registry )
{
  microcode_table table;
  table.machine = machine;
  for ( auto const& instr : isa.instructions() )
  {
    try
    {
      table.entries.push_back( generate_microcode( instr, machine, registry ) );
    }
    catch ( no_expansion_path_error const& )
    {
      throw;
    }
    catch ( error const& e )
    {
      throw microcode_error( "instruction " + instr.name + ": " + e.what() );
    }
    table.scratch_need = std::max( table.scratch_need, table.entries.back().scratch_need );
  }
  return table;
}

latency instruction_latency( instruction const& instr, target_machine const& machine )
{
  auto const entry = generate_microcode( instr, machine );
  return { entry.tc, entry.ti };
}

namespace
{

bool is_builtin_machine( target_machine const& m )
{
  if ( m.name != "TS0" && m.name != "TS1" )
    return false;
  auto const b = builtin_machine( m.name );
  return b.primitives == m.primitives && b.init_values == m.init_values;
}

nlohmann::json refs_to_json( std::vector<cell_ref> const& refs )
{
  auto a = nlohmann::json::array();
  for ( auto const& r : refs )
    a.push_back( r.to_string() );
  return a;
}

std::vector<cell_ref> refs_from_json( nlohmann::json const& a )
{
  std::vector<cell_ref> refs;
  for ( auto const& r : a )
    refs.push_back( cell_ref::parse( r.get<std::string>() ) );
  return refs;
}

} // namespace

std::string serialize_microcode( microcode_table const& table )
{
  nlohmann::json j;
  j["machine"] = table.machine.name;
  j["scratch_need"] = table.scratch_need;
  if ( !is_builtin_machine( table.machine ) )
    j["machine_definition"] = nlohmann::json::parse( serialize_machine( table.machine ) );
  auto entries = nlohmann::json::array();
  for ( auto const& e : table.entries )
  {
    auto ops = nlohmann::json::array();
    for ( auto const& op : e.ops )
    {
      nlohmann::json o;
      if ( op.kind == op_kind::init )
      {
        o["kind"] = "INIT";
        o["cells"] = refs_to_json( op.cells );
        o["value"] = op.value ? 1 : 0;
      }
      else
      {
        o["kind"] = "COMPUTE";
        o["primitive"] = op.primitive;
        o["inputs"] = refs_to_json( op.inputs );
        o["output"] = op.output.to_string();
      }
      ops.push_back( std::move( o ) );
    }
    entries.push_back( { { "instr", e.instruction }, { "tc", e.tc }, { "ti", e.ti }, { "ops", std::move( ops ) } } );
  }
  j["entries"] = std::move( entries );
  return j.dump( 2 ) + "\n";
}

microcode_table parse_microcode( std::string_view json_text )
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse( json_text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw parse_error( std::string( "microcode table: " ) + e.what(), 0u );
  }
  microcode_table table;
  try
  {
    auto const name = j.at( "machine" ).get<std::string>();
    table.machine = j.contains( "machine_definition" ) ? parse_machine( j.at( "machine_definition" ).dump() )
                                                       : builtin_machine( name );
    table.machine.name = name;
    for ( auto const& je : j.at( "entries" ) )
    {
      microcode_entry e;
      e.instruction = je.at( "instr" ).get<std::string>();
      std::uint32_t scratch = 0u;
      auto note_scratch = [&]( cell_ref const& r ) {
        if ( r.space == cell_space::scratch )
          scratch = std::max( scratch, r.index + 1u );
      };
      for ( auto const& jo : je.at( "ops" ) )
      {
        micro_op op;
        auto const kind = jo.at( "kind" ).get<std::string>();
        if ( kind == "INIT" )
        {
          op.kind = op_kind::init;
          op.cells = refs_from_json( jo.at( "cells" ) );
          op.value = jo.at( "value" ).get<int>() != 0;
          std::for_each( op.cells.begin(), op.cells.end(), note_scratch );
          ++e.ti;
        }
        else if ( kind == "COMPUTE" )
        {
          op.kind = op_kind::compute;
          op.primitive = jo.at( "primitive" ).get<std::string>();
          if ( !table.machine.primitives.contains( op.primitive ) )
            throw microcode_error( "entry " + e.instruction + " uses unknown primitive " + op.primitive );
          op.inputs = refs_from_json( jo.at( "inputs" ) );
          op.output = cell_ref::parse( jo.at( "output" ).get<std::string>() );
          if ( op.inputs.size() != table.machine.primitives.at( op.primitive ).num_inputs )
            throw microcode_error( "entry " + e.instruction + " applies " + op.primitive + " to the wrong operand count" );
          std::for_each( op.inputs.begin(), op.inputs.end(), note_scratch );
          note_scratch( op.output );
          ++e.tc;
        }
        else
        {
          throw microcode_error( "entry " + e.instruction + " has an op of unknown kind " + kind );
        }
        e.ops.push_back( std::move( op ) );
      }
      if ( je.at( "tc" ).get<std::uint32_t>() != e.tc || je.at( "ti" ).get<std::uint32_t>() != e.ti )
        throw microcode_error( "entry " + e.instruction + " states tc/ti that disagree with its ops" );
      e.scratch_need = scratch;
      table.scratch_need = std::max( table.scratch_need, scratch );
      table.entries.push_back( std::move( e ) );
    }
    if ( j.contains( "scratch_need" ) )
      table.scratch_need = std::max( table.scratch_need, j.at( "scratch_need" ).get<std::uint32_t>() );
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw parse_error( std::string( "microcode table: " ) + e.what(), 0u );
  }
  return table;
}

microcode_table load_microcode( std::filesystem::path const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw error( "cannot open microcode table " + path.string() );
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_microcode( ss.str() );
}

} // namespace pimflow
