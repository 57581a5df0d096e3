#include <pimflow/errors.hpp>
#include <pimflow/isa.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

namespace pimflow
{

namespace
{

bool bit( std::uint64_t row, std::uint32_t var )
{
  return ( row >> var ) & 1u;
}

std::uint32_t popcount( std::uint64_t row, std::uint32_t n )
{
  std::uint32_t c = 0u;
  for ( std::uint32_t i = 0u; i < n; ++i )
    c += bit( row, i );
  return c;
}

instruction nary( std::string name, std::uint32_t n, std::function<bool( std::uint64_t )> fn )
{
  return make_instruction( std::move( name ), n, { std::move( fn ) } );
}

instruction or_n( std::uint32_t n ) { return nary( "OR" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) > 0u; } ); }
instruction nor_n( std::uint32_t n ) { return nary( "NOR" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) == 0u; } ); }
instruction and_n( std::uint32_t n ) { return nary( "AND" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) == n; } ); }
instruction nand_n( std::uint32_t n ) { return nary( "NAND" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) != n; } ); }
instruction xor_n( std::uint32_t n ) { return nary( "XOR" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) % 2u == 1u; } ); }
instruction xnor_n( std::uint32_t n ) { return nary( "XNOR" + std::to_string( n ), n, [n]( auto r ) { return popcount( r, n ) % 2u == 0u; } ); }

std::vector<instruction> ts0_instructions()
{
  return { nary( "NOT", 1u, []( auto r ) { return !bit( r, 0u ); } ), nor_n( 2u ) };
}

std::vector<instruction> ts1_instructions()
{
  auto v = ts0_instructions();
  v.push_back( or_n( 2u ) );
  v.push_back( and_n( 2u ) );
  return v;
}

std::vector<instruction> is2_instructions()
{
  auto v = ts1_instructions();
  v.push_back( nand_n( 2u ) );
  v.push_back( xor_n( 2u ) );
  v.push_back( xnor_n( 2u ) );
  v.push_back( nary( "IMPLIES", 2u, []( auto r ) { return !bit( r, 0u ) || bit( r, 1u ); } ) );
  v.push_back( nary( "NOT-IMPLIES", 2u, []( auto r ) { return bit( r, 0u ) && !bit( r, 1u ); } ) );
  // input 0 is the select line: MUX(s, a, b) = s ? a : b
  v.push_back( nary( "MUX", 3u, []( auto r ) { return bit( r, 0u ) ? bit( r, 1u ) : bit( r, 2u ); } ) );
  v.push_back( make_instruction( "HA", 2u,
                                 { []( auto r ) { return bit( r, 0u ) != bit( r, 1u ); },
                                   []( auto r ) { return bit( r, 0u ) && bit( r, 1u ); } } ) );
  v.push_back( make_instruction( "HS", 2u,
                                 { []( auto r ) { return bit( r, 0u ) != bit( r, 1u ); },
                                   []( auto r ) { return !bit( r, 0u ) && bit( r, 1u ); } } ) );
  return v;
}

std::vector<instruction> is3_instructions()
{
  auto v = is2_instructions();
  for ( std::uint32_t n : { 3u, 4u } )
  {
    v.push_back( nor_n( n ) );
    v.push_back( or_n( n ) );
    v.push_back( and_n( n ) );
    v.push_back( nand_n( n ) );
    v.push_back( xor_n( n ) );
    v.push_back( xnor_n( n ) );
  }
  return v;
}

std::size_t line_of_offset( std::string_view text, std::size_t offset )
{
  offset = std::min( offset, text.size() );
  return 1u + static_cast<std::size_t>( std::count( text.begin(), text.begin() + static_cast<std::ptrdiff_t>( offset ), '\n' ) );
}

nlohmann::json parse_json( std::string_view text )
{
  try
  {
    return nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw parse_error( e.what(), line_of_offset( text, e.byte == 0u ? 0u : e.byte - 1u ) );
  }
}

std::string read_file( std::filesystem::path const& path )
{
  std::ifstream in( path );
  if ( !in )
  {
    throw error( "cannot open " + path.string() );
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

instruction instruction_from_json( nlohmann::json const& j )
{
  instruction instr;
  instr.name = j.at( "name" ).get<std::string>();
  auto const inputs = j.at( "inputs" ).get<std::int64_t>();
  auto const outputs = j.at( "outputs" ).get<std::int64_t>();
  if ( inputs < 1 || outputs < 1 || inputs > static_cast<std::int64_t>( truth_table::max_vars ) )
  {
    throw library_error( "instruction " + instr.name + ": invalid arity" );
  }
  instr.num_inputs = static_cast<std::uint32_t>( inputs );
  instr.num_outputs = static_cast<std::uint32_t>( outputs );
  auto const& tables = j.at( "tables" );
  if ( tables.size() != instr.num_outputs )
  {
    throw library_error( "instruction " + instr.name + ": expected " + std::to_string( instr.num_outputs ) +
                         " tables, got " + std::to_string( tables.size() ) );
  }
  auto const expected = std::uint64_t{ 1 } << instr.num_inputs;
  for ( auto const& t : tables )
  {
    auto const bits = t.get<std::string>();
    if ( bits.size() != expected )
    {
      throw library_error( "instruction " + instr.name + ": truth table length " + std::to_string( bits.size() ) +
                           " does not match 2^" + std::to_string( instr.num_inputs ) + " = " +
                           std::to_string( expected ) );
    }
    instr.functions.push_back( truth_table::from_string( bits ) );
  }
  if ( j.contains( "cost" ) )
  {
    instr.cost = j.at( "cost" ).get<double>();
    if ( instr.cost < 0.0 )
      throw library_error( "instruction " + instr.name + ": negative cost" );
  }
  return instr;
}

nlohmann::json instruction_to_json( instruction const& instr )
{
  nlohmann::json tables = nlohmann::json::array();
  for ( auto const& f : instr.functions )
    tables.push_back( f.to_string() );
  return { { "name", instr.name },
           { "inputs", instr.num_inputs },
           { "outputs", instr.num_outputs },
           { "tables", tables },
           { "cost", instr.cost } };
}

instruction_set set_from_json( nlohmann::json const& j, completeness_check check )
{
  try
  {
    std::vector<instruction> instrs;
    for ( auto const& ij : j.at( "instructions" ) )
      instrs.push_back( instruction_from_json( ij ) );
    return instruction_set( j.at( "name" ).get<std::string>(), std::move( instrs ), check );
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw parse_error( std::string( "library schema: " ) + e.what(), 0u );
  }
}

nlohmann::json set_to_json( instruction_set const& set )
{
  nlohmann::json instrs = nlohmann::json::array();
  for ( auto const& instr : set.instructions() )
    instrs.push_back( instruction_to_json( instr ) );
  return { { "name", set.name() }, { "instructions", instrs } };
}

struct published_row
{
  std::string_view name;
  reference_latency t0;
  reference_latency t1;
};

constexpr std::array<published_row, 24> published_rows{ {
    { "NOT", { 1, 1 }, { 1, 1 } },      { "NOR2", { 1, 1 }, { 2, 1 } },     { "NOR3", { 3, 1 }, { 3, 1 } },
    { "NOR4", { 5, 1 }, { 4, 1 } },     { "OR2", { 2, 1 }, { 1, 1 } },      { "OR3", { 4, 1 }, { 2, 1 } },
    { "OR4", { 6, 1 }, { 3, 1 } },      { "AND2", { 3, 1 }, { 1, 1 } },     { "AND3", { 6, 1 }, { 2, 1 } },
    { "AND4", { 9, 1 }, { 3, 1 } },     { "NAND2", { 4, 1 }, { 2, 1 } },    { "NAND3", { 7, 1 }, { 3, 1 } },
    { "NAND4", { 10, 1 }, { 4, 1 } },   { "XOR2", { 6, 1 }, { 5, 1 } },     { "XOR3", { 11, 1 }, { 9, 1 } },
    { "XOR4", { 16, 1 }, { 15, 1 } },   { "XNOR2", { 5, 1 }, { 5, 1 } },    { "XNOR3", { 11, 1 }, { 6, 1 } },
    { "XNOR4", { 16, 1 }, { 8, 1 } },   { "IMPLIES", { 2, 1 }, { 2, 1 } },  { "NOT-IMPLIES", { 2, 1 }, { 2, 1 } },
    { "MUX", { 7, 1 }, { 4, 1 } },      { "HA", { 7, 1 }, { 6, 1 } },       { "HS", { 6, 1 }, { 5, 1 } },
} };

} // namespace

instruction make_instruction( std::string name, std::uint32_t num_inputs,
                              std::vector<std::function<bool( std::uint64_t )>> const& outputs )
{
  instruction instr;
  instr.name = std::move( name );
  instr.num_inputs = num_inputs;
  instr.num_outputs = static_cast<std::uint32_t>( outputs.size() );
  for ( auto const& fn : outputs )
    instr.functions.push_back( truth_table::from_function( num_inputs, fn ) );
  return instr;
}

truth_table const& instruction_truth_table( instruction const& instr, std::uint32_t output_index )
{
  if ( output_index >= instr.num_outputs )
  {
    throw library_error( "instruction " + instr.name + " has no output " + std::to_string( output_index ) );
  }
  return instr.functions[output_index];
}

void validate_instruction( instruction const& instr )
{
  if ( instr.name.empty() || std::any_of( instr.name.begin(), instr.name.end(), []( unsigned char c ) { return std::isspace( c ); } ) )
  {
    throw library_error( "invalid instruction name '" + instr.name + "'" );
  }
  if ( instr.num_inputs < 1u || instr.num_outputs < 1u || instr.num_inputs > truth_table::max_vars )
  {
    throw library_error( "instruction " + instr.name + ": invalid arity" );
  }
  if ( instr.functions.size() != instr.num_outputs )
  {
    throw library_error( "instruction " + instr.name + ": output count does not match table count" );
  }
  for ( std::uint32_t o = 0u; o < instr.num_outputs; ++o )
  {
    auto const& f = instr.functions[o];
    if ( f.num_vars() != instr.num_inputs )
    {
      throw library_error( "instruction " + instr.name + ": truth table length mismatch on output " + std::to_string( o ) );
    }
    if ( f.is_constant() )
    {
      throw library_error( "instruction " + instr.name + ": output " + std::to_string( o ) + " is constant" );
    }
    if ( f.projection() )
    {
      throw library_error( "instruction " + instr.name + ": output " + std::to_string( o ) + " is an identity function" );
    }
  }
  if ( instr.cost < 0.0 )
  {
    throw library_error( "instruction " + instr.name + ": negative cost" );
  }
}

instruction_set::instruction_set( std::string name, std::vector<instruction> instructions, completeness_check check )
    : name_( std::move( name ) ),
      instructions_( std::move( instructions ) )
{
  for ( std::size_t i = 0u; i < instructions_.size(); ++i )
  {
    validate_instruction( instructions_[i] );
    if ( !index_.emplace( instructions_[i].name, i ).second )
    {
      throw library_error( "duplicate instruction " + instructions_[i].name + " in set " + name_ );
    }
  }
  if ( check == completeness_check::required && !is_functionally_complete() )
  {
    throw library_error( "instruction set " + name_ + " is not functionally complete" );
  }
}

instruction const* instruction_set::find( std::string_view name ) const
{
  auto it = index_.find( name );
  return it == index_.end() ? nullptr : &instructions_[it->second];
}

instruction const& instruction_set::at( std::string_view name ) const
{
  if ( auto const* instr = find( name ) )
    return *instr;
  throw library_error( "instruction " + std::string( name ) + " not in set " + name_ );
}

std::vector<std::string> instruction_set::names() const
{
  std::vector<std::string> v;
  for ( auto const& instr : instructions_ )
    v.push_back( instr.name );
  return v;
}

bool instruction_set::is_functionally_complete() const
{
  auto const nor2 = truth_table::from_string( "1000" );
  auto const nand2 = truth_table::from_string( "1110" );
  auto const and2 = truth_table::from_string( "0001" );
  auto const or2 = truth_table::from_string( "0111" );
  auto const not1 = truth_table::from_string( "10" );
  bool has_nor = false, has_nand = false, has_and = false, has_or = false, has_not = false;
  for ( auto const& instr : instructions_ )
  {
    for ( auto const& f : instr.functions )
    {
      has_nor |= f == nor2;
      has_nand |= f == nand2;
      has_and |= f == and2;
      has_or |= f == or2;
      has_not |= f == not1;
    }
  }
  return has_nor || has_nand || ( has_not && ( has_and || has_or ) );
}

bool instruction_set::includes( instruction_set const& other ) const
{
  return std::all_of( other.instructions_.begin(), other.instructions_.end(), [this]( auto const& instr ) {
    auto const* mine = find( instr.name );
    return mine != nullptr && mine->functions == instr.functions;
  } );
}

bool instruction_set::operator==( instruction_set const& other ) const
{
  if ( name_ != other.name_ || size() != other.size() )
    return false;
  return includes( other );
}

instruction_set merge_sets( std::string name, instruction_set const& a, instruction_set const& b )
{
  auto instrs = a.instructions();
  for ( auto const& instr : b.instructions() )
  {
    if ( !a.contains( instr.name ) )
      instrs.push_back( instr );
  }
  return instruction_set( std::move( name ), std::move( instrs ), completeness_check::skipped );
}

instruction_set builtin_set( std::string_view name )
{
  if ( name == "TS0" )
    return instruction_set( "TS0", ts0_instructions() );
  if ( name == "TS1" )
    return instruction_set( "TS1", ts1_instructions() );
  if ( name == "IS2" )
    return instruction_set( "IS2", is2_instructions() );
  if ( name == "IS3" )
    return instruction_set( "IS3", is3_instructions() );
  throw unknown_set_error( "unknown instruction set " + std::string( name ) );
}

std::vector<std::string> builtin_set_names()
{
  return { "TS0", "TS1", "IS2", "IS3" };
}

instruction_set parse_library( std::string_view json_text, completeness_check check )
{
  return set_from_json( parse_json( json_text ), check );
}

instruction_set load_library( std::filesystem::path const& path, completeness_check check )
{
  return parse_library( read_file( path ), check );
}

std::string serialize_library( instruction_set const& set )
{
  return set_to_json( set ).dump( 2 ) + "\n";
}

bool target_machine::init_value( std::string const& primitive ) const
{
  auto it = init_values.find( primitive );
  return it == init_values.end() ? true : it->second;
}

target_machine builtin_machine( std::string_view name )
{
  if ( name == "TS0" )
  {
    return { "TS0", builtin_set( "TS0" ), { { "NOT", true }, { "NOR2", true } } };
  }
  if ( name == "TS1" )
  {
    auto ts1 = builtin_set( "TS1" );
    std::vector<instruction> prims{ ts1.at( "NOT" ), ts1.at( "OR2" ), ts1.at( "AND2" ) };
    return { "TS1", instruction_set( "TS1", std::move( prims ) ), { { "NOT", true }, { "OR2", true }, { "AND2", true } } };
  }
  throw unknown_set_error( "unknown target machine " + std::string( name ) );
}

target_machine parse_machine( std::string_view json_text )
{
  auto const j = parse_json( json_text );
  target_machine machine;
  machine.primitives = set_from_json( j, completeness_check::skipped );
  machine.name = machine.primitives.name();
  for ( auto const& instr : machine.primitives.instructions() )
  {
    if ( instr.num_outputs != 1u )
    {
      throw library_error( "machine primitive " + instr.name + " must have exactly one output" );
    }
    machine.init_values[instr.name] = true;
  }
  if ( j.contains( "init_values" ) )
  {
    for ( auto const& [prim, value] : j.at( "init_values" ).items() )
    {
      if ( !machine.primitives.contains( prim ) )
        throw library_error( "init value for unknown primitive " + prim );
      machine.init_values[prim] = value.get<int>() != 0;
    }
  }
  return machine;
}

target_machine load_machine( std::filesystem::path const& path )
{
  return parse_machine( read_file( path ) );
}

std::string serialize_machine( target_machine const& machine )
{
  auto j = set_to_json( machine.primitives );
  j["name"] = machine.name;
  nlohmann::json init = nlohmann::json::object();
  for ( auto const& instr : machine.primitives.instructions() )
    init[instr.name] = machine.init_value( instr.name ) ? 1 : 0;
  j["init_values"] = init;
  return j.dump( 2 ) + "\n";
}

std::optional<reference_latency> published_latency( std::string_view instruction, std::uint32_t column )
{
  for ( auto const& row : published_rows )
  {
    if ( row.name == instruction )
      return column == 0u ? row.t0 : row.t1;
  }
  return std::nullopt;
}

} // namespace pimflow
