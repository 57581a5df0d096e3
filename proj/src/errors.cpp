#include <pimflow/errors.hpp>

namespace pimflow
{

namespace
{

std::string join( std::vector<std::string> const& items )
{
  std::string s;
  for ( auto const& item : items )
  {
    if ( !s.empty() )
      s += ", ";
    s += item;
  }
  return s;
}

} // namespace

circular_dependency_error::circular_dependency_error( std::vector<std::string> gates )
    : error( "circular dependency between gates: " + join( gates ) ),
      gates_( std::move( gates ) )
{
}

no_expansion_path_error::no_expansion_path_error( std::string const& instruction, std::string const& target )
    : error( "no expansion path for instruction " + instruction + " into " + target ),
      instruction_( instruction )
{
}

row_overflow_error::row_overflow_error( std::uint32_t peak_live, std::uint32_t row_size )
    : error( "row overflow: peak of " + std::to_string( peak_live ) + " live cells does not fit a row of " +
             std::to_string( row_size ) ),
      peak_live_( peak_live ),
      row_size_( row_size )
{
}

simulation_fault::simulation_fault( std::string const& what, std::uint64_t cycle, std::uint32_t cell )
    : error( what + " (cycle " + std::to_string( cycle ) + ", cell " + std::to_string( cell ) + ")" ),
      detail_( what ),
      cycle_( cycle ),
      cell_( cell )
{
}

char const* error_kind( error const& e ) noexcept
{
  if ( dynamic_cast<parse_error const*>( &e ) )
    return "ParseError";
  if ( dynamic_cast<unknown_set_error const*>( &e ) )
    return "UnknownSet";
  if ( dynamic_cast<library_error const*>( &e ) )
    return "LibraryError";
  if ( dynamic_cast<netlist_error const*>( &e ) )
    return "NetlistError";
  if ( dynamic_cast<circular_dependency_error const*>( &e ) )
    return "CircularDependency";
  if ( dynamic_cast<no_expansion_path_error const*>( &e ) )
    return "NoExpansionPath";
  if ( dynamic_cast<row_overflow_error const*>( &e ) )
    return "RowOverflow";
  if ( dynamic_cast<microcode_error const*>( &e ) )
    return "MicrocodeError";
  if ( dynamic_cast<simulation_fault const*>( &e ) )
    return "SimulationFault";
  return "Error";
}

} // namespace pimflow
