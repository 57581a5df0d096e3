#include <pimflow/errors.hpp>
#include <pimflow/mapper.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

namespace pimflow
{

namespace
{

std::vector<std::uint32_t> distinct_children( mapping_graph::node const& n )
{
  std::vector<std::uint32_t> v;
  for ( auto const& c : n.children )
    v.push_back( c.node );
  std::sort( v.begin(), v.end() );
  v.erase( std::unique( v.begin(), v.end() ), v.end() );
  return v;
}

/* Post-order over all nodes; throws on a gate-level cycle. */
std::vector<std::uint32_t> post_order( mapping_graph const& graph )
{
  enum class color : std::uint8_t
  {
    white,
    gray,
    black
  };
  std::vector<color> state( graph.nodes.size(), color::white );
  std::vector<std::uint32_t> result;
  result.reserve( graph.nodes.size() );
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  for ( std::uint32_t root = 0u; root < graph.nodes.size(); ++root )
  {
    if ( state[root] != color::white )
      continue;
    stack.emplace_back( root, 0u );
    state[root] = color::gray;
    while ( !stack.empty() )
    {
      auto& [node, next] = stack.back();
      auto const& children = graph.nodes[node].children;
      if ( next < children.size() )
      {
        auto const child = children[next++].node;
        if ( state[child] == color::gray )
        {
          std::vector<std::string> names;
          auto it = std::find_if( stack.begin(), stack.end(), [&]( auto const& e ) { return e.first == child; } );
          for ( ; it != stack.end(); ++it )
            names.push_back( graph.nodes[it->first].name );
          std::sort( names.begin(), names.end() );
          throw circular_dependency_error( names );
        }
        if ( state[child] == color::white )
        {
          state[child] = color::gray;
          stack.emplace_back( child, 0u );
        }
        continue;
      }
      state[node] = color::black;
      result.push_back( node );
      stack.pop_back();
    }
  }
  return result;
}

struct allocation
{
  compiled_program program;
  std::uint32_t peak{ 0u };
  bool overflow{ false };
};

allocation allocate( mapping_graph const& graph, schedule_annotation const& ann, std::uint32_t row_size )
{
  allocation a;
  a.program.row_size = row_size;

  std::vector<std::vector<std::uint32_t>> cell( graph.nodes.size() );
  std::vector<std::vector<std::uint32_t>> remaining( graph.nodes.size() );
  for ( std::size_t n = 0u; n < graph.nodes.size(); ++n )
  {
    remaining[n] = graph.nodes[n].output_fanout;
    cell[n].assign( graph.nodes[n].num_outputs, 0u );
  }

  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> released;
  std::uint32_t next_fresh = graph.num_inputs;
  std::uint32_t live = graph.num_inputs;
  a.peak = live;
  if ( graph.num_inputs > row_size )
  {
    a.overflow = true;
    return a;
  }
  auto release = [&]( std::uint32_t c ) {
    released.push( c );
    --live;
  };

  for ( std::uint32_t i = 0u; i < graph.num_inputs; ++i )
  {
    cell[i][0] = i;
    a.program.input_placement.emplace_back( graph.nodes[i].name, i );
  }
  for ( std::uint32_t i = 0u; i < graph.num_inputs; ++i )
    if ( remaining[i][0] == 0u )
      release( i );

  for ( auto n : ann.order )
  {
    auto const& node = graph.nodes[n];
    program_step step;
    step.instruction = node.instruction;
    for ( auto const& c : node.children )
      step.inputs.push_back( cell[c.node][c.output] );
    for ( std::uint32_t o = 0u; o < node.num_outputs; ++o )
    {
      std::uint32_t c;
      if ( !released.empty() )
      {
        c = released.top();
        released.pop();
      }
      else if ( next_fresh < row_size )
      {
        c = next_fresh++;
      }
      else
      {
        a.overflow = true;
        return a;
      }
      cell[n][o] = c;
      step.outputs.push_back( c );
      a.peak = std::max( a.peak, ++live );
    }
    for ( auto const& c : node.children )
      if ( --remaining[c.node][c.output] == 0u )
        release( cell[c.node][c.output] );
    for ( std::uint32_t o = 0u; o < node.num_outputs; ++o )
      if ( remaining[n][o] == 0u )
        release( cell[n][o] );
    a.program.steps.push_back( std::move( step ) );
  }
  for ( auto const& [name, ref] : graph.primary_outputs )
    a.program.output_placement.emplace_back( name, cell[ref.node][ref.output] );
  return a;
}

} // namespace

schedule_annotation compute_cu( mapping_graph const& graph )
{
  schedule_annotation ann;
  auto const n = graph.nodes.size();
  ann.cu.assign( n, 1u );
  ann.fo.resize( n );
  for ( std::size_t i = 0u; i < n; ++i )
    ann.fo[i] = graph.nodes[i].fo;

  std::vector<std::vector<std::uint32_t>> sorted_children( n );
  auto by_cu = [&]( std::uint32_t a, std::uint32_t b ) {
    return ann.cu[a] != ann.cu[b] ? ann.cu[a] > ann.cu[b] : a < b;
  };
  for ( auto v : post_order( graph ) )
  {
    auto const& node = graph.nodes[v];
    if ( node.is_leaf )
      continue;
    auto children = distinct_children( node );
    std::sort( children.begin(), children.end(), by_cu );
    std::uint32_t cu = 0u;
    for ( std::uint32_t i = 0u; i < children.size(); ++i )
      cu = std::max( cu, ann.cu[children[i]] + i );
    ann.cu[v] = std::max( cu, node.num_outputs );
    sorted_children[v] = std::move( children );
  }

  std::vector<bool> has_gate_consumer( n, false );
  for ( auto const& node : graph.nodes )
    for ( auto const& c : node.children )
      has_gate_consumer[c.node] = true;
  std::vector<std::uint32_t> roots;
  for ( std::uint32_t v = graph.num_inputs; v < n; ++v )
    if ( !has_gate_consumer[v] )
      roots.push_back( v );
  std::sort( roots.begin(), roots.end(), by_cu );

  std::vector<bool> visited( n, false );
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  for ( auto root : roots )
  {
    visited[root] = true;
    stack.emplace_back( root, 0u );
    while ( !stack.empty() )
    {
      auto& [v, next] = stack.back();
      auto const& children = sorted_children[v];
      if ( next < children.size() )
      {
        auto const child = children[next++];
        if ( !visited[child] )
        {
          visited[child] = true;
          stack.emplace_back( child, 0u );
        }
        continue;
      }
      ann.visit_order.push_back( v );
      if ( !graph.nodes[v].is_leaf )
        ann.order.push_back( v );
      stack.pop_back();
    }
  }
  return ann;
}

compiled_program schedule( mapping_graph const& graph, std::uint32_t row_size, std::string isa_name )
{
  auto const ann = compute_cu( graph );
  auto a = allocate( graph, ann, row_size );
  if ( a.overflow )
  {
    auto const full = allocate( graph, ann, std::numeric_limits<std::uint32_t>::max() );
    throw row_overflow_error( full.peak, row_size );
  }
  a.program.isa_name = std::move( isa_name );
  return std::move( a.program );
}

std::uint32_t peak_live_cells( mapping_graph const& graph )
{
  return allocate( graph, compute_cu( graph ), std::numeric_limits<std::uint32_t>::max() ).peak;
}

namespace
{

std::string join_cells( std::vector<std::uint32_t> const& cells )
{
  std::string s;
  for ( std::size_t i = 0u; i < cells.size(); ++i )
    s += ( i ? "," : "" ) + std::to_string( cells[i] );
  return s;
}

std::uint32_t parse_cell( std::string const& tok, std::size_t line )
{
  if ( tok.empty() || !std::all_of( tok.begin(), tok.end(), []( unsigned char c ) { return std::isdigit( c ); } ) )
    throw parse_error( "bad cell address '" + tok + "'", line );
  try
  {
    return static_cast<std::uint32_t>( std::stoul( tok ) );
  }
  catch ( std::exception const& )
  {
    throw parse_error( "cell address out of range '" + tok + "'", line );
  }
}

std::vector<std::uint32_t> parse_cell_list( std::string const& field, std::string const& key, std::size_t line )
{
  if ( field.rfind( key, 0u ) != 0u )
    throw parse_error( "expected '" + key + "'", line );
  std::vector<std::uint32_t> cells;
  std::istringstream ss( field.substr( key.size() ) );
  std::string tok;
  while ( std::getline( ss, tok, ',' ) )
    cells.push_back( parse_cell( tok, line ) );
  return cells;
}

} // namespace

std::string emit_program( compiled_program const& program )
{
  std::ostringstream os;
  os << ".isa " << program.isa_name << "\n.row " << program.row_size << "\n";
  for ( auto const& [sig, c] : program.input_placement )
    os << ".place_in " << sig << " " << c << "\n";
  for ( auto const& [sig, c] : program.output_placement )
    os << ".place_out " << sig << " " << c << "\n";
  for ( auto const& step : program.steps )
    os << "INSTR " << step.instruction << " in=" << join_cells( step.inputs ) << " out=" << join_cells( step.outputs )
       << "\n";
  return os.str();
}

compiled_program parse_program( std::string_view text )
{
  compiled_program program;
  bool has_row = false;
  std::istringstream in{ std::string( text ) };
  std::string line;
  std::size_t line_no = 0u;
  while ( std::getline( in, line ) )
  {
    ++line_no;
    if ( auto hash = line.find( '#' ); hash != std::string::npos )
      line.erase( hash );
    std::istringstream ls( line );
    std::vector<std::string> tok;
    for ( std::string t; ls >> t; )
      tok.push_back( t );
    if ( tok.empty() )
      continue;
    if ( tok[0] == ".isa" && tok.size() == 2u )
      program.isa_name = tok[1];
    else if ( tok[0] == ".row" && tok.size() == 2u )
    {
      program.row_size = parse_cell( tok[1], line_no );
      has_row = true;
    }
    else if ( tok[0] == ".place_in" && tok.size() == 3u )
      program.input_placement.emplace_back( tok[1], parse_cell( tok[2], line_no ) );
    else if ( tok[0] == ".place_out" && tok.size() == 3u )
      program.output_placement.emplace_back( tok[1], parse_cell( tok[2], line_no ) );
    else if ( tok[0] == "INSTR" && tok.size() == 4u )
      program.steps.push_back(
          { tok[1], parse_cell_list( tok[2], "in=", line_no ), parse_cell_list( tok[3], "out=", line_no ) } );
    else
      throw parse_error( "unrecognized program line '" + line + "'", line_no );
  }
  if ( !has_row )
    throw parse_error( "program lacks a '.row' header", 0u );
  return program;
}

compiled_program load_program( std::filesystem::path const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw error( "cannot open program file " + path.string() );
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program( ss.str() );
}

liveness_report check_liveness( compiled_program const& program )
{
  liveness_report report;
  auto fail = [&]( std::string msg ) {
    report.ok = false;
    report.message = std::move( msg );
    return report;
  };
  std::vector<bool> defined( program.row_size, false );
  for ( auto const& [sig, c] : program.input_placement )
  {
    if ( c >= program.row_size )
      return fail( "input " + sig + " placed outside the row" );
    if ( defined[c] )
      return fail( "two inputs share cell " + std::to_string( c ) );
    defined[c] = true;
  }
  for ( std::size_t i = 0u; i < program.steps.size(); ++i )
  {
    auto const& step = program.steps[i];
    for ( auto c : step.inputs )
      if ( c >= program.row_size || !defined[c] )
        return fail( "step " + std::to_string( i ) + " reads undefined cell " + std::to_string( c ) );
    for ( auto c : step.outputs )
    {
      if ( c >= program.row_size )
        return fail( "step " + std::to_string( i ) + " writes outside the row" );
      if ( std::find( step.inputs.begin(), step.inputs.end(), c ) != step.inputs.end() ||
           std::count( step.outputs.begin(), step.outputs.end(), c ) > 1 )
        return fail( "step " + std::to_string( i ) + " overwrites its own operand cell " + std::to_string( c ) );
      defined[c] = true;
    }
  }
  for ( auto const& [sig, c] : program.output_placement )
    if ( c >= program.row_size || !defined[c] )
      return fail( "output " + sig + " sits in undefined cell " + std::to_string( c ) );

  // backward liveness: a cell is live between its write and its last read
  std::vector<bool> live( program.row_size, false );
  std::uint32_t count = 0u;
  for ( auto const& [sig, c] : program.output_placement )
    if ( !live[c] )
    {
      live[c] = true;
      ++count;
    }
  report.peak_live = count;
  for ( auto it = program.steps.rbegin(); it != program.steps.rend(); ++it )
  {
    for ( auto c : it->outputs )
    {
      if ( live[c] )
      {
        live[c] = false;
        --count;
      }
    }
    for ( auto c : it->inputs )
    {
      if ( !live[c] )
      {
        live[c] = true;
        ++count;
      }
    }
    // the outputs coexist with the operands while the step executes
    report.peak_live = std::max<std::uint32_t>( report.peak_live, count + static_cast<std::uint32_t>( it->outputs.size() ) );
  }
  std::uint32_t inputs_live = 0u;
  for ( auto const& [sig, c] : program.input_placement )
    inputs_live += live[c] ? 0u : 1u;
  report.peak_live = std::max( report.peak_live, count + inputs_live );
  return report;
}

} // namespace pimflow
