#include <pimflow/errors.hpp>
#include <pimflow/netlist.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace pimflow
{

instruction const& netlist::cell( std::string const& name ) const
{
  auto it = cells_.find( name );
  if ( it == cells_.end() )
  {
    throw netlist_error( "netlist references undefined instruction " + name );
  }
  return it->second;
}

std::size_t netlist::add_gate( instruction const& instr, std::vector<std::string> inputs, std::vector<std::string> outputs )
{
  auto [it, inserted] = cells_.emplace( instr.name, instr );
  if ( !inserted && it->second.functions != instr.functions )
  {
    throw netlist_error( "conflicting definitions of instruction " + instr.name );
  }
  gates_.push_back( { instr.name, std::move( inputs ), std::move( outputs ) } );
  return gates_.size() - 1u;
}

namespace
{

bool valid_signal_name( std::string_view s )
{
  if ( s.empty() || !( std::isalpha( static_cast<unsigned char>( s[0] ) ) || s[0] == '_' ) )
    return false;
  return std::all_of( s.begin() + 1, s.end(), []( unsigned char c ) { return std::isalnum( c ) || c == '_'; } );
}

std::vector<std::string> tokenize( std::string_view line )
{
  std::vector<std::string> tokens;
  std::istringstream ss{ std::string( line ) };
  std::string tok;
  while ( ss >> tok )
    tokens.push_back( tok );
  return tokens;
}

struct signal_table
{
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::string> names;

  std::uint32_t get( std::string const& name )
  {
    auto [it, inserted] = ids.emplace( name, static_cast<std::uint32_t>( names.size() ) );
    if ( inserted )
      names.push_back( name );
    return it->second;
  }
};

/* Kahn's algorithm over (gate, output) pairs, following only true functional dependencies. */
std::vector<std::pair<std::uint32_t, std::uint32_t>> functional_order( indexed_netlist const& idx )
{
  std::vector<std::uint32_t> base( idx.gates.size() + 1u, 0u );
  for ( std::size_t g = 0u; g < idx.gates.size(); ++g )
    base[g + 1u] = base[g] + static_cast<std::uint32_t>( idx.gates[g].outputs.size() );
  auto const num_pairs = base.back();

  std::vector<std::uint32_t> indegree( num_pairs, 0u );
  std::vector<std::vector<std::uint32_t>> succ( num_pairs );
  for ( std::size_t g = 0u; g < idx.gates.size(); ++g )
  {
    auto const& gate = idx.gates[g];
    for ( std::uint32_t o = 0u; o < gate.outputs.size(); ++o )
    {
      for ( std::uint32_t pin = 0u; pin < gate.inputs.size(); ++pin )
      {
        auto const sig = gate.inputs[pin];
        if ( idx.driver_gate[sig] < 0 || !gate.instr->output_depends_on( o, pin ) )
          continue;
        auto const from = base[static_cast<std::size_t>( idx.driver_gate[sig] )] + idx.driver_output[sig];
        succ[from].push_back( base[g] + o );
        ++indegree[base[g] + o];
      }
    }
  }

  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for ( std::uint32_t p = 0u; p < num_pairs; ++p )
  {
    if ( indegree[p] == 0u )
      ready.push( p );
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
  order.reserve( num_pairs );
  while ( !ready.empty() )
  {
    auto const p = ready.top();
    ready.pop();
    auto const g = static_cast<std::uint32_t>( std::upper_bound( base.begin(), base.end(), p ) - base.begin() - 1 );
    order.emplace_back( g, p - base[g] );
    for ( auto s : succ[p] )
    {
      if ( --indegree[s] == 0u )
        ready.push( s );
    }
  }
  if ( order.size() != num_pairs )
  {
    std::string looped;
    for ( std::size_t g = 0u; g < idx.gates.size() && looped.size() < 200u; ++g )
    {
      for ( std::uint32_t o = 0u; o < idx.gates[g].outputs.size(); ++o )
      {
        if ( indegree[base[g] + o] != 0u )
          looped += " " + idx.signal_names[idx.gates[g].outputs[o]];
      }
    }
    throw netlist_error( "combinational loop through signals:" + looped );
  }
  return order;
}

} // namespace

indexed_netlist index_netlist( netlist const& ntk )
{
  indexed_netlist idx;
  signal_table signals;
  std::vector<std::int64_t> driver_gate;
  std::vector<std::uint32_t> driver_output;
  std::vector<bool> driven;

  auto define = [&]( std::string const& name, std::int64_t gate, std::uint32_t output ) {
    auto const id = signals.get( name );
    if ( id >= driven.size() )
    {
      driven.resize( id + 1u, false );
      driver_gate.resize( id + 1u, -1 );
      driver_output.resize( id + 1u, 0u );
    }
    if ( driven[id] )
    {
      throw netlist_error( "signal " + name + " is driven more than once" );
    }
    driven[id] = true;
    driver_gate[id] = gate;
    driver_output[id] = output;
    return id;
  };

  for ( auto const& name : ntk.inputs() )
    idx.inputs.push_back( define( name, -1, 0u ) );
  for ( std::size_t g = 0u; g < ntk.gates().size(); ++g )
  {
    auto const& gate = ntk.gates()[g];
    auto const& instr = ntk.cell( gate.instruction );
    if ( gate.inputs.size() != instr.num_inputs || gate.outputs.size() != instr.num_outputs )
    {
      throw netlist_error( "gate " + netlist::gate_name( g ) + " (" + instr.name + ") expects " +
                           std::to_string( instr.num_inputs ) + " inputs and " + std::to_string( instr.num_outputs ) +
                           " outputs" );
    }
    indexed_netlist::gate ig{ &instr, {}, {} };
    for ( std::uint32_t o = 0u; o < gate.outputs.size(); ++o )
      ig.outputs.push_back( define( gate.outputs[o], static_cast<std::int64_t>( g ), o ) );
    idx.gates.push_back( std::move( ig ) );
  }
  auto use = [&]( std::string const& name, std::string const& where ) {
    auto it = signals.ids.find( name );
    if ( it == signals.ids.end() || !driven[it->second] )
    {
      throw netlist_error( "signal " + name + " used by " + where + " is not driven" );
    }
    return it->second;
  };
  for ( std::size_t g = 0u; g < ntk.gates().size(); ++g )
  {
    for ( auto const& in : ntk.gates()[g].inputs )
      idx.gates[g].inputs.push_back( use( in, "gate " + netlist::gate_name( g ) ) );
  }
  for ( auto const& name : ntk.outputs() )
    idx.outputs.push_back( use( name, "primary output list" ) );

  idx.signal_names = std::move( signals.names );
  idx.driver_gate = std::move( driver_gate );
  idx.driver_output = std::move( driver_output );
  idx.order = functional_order( idx );
  return idx;
}

netlist parse_netlist( std::string_view text, instruction_set const& library )
{
  netlist ntk;
  std::unordered_map<std::string, std::size_t> defined_at;
  std::vector<std::pair<std::string, std::size_t>> uses;
  bool seen_model = false, seen_end = false;

  auto define = [&]( std::string const& sig, std::size_t line ) {
    if ( !valid_signal_name( sig ) )
      throw parse_error( "invalid signal name '" + sig + "'", line );
    if ( auto [it, inserted] = defined_at.emplace( sig, line ); !inserted )
    {
      throw parse_error( "signal " + sig + " is driven more than once (first driver on line " +
                             std::to_string( it->second ) + ")",
                         line );
    }
  };
  auto use = [&]( std::string const& sig, std::size_t line ) {
    if ( !valid_signal_name( sig ) )
      throw parse_error( "invalid signal name '" + sig + "'", line );
    uses.emplace_back( sig, line );
  };

  std::size_t line_no = 0u;
  std::istringstream in{ std::string( text ) };
  std::string line;
  while ( std::getline( in, line ) )
  {
    ++line_no;
    if ( auto hash = line.find( '#' ); hash != std::string::npos )
      line.erase( hash );
    auto tokens = tokenize( line );
    if ( tokens.empty() )
      continue;
    if ( seen_end )
      throw parse_error( "statement after .end", line_no );

    auto const& kw = tokens[0];
    if ( kw == ".model" )
    {
      if ( tokens.size() != 2u || seen_model )
        throw parse_error( "expected a single '.model <name>'", line_no );
      seen_model = true;
      ntk.set_model( tokens[1] );
    }
    else if ( kw == ".inputs" )
    {
      for ( std::size_t i = 1u; i < tokens.size(); ++i )
      {
        define( tokens[i], line_no );
        ntk.add_input( tokens[i] );
      }
    }
    else if ( kw == ".outputs" )
    {
      for ( std::size_t i = 1u; i < tokens.size(); ++i )
      {
        use( tokens[i], line_no );
        ntk.add_output( tokens[i] );
      }
    }
    else if ( kw == ".gate" )
    {
      auto arrow = std::find( tokens.begin(), tokens.end(), "->" );
      if ( tokens.size() < 2u || arrow == tokens.end() || arrow == tokens.begin() + 1 )
        throw parse_error( "expected '.gate <INSTR> <in> ... -> <out> ...'", line_no );
      auto const* instr = library.find( tokens[1] );
      if ( instr == nullptr )
        throw parse_error( "unknown instruction " + tokens[1] + " (not in set " + library.name() + ")", line_no );
      std::vector<std::string> ins( tokens.begin() + 2, arrow );
      std::vector<std::string> outs( arrow + 1, tokens.end() );
      if ( ins.size() != instr->num_inputs || outs.size() != instr->num_outputs )
      {
        throw parse_error( "arity mismatch: " + instr->name + " takes " + std::to_string( instr->num_inputs ) +
                               " inputs and " + std::to_string( instr->num_outputs ) + " outputs",
                           line_no );
      }
      for ( auto const& s : ins )
        use( s, line_no );
      for ( auto const& s : outs )
        define( s, line_no );
      ntk.add_gate( *instr, std::move( ins ), std::move( outs ) );
    }
    else if ( kw == ".end" )
    {
      seen_end = true;
    }
    else
    {
      throw parse_error( "unknown statement " + kw, line_no );
    }
  }
  for ( auto const& [sig, line] : uses )
  {
    if ( !defined_at.contains( sig ) )
      throw parse_error( "signal " + sig + " is not driven", line );
  }
  index_netlist( ntk );
  return ntk;
}

netlist load_netlist( std::filesystem::path const& path, instruction_set const& library )
{
  std::ifstream in( path );
  if ( !in )
    throw error( "cannot open " + path.string() );
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_netlist( ss.str(), library );
}

std::string write_netlist( netlist const& ntk )
{
  std::ostringstream os;
  os << ".model " << ( ntk.model().empty() ? "top" : ntk.model() ) << "\n";
  os << ".inputs";
  for ( auto const& s : ntk.inputs() )
    os << ' ' << s;
  os << "\n.outputs";
  for ( auto const& s : ntk.outputs() )
    os << ' ' << s;
  os << "\n";
  for ( auto const& g : ntk.gates() )
  {
    os << ".gate " << g.instruction;
    for ( auto const& s : g.inputs )
      os << ' ' << s;
    os << " ->";
    for ( auto const& s : g.outputs )
      os << ' ' << s;
    os << "\n";
  }
  os << ".end\n";
  return os.str();
}

mapping_graph build_dag( netlist const& ntk )
{
  auto const idx = index_netlist( ntk );
  mapping_graph graph;
  graph.num_inputs = static_cast<std::uint32_t>( ntk.inputs().size() );

  std::vector<std::uint32_t> input_pos( idx.signal_names.size(), 0u );
  for ( std::uint32_t i = 0u; i < idx.inputs.size(); ++i )
    input_pos[idx.inputs[i]] = i;
  auto ref_of = [&]( std::uint32_t sig ) -> mapping_graph::child_ref {
    if ( idx.driver_gate[sig] < 0 )
      return { input_pos[sig], 0u };
    return { graph.gate_node( static_cast<std::size_t>( idx.driver_gate[sig] ) ), idx.driver_output[sig] };
  };

  for ( auto const& name : ntk.inputs() )
  {
    mapping_graph::node leaf;
    leaf.is_leaf = true;
    leaf.name = name;
    leaf.output_fanout.assign( 1u, 0u );
    leaf.output_signals = { name };
    graph.nodes.push_back( std::move( leaf ) );
  }
  for ( std::size_t g = 0u; g < idx.gates.size(); ++g )
  {
    mapping_graph::node n;
    n.name = netlist::gate_name( g );
    n.instruction = idx.gates[g].instr->name;
    n.num_outputs = idx.gates[g].instr->num_outputs;
    n.output_fanout.assign( n.num_outputs, 0u );
    for ( auto sig : idx.gates[g].outputs )
      n.output_signals.push_back( idx.signal_names[sig] );
    graph.nodes.push_back( std::move( n ) );
  }
  for ( std::size_t g = 0u; g < idx.gates.size(); ++g )
  {
    for ( auto sig : idx.gates[g].inputs )
    {
      auto const ref = ref_of( sig );
      graph.nodes[graph.gate_node( g )].children.push_back( ref );
      ++graph.nodes[ref.node].output_fanout[ref.output];
    }
  }
  for ( std::size_t i = 0u; i < idx.outputs.size(); ++i )
  {
    auto const ref = ref_of( idx.outputs[i] );
    ++graph.nodes[ref.node].output_fanout[ref.output];
    graph.primary_outputs.emplace_back( ntk.outputs()[i], ref );
  }
  for ( auto& n : graph.nodes )
  {
    for ( auto f : n.output_fanout )
      n.fo += f;
  }
  return graph;
}

cycle_report detect_cycles( netlist const& ntk )
{
  auto const idx = index_netlist( ntk );
  auto const n = idx.gates.size();
  std::vector<std::vector<std::uint32_t>> succ( n );
  std::vector<bool> self_loop( n, false );
  for ( std::size_t g = 0u; g < n; ++g )
  {
    for ( auto sig : idx.gates[g].inputs )
    {
      if ( idx.driver_gate[sig] < 0 )
        continue;
      auto const from = static_cast<std::size_t>( idx.driver_gate[sig] );
      if ( from == g )
        self_loop[g] = true;
      succ[from].push_back( static_cast<std::uint32_t>( g ) );
    }
  }

  // iterative Tarjan
  constexpr std::uint32_t unvisited = ~0u;
  std::vector<std::uint32_t> index( n, unvisited ), low( n, 0u );
  std::vector<bool> on_stack( n, false );
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> components;
  std::uint32_t counter = 0u;

  for ( std::uint32_t root = 0u; root < n; ++root )
  {
    if ( index[root] != unvisited )
      continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> frames{ { root, 0u } };
    index[root] = low[root] = counter++;
    stack.push_back( root );
    on_stack[root] = true;
    while ( !frames.empty() )
    {
      auto& [v, next] = frames.back();
      if ( next < succ[v].size() )
      {
        auto const w = succ[v][next++];
        if ( index[w] == unvisited )
        {
          index[w] = low[w] = counter++;
          stack.push_back( w );
          on_stack[w] = true;
          frames.emplace_back( w, 0u );
        }
        else if ( on_stack[w] )
        {
          low[v] = std::min( low[v], index[w] );
        }
        continue;
      }
      auto const done = v;
      frames.pop_back();
      if ( !frames.empty() )
        low[frames.back().first] = std::min( low[frames.back().first], low[done] );
      if ( low[done] == index[done] )
      {
        std::vector<std::uint32_t> comp;
        std::uint32_t w;
        do
        {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back( w );
        } while ( w != done );
        if ( comp.size() > 1u || self_loop[done] )
          components.push_back( std::move( comp ) );
      }
    }
  }

  cycle_report report;
  if ( components.empty() )
    return report;
  for ( auto& comp : components )
    std::sort( comp.begin(), comp.end() );
  auto const& first = *std::min_element( components.begin(), components.end(),
                                         []( auto const& a, auto const& b ) { return a.front() < b.front(); } );
  for ( auto g : first )
    report.gates.push_back( netlist::gate_name( g ) );
  return report;
}

std::vector<std::uint64_t> simulate_words( indexed_netlist const& idx, std::vector<std::uint64_t> const& input_words )
{
  std::vector<std::uint64_t> values( idx.signal_names.size(), 0u );
  for ( std::size_t i = 0u; i < idx.inputs.size(); ++i )
    values[idx.inputs[i]] = input_words[i];

  for ( auto const& [g, o] : idx.order )
  {
    auto const& gate = idx.gates[g];
    auto const& fn = gate.instr->functions[o];
    std::uint64_t result = 0u;
    for ( std::uint64_t row = 0u; row < fn.num_bits(); ++row )
    {
      if ( !fn.get( row ) )
        continue;
      std::uint64_t term = ~std::uint64_t{ 0 };
      for ( std::size_t pin = 0u; pin < gate.inputs.size(); ++pin )
      {
        auto const v = values[gate.inputs[pin]];
        term &= ( ( row >> pin ) & 1u ) ? v : ~v;
      }
      result |= term;
    }
    values[gate.outputs[o]] = result;
  }

  std::vector<std::uint64_t> out;
  out.reserve( idx.outputs.size() );
  for ( auto sig : idx.outputs )
    out.push_back( values[sig] );
  return out;
}

bit_vector evaluate_reference( netlist const& ntk, bit_vector const& inputs )
{
  if ( inputs.size() != ntk.inputs().size() )
  {
    throw netlist_error( "input vector has " + std::to_string( inputs.size() ) + " bits, netlist has " +
                         std::to_string( ntk.inputs().size() ) + " inputs" );
  }
  auto const idx = index_netlist( ntk );
  std::vector<char> values( idx.signal_names.size(), 0 );
  for ( std::size_t i = 0u; i < inputs.size(); ++i )
    values[idx.inputs[i]] = inputs[i];
  for ( auto const& [g, o] : idx.order )
  {
    auto const& gate = idx.gates[g];
    std::uint64_t row = 0u;
    for ( std::size_t pin = 0u; pin < gate.inputs.size(); ++pin )
      row |= static_cast<std::uint64_t>( values[gate.inputs[pin]] ) << pin;
    values[gate.outputs[o]] = gate.instr->evaluate( o, row );
  }
  bit_vector out;
  for ( auto sig : idx.outputs )
    out.push_back( values[sig] != 0 );
  return out;
}

} // namespace pimflow
