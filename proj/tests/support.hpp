#pragma once

#include <pimflow/isa.hpp>
#include <pimflow/netlist.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace test_support
{

inline std::string data( std::string const& name )
{
  return std::string( PIMFLOW_TEST_DATA ) + "/" + name;
}

// Evaluates each gate output from its truth table once the inputs it depends on are known.
inline pimflow::bit_vector oracle_eval( pimflow::netlist const& ntk, pimflow::bit_vector const& in )
{
  std::map<std::string, bool> value;
  for ( std::size_t i = 0; i < ntk.inputs().size(); ++i )
    value[ntk.inputs()[i]] = in[i];
  bool progress = true;
  while ( progress )
  {
    progress = false;
    for ( auto const& gate : ntk.gates() )
    {
      auto const& instr = ntk.cell( gate.instruction );
      for ( std::uint32_t o = 0; o < gate.outputs.size(); ++o )
      {
        if ( value.count( gate.outputs[o] ) )
          continue;
        std::uint64_t row = 0;
        bool ready = true;
        for ( std::uint32_t p = 0; p < gate.inputs.size() && ready; ++p )
        {
          auto it = value.find( gate.inputs[p] );
          if ( it != value.end() )
            row |= std::uint64_t{ it->second } << p;
          else if ( instr.functions[o].depends_on( p ) )
            ready = false;
        }
        if ( ready )
        {
          value[gate.outputs[o]] = instr.functions[o].get( row );
          progress = true;
        }
      }
    }
  }
  pimflow::bit_vector out;
  for ( auto const& o : ntk.outputs() )
  {
    auto it = value.find( o );
    if ( it == value.end() )
      throw std::runtime_error( "oracle_eval: output " + o + " does not settle" );
    out.push_back( it->second );
  }
  return out;
}

inline pimflow::bit_vector bits_of( std::uint64_t v, std::size_t n )
{
  pimflow::bit_vector b( n );
  for ( std::size_t i = 0; i < n; ++i )
    b[i] = ( v >> i ) & 1u;
  return b;
}

// Random DAG over `pool`; every dangling signal becomes an output.
inline pimflow::netlist random_dag( std::mt19937& rng, pimflow::instruction_set const& pool, std::size_t num_inputs,
                                    std::size_t num_gates )
{
  pimflow::netlist ntk( "rand" );
  std::vector<std::string> signals;
  for ( std::size_t i = 0; i < num_inputs; ++i )
  {
    signals.push_back( "i" + std::to_string( i ) );
    ntk.add_input( signals.back() );
  }
  std::vector<pimflow::instruction> usable;
  for ( auto const& instr : pool.instructions() )
    if ( instr.num_inputs <= num_inputs )
      usable.push_back( instr );
  std::map<std::string, int> uses;
  for ( std::size_t g = 0; g < num_gates; ++g )
  {
    auto const& instr = usable[rng() % usable.size()];
    std::vector<std::string> ins;
    while ( ins.size() < instr.num_inputs )
    {
      // bias towards recent signals to get depth
      auto const n = signals.size();
      auto const pick = ( rng() % 2 == 0 && n > num_inputs ) ? n - 1 - rng() % std::min<std::size_t>( n, 4 )
                                                              : rng() % n;
      auto const& s = signals[pick];
      if ( std::find( ins.begin(), ins.end(), s ) == ins.end() )
        ins.push_back( s );
    }
    for ( auto const& s : ins )
      ++uses[s];
    std::vector<std::string> outs;
    for ( std::uint32_t o = 0; o < instr.num_outputs; ++o )
      outs.push_back( "w" + std::to_string( g ) + "_" + std::to_string( o ) );
    ntk.add_gate( instr, ins, outs );
    for ( auto const& o : outs )
      signals.push_back( o );
  }
  for ( std::size_t s = num_inputs; s < signals.size(); ++s )
    if ( uses[signals[s]] == 0 )
      ntk.add_output( signals[s] );
  if ( ntk.outputs().empty() )
    ntk.add_output( signals.back() );
  return ntk;
}

} // namespace test_support
