#include <pimflow/errors.hpp>
#include <pimflow/simulator.hpp>

#include <json.hpp>

#include <algorithm>
#include <random>
#include <sstream>

namespace pimflow
{

namespace
{

struct spliced_op
{
  std::size_t instr_index;
  resolved_op op;
};

struct spliced_program
{
  std::size_t cells{ 0u };
  std::vector<spliced_op> ops;
  std::uint64_t compute_cycles{ 0u };
  std::uint64_t init_cycles{ 0u };
};

std::uint32_t resolve( cell_ref const& ref, program_step const& step, std::uint32_t row_size, std::size_t instr_index )
{
  auto bad = [&]( std::string const& what ) {
    return simulation_fault( "instruction " + std::to_string( instr_index ) + " (" + step.instruction + "): " + what,
                             0u, 0u );
  };
  switch ( ref.space )
  {
  case cell_space::input:
    if ( ref.index >= step.inputs.size() )
      throw bad( "microcode refers to " + ref.to_string() + " beyond the operand count" );
    return step.inputs[ref.index];
  case cell_space::output:
    if ( ref.index >= step.outputs.size() )
      throw bad( "microcode refers to " + ref.to_string() + " beyond the result count" );
    return step.outputs[ref.index];
  default:
    return row_size + ref.index;
  }
}

spliced_program splice( compiled_program const& program, microcode_table const& table )
{
  spliced_program sp;
  sp.cells = std::size_t{ program.row_size } + table.scratch_need;
  if ( sp.cells > simulator_capacity )
    throw simulation_fault( "row of " + std::to_string( sp.cells ) + " cells exceeds the simulator capacity", 0u, 0u );

  for ( std::size_t i = 0u; i < program.steps.size(); ++i )
  {
    auto const& step = program.steps[i];
    auto const* entry = table.find( step.instruction );
    if ( entry == nullptr )
      throw simulation_fault( "no microcode for instruction " + step.instruction, 0u, 0u );
    for ( auto c : step.inputs )
      if ( c >= program.row_size )
        throw simulation_fault( "operand cell outside the row", 0u, c );
    for ( auto c : step.outputs )
      if ( c >= program.row_size )
        throw simulation_fault( "result cell outside the row", 0u, c );
    for ( auto const& mop : entry->ops )
    {
      resolved_op r;
      r.kind = mop.kind;
      if ( mop.kind == op_kind::init )
      {
        r.value = mop.value;
        for ( auto const& ref : mop.cells )
          r.cells.push_back( resolve( ref, step, program.row_size, i ) );
        ++sp.init_cycles;
      }
      else
      {
        r.primitive = &table.machine.primitives.at( mop.primitive );
        r.init_value = table.machine.init_value( mop.primitive );
        for ( auto const& ref : mop.inputs )
          r.inputs.push_back( resolve( ref, step, program.row_size, i ) );
        r.output = resolve( mop.output, step, program.row_size, i );
        ++sp.compute_cycles;
      }
      for ( auto c : r.cells )
        if ( c >= sp.cells )
          throw simulation_fault( "scratch reference beyond the table's scratch window", 0u, c );
      if ( r.kind == op_kind::compute && r.output >= sp.cells )
        throw simulation_fault( "scratch reference beyond the table's scratch window", 0u, r.output );
      sp.ops.push_back( { i, std::move( r ) } );
    }
  }
  return sp;
}

/* 64 independent rows, one per bit lane. */
struct word_row
{
  std::vector<std::uint64_t> value;
  std::vector<bool> defined;
};

void execute_words( word_row& row, resolved_op const& op, std::uint64_t cycle )
{
  if ( op.kind == op_kind::init )
  {
    for ( auto c : op.cells )
    {
      row.value[c] = op.value ? ~std::uint64_t{ 0 } : 0u;
      row.defined[c] = true;
    }
    return;
  }
  std::vector<std::uint64_t> pins;
  pins.reserve( op.inputs.size() );
  for ( auto c : op.inputs )
  {
    if ( !row.defined[c] )
      throw simulation_fault( "read of undefined cell", cycle, c );
    pins.push_back( row.value[c] );
  }
  if ( !row.defined[op.output] )
    throw simulation_fault( "switching a cell that was never initialized", cycle, op.output );
  auto const& fn = op.primitive->functions[0];
  std::uint64_t f = 0u;
  for ( std::uint64_t r = 0u; r < fn.num_bits(); ++r )
  {
    if ( !fn.get( r ) )
      continue;
    std::uint64_t term = ~std::uint64_t{ 0 };
    for ( std::size_t p = 0u; p < pins.size(); ++p )
      term &= ( ( r >> p ) & 1u ) ? pins[p] : ~pins[p];
    f |= term;
  }
  auto const state = row.value[op.output];
  auto const at_init = op.init_value ? state : ~state;
  row.value[op.output] = ( at_init & f ) | ( ~at_init & state );
}

} // namespace

void execute_micro_op( row_state& row, resolved_op const& op, std::uint64_t cycle )
{
  if ( op.kind == op_kind::init )
  {
    for ( auto c : op.cells )
      row.set( c, op.value );
    return;
  }
  std::uint64_t pin_row = 0u;
  for ( std::size_t p = 0u; p < op.inputs.size(); ++p )
  {
    auto const c = op.inputs[p];
    if ( !row.defined( c ) )
      throw simulation_fault( "read of undefined cell", cycle, c );
    pin_row |= std::uint64_t{ row.value( c ) } << p;
  }
  if ( !row.defined( op.output ) )
    throw simulation_fault( "switching a cell that was never initialized", cycle, op.output );
  if ( row.value( op.output ) == op.init_value )
    row.set( op.output, op.primitive->evaluate( 0u, pin_row ) );
}

run_result run_program( compiled_program const& program, microcode_table const& table, bit_vector const& inputs,
                        bool record )
{
  if ( inputs.size() != program.input_placement.size() )
  {
    throw simulation_fault( "expected " + std::to_string( program.input_placement.size() ) + " input bits, got " +
                                std::to_string( inputs.size() ),
                            0u, 0u );
  }
  auto const sp = splice( program, table );
  row_state row( sp.cells );
  for ( std::size_t i = 0u; i < inputs.size(); ++i )
    row.set( program.input_placement[i].second, inputs[i] );

  run_result result;
  auto& trace = result.trace;
  trace.instruction_count = program.steps.size();
  std::uint64_t cycle = 0u;
  for ( auto const& [instr_index, op] : sp.ops )
  {
    try
    {
      execute_micro_op( row, op, cycle );
    }
    catch ( simulation_fault const& f )
    {
      throw simulation_fault( "instruction " + std::to_string( instr_index ) + " (" +
                                  program.steps[instr_index].instruction + "): " + f.detail(),
                              f.cycle(), f.cell() );
    }
    ( op.kind == op_kind::init ? trace.init_cycles : trace.compute_cycles ) += 1u;
    if ( record )
    {
      trace_record rec{ cycle, instr_index, program.steps[instr_index].instruction, op.kind, {}, {} };
      rec.cells = op.kind == op_kind::init ? op.cells : std::vector<std::uint32_t>{ op.output };
      for ( auto c : rec.cells )
        rec.values.push_back( row.value( c ) );
      trace.records.push_back( std::move( rec ) );
    }
    ++cycle;
  }
  for ( auto const& [sig, c] : program.output_placement )
  {
    if ( !row.defined( c ) )
      throw simulation_fault( "output " + sig + " is undefined", cycle, c );
    result.outputs.push_back( row.value( c ) );
  }
  return result;
}

verify_report verify_program( compiled_program const& program, microcode_table const& table, netlist const& ntk,
                              std::vector<bit_vector> const& vectors )
{
  verify_report report;
  report.vectors = vectors.size();
  report.instruction_count = program.steps.size();
  auto const idx = index_netlist( ntk );
  auto const n = program.input_placement.size();
  if ( n != ntk.inputs().size() || program.output_placement.size() != ntk.outputs().size() )
    throw netlist_error( "program and netlist interfaces differ" );

  spliced_program sp;
  std::string splice_fault;
  try
  {
    sp = splice( program, table );
    report.compute_cycles = sp.compute_cycles;
    report.init_cycles = sp.init_cycles;
  }
  catch ( simulation_fault const& f )
  {
    splice_fault = f.what();
  }

  for ( std::size_t base = 0u; base < vectors.size(); base += 64u )
  {
    auto const lanes = std::min<std::size_t>( 64u, vectors.size() - base );
    std::vector<std::uint64_t> words( n, 0u );
    for ( std::size_t l = 0u; l < lanes; ++l )
    {
      auto const& v = vectors[base + l];
      if ( v.size() != n )
        throw netlist_error( "vector width differs from the input count" );
      for ( std::size_t i = 0u; i < n; ++i )
        words[i] |= std::uint64_t{ v[i] } << l;
    }
    auto const expected = simulate_words( idx, words );

    std::string fault = splice_fault;
    std::vector<std::uint64_t> actual( program.output_placement.size(), 0u );
    if ( fault.empty() )
    {
      word_row row{ std::vector<std::uint64_t>( sp.cells, 0u ), std::vector<bool>( sp.cells, false ) };
      for ( std::size_t i = 0u; i < n; ++i )
      {
        row.value[program.input_placement[i].second] = words[i];
        row.defined[program.input_placement[i].second] = true;
      }
      try
      {
        std::uint64_t cycle = 0u;
        for ( auto const& so : sp.ops )
          execute_words( row, so.op, cycle++ );
        for ( std::size_t o = 0u; o < actual.size(); ++o )
        {
          auto const c = program.output_placement[o].second;
          if ( !row.defined[c] )
            throw simulation_fault( "output is undefined", cycle, c );
          actual[o] = row.value[c];
        }
      }
      catch ( simulation_fault const& f )
      {
        fault = f.what();
      }
    }

    for ( std::size_t l = 0u; l < lanes; ++l )
    {
      bit_vector exp, act;
      bool differs = !fault.empty();
      for ( std::size_t o = 0u; o < expected.size(); ++o )
      {
        exp.push_back( ( expected[o] >> l ) & 1u );
        act.push_back( ( actual[o] >> l ) & 1u );
        differs = differs || exp.back() != act.back();
      }
      if ( differs )
        report.mismatches.push_back( { vectors[base + l], exp, fault.empty() ? act : bit_vector{}, fault } );
    }
  }
  return report;
}

std::vector<bit_vector> exhaustive_vectors( std::size_t num_inputs )
{
  if ( num_inputs > 24u )
    throw error( "too many inputs for exhaustive vectors" );
  std::vector<bit_vector> vs;
  for ( std::uint64_t k = 0u; k < ( std::uint64_t{ 1 } << num_inputs ); ++k )
  {
    bit_vector v( num_inputs );
    for ( std::size_t i = 0u; i < num_inputs; ++i )
      v[i] = ( k >> i ) & 1u;
    vs.push_back( std::move( v ) );
  }
  return vs;
}

std::vector<bit_vector> random_vectors( std::size_t num_inputs, std::size_t count, std::uint64_t seed )
{
  std::mt19937_64 rng( seed );
  std::vector<bit_vector> vs;
  for ( std::size_t k = 0u; k < count; ++k )
  {
    bit_vector v( num_inputs );
    for ( std::size_t i = 0u; i < num_inputs; i += 64u )
    {
      auto const w = rng();
      for ( std::size_t b = 0u; b < 64u && i + b < num_inputs; ++b )
        v[i + b] = ( w >> b ) & 1u;
    }
    vs.push_back( std::move( v ) );
  }
  return vs;
}

bool verify_microcode_entry( microcode_entry const& entry, instruction const& instr, target_machine const& machine )
{
  compiled_program p;
  p.isa_name = instr.name;
  p.row_size = instr.num_inputs + instr.num_outputs;
  program_step step{ instr.name, {}, {} };
  for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
  {
    p.input_placement.emplace_back( "i" + std::to_string( i ), i );
    step.inputs.push_back( i );
  }
  for ( std::uint32_t o = 0u; o < instr.num_outputs; ++o )
  {
    p.output_placement.emplace_back( "o" + std::to_string( o ), instr.num_inputs + o );
    step.outputs.push_back( instr.num_inputs + o );
  }
  p.steps.push_back( step );
  microcode_table t{ machine, entry.scratch_need, { entry } };
  t.entries[0].instruction = instr.name;
  try
  {
    for ( std::uint64_t row = 0u; row < ( std::uint64_t{ 1 } << instr.num_inputs ); ++row )
    {
      bit_vector in( instr.num_inputs );
      for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
        in[i] = ( row >> i ) & 1u;
      auto const out = run_program( p, t, in, false ).outputs;
      for ( std::uint32_t o = 0u; o < instr.num_outputs; ++o )
        if ( out[o] != instr.evaluate( o, row ) )
          return false;
    }
  }
  catch ( simulation_fault const& )
  {
    return false;
  }
  return true;
}

std::string trace_csv( execution_trace const& trace )
{
  std::ostringstream os;
  os << "cycle,instr_index,instr_name,op_kind,cells,values\n";
  for ( auto const& r : trace.records )
  {
    os << r.cycle << ',' << r.instr_index << ',' << r.instr_name << ','
       << ( r.kind == op_kind::init ? "INIT" : "COMPUTE" ) << ',';
    for ( std::size_t i = 0u; i < r.cells.size(); ++i )
      os << ( i ? ";" : "" ) << r.cells[i];
    os << ',';
    for ( bool v : r.values )
      os << ( v ? '1' : '0' );
    os << '\n';
  }
  return os.str();
}

std::string trace_summary_json( execution_trace const& trace )
{
  nlohmann::json j{ { "instructions", trace.instruction_count },
                    { "compute_cycles", trace.compute_cycles },
                    { "init_cycles", trace.init_cycles },
                    { "total_cycles", trace.total_cycles() } };
  return j.dump( 2 ) + "\n";
}

} // namespace pimflow
