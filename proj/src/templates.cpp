#include <pimflow/errors.hpp>
#include <pimflow/lowering.hpp>

#include <algorithm>
#include <sstream>

namespace pimflow
{

namespace
{

struct template_source
{
  char const* instruction;
  char const* target;
  char const* body;
};

// Bodies over TS0 = {NOT, NOR2}. Formal inputs a, b, c, d (MUX: s, a, b); outputs o or o0, o1.
constexpr template_source ts0_templates[] = {
    { "NOT", "TS0", ".inputs a\n.outputs o\n.gate NOT a -> o\n" },
    { "NOR2", "TS0", ".inputs a b\n.outputs o\n.gate NOR2 a b -> o\n" },
    { "NOR3", "TS0", ".inputs a b c\n.outputs o\n.gate NOR2 a b -> t0\n.gate NOT t0 -> t1\n.gate NOR2 t1 c -> o\n" },
    { "NOR4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOR2 a b -> t0\n.gate NOT t0 -> t1\n.gate NOR2 c d -> t2\n"
      ".gate NOT t2 -> t3\n.gate NOR2 t1 t3 -> o\n" },
    { "OR2", "TS0", ".inputs a b\n.outputs o\n.gate NOR2 a b -> t\n.gate NOT t -> o\n" },
    { "OR3", "TS0",
      ".inputs a b c\n.outputs o\n.gate NOR2 a b -> t0\n.gate NOT t0 -> t1\n.gate NOR2 t1 c -> t2\n.gate NOT t2 -> o\n" },
    { "OR4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOR2 a b -> t0\n.gate NOT t0 -> t1\n.gate NOR2 c d -> t2\n"
      ".gate NOT t2 -> t3\n.gate NOR2 t1 t3 -> t4\n.gate NOT t4 -> o\n" },
    { "AND2", "TS0", ".inputs a b\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOR2 na nb -> o\n" },
    { "AND3", "TS0",
      ".inputs a b c\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOT c -> nc\n"
      ".gate NOR2 na nb -> t\n.gate NOT t -> u\n.gate NOR2 u nc -> o\n" },
    { "AND4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOT c -> nc\n.gate NOT d -> nd\n"
      ".gate NOR2 na nb -> x\n.gate NOR2 nc nd -> y\n.gate NOT x -> nx\n.gate NOT y -> ny\n.gate NOR2 nx ny -> o\n" },
    { "NAND2", "TS0",
      ".inputs a b\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOR2 na nb -> t\n.gate NOT t -> o\n" },
    { "NAND3", "TS0",
      ".inputs a b c\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOT c -> nc\n"
      ".gate NOR2 na nb -> t\n.gate NOT t -> u\n.gate NOR2 u nc -> v\n.gate NOT v -> o\n" },
    { "NAND4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOT a -> na\n.gate NOT b -> nb\n.gate NOT c -> nc\n.gate NOT d -> nd\n"
      ".gate NOR2 na nb -> x\n.gate NOR2 nc nd -> y\n.gate NOT x -> nx\n.gate NOT y -> ny\n.gate NOR2 nx ny -> t\n"
      ".gate NOT t -> o\n" },
    { "XNOR2", "TS0",
      ".inputs a b\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> o\n" },
    { "XOR2", "TS0",
      ".inputs a b\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> x\n.gate NOT x -> o\n" },
    { "XOR3", "TS0",
      ".inputs a b c\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> x\n.gate NOR2 x c -> m1\n.gate NOR2 x m1 -> m2\n.gate NOR2 c m1 -> m3\n"
      ".gate NOR2 m2 m3 -> o\n" },
    { "XNOR3", "TS0",
      ".inputs a b c\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> x\n.gate NOT x -> p\n.gate NOR2 p c -> m1\n.gate NOR2 p m1 -> m2\n"
      ".gate NOR2 c m1 -> m3\n.gate NOR2 m2 m3 -> o\n" },
    { "XOR4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> u\n.gate NOR2 c d -> k1\n.gate NOR2 c k1 -> k2\n.gate NOR2 d k1 -> k3\n"
      ".gate NOR2 k2 k3 -> w\n.gate NOT w -> v\n.gate NOR2 u v -> m1\n.gate NOR2 u m1 -> m2\n"
      ".gate NOR2 v m1 -> m3\n.gate NOR2 m2 m3 -> o\n" },
    { "XNOR4", "TS0",
      ".inputs a b c d\n.outputs o\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> n2\n.gate NOR2 b n1 -> n3\n"
      ".gate NOR2 n2 n3 -> u\n.gate NOR2 c d -> k1\n.gate NOR2 c k1 -> k2\n.gate NOR2 d k1 -> k3\n"
      ".gate NOR2 k2 k3 -> v\n.gate NOR2 u v -> m1\n.gate NOR2 u m1 -> m2\n"
      ".gate NOR2 v m1 -> m3\n.gate NOR2 m2 m3 -> o\n" },
    { "IMPLIES", "TS0", ".inputs a b\n.outputs o\n.gate NOT a -> na\n.gate NOR2 na b -> t\n.gate NOT t -> o\n" },
    { "NOT-IMPLIES", "TS0", ".inputs a b\n.outputs o\n.gate NOT a -> na\n.gate NOR2 na b -> o\n" },
    { "MUX", "TS0",
      ".inputs s a b\n.outputs o\n.gate NOT s -> ns\n.gate NOR2 ns a -> x\n.gate NOR2 s b -> y\n.gate NOR2 x y -> o\n" },
    { "HA", "TS0",
      ".inputs a b\n.outputs o0 o1\n.gate NOR2 a b -> n1\n.gate NOT a -> na\n.gate NOT b -> nb\n"
      ".gate NOR2 na nb -> o1\n.gate NOR2 n1 o1 -> o0\n" },
    { "HS", "TS0",
      ".inputs a b\n.outputs o0 o1\n.gate NOR2 a b -> n1\n.gate NOR2 a n1 -> o1\n.gate NOR2 b n1 -> y\n"
      ".gate NOR2 o1 y -> t\n.gate NOT t -> o0\n" },
};

// Bodies over the TS1 machine primitives {NOT, AND2, OR2}.
constexpr template_source ts1_templates[] = {
    { "NOT", "TS1", ".inputs a\n.outputs o\n.gate NOT a -> o\n" },
    { "NOR2", "TS1", ".inputs a b\n.outputs o\n.gate OR2 a b -> t\n.gate NOT t -> o\n" },
    { "NOR3", "TS1", ".inputs a b c\n.outputs o\n.gate OR2 a b -> t\n.gate OR2 t c -> u\n.gate NOT u -> o\n" },
    { "NOR4", "TS1",
      ".inputs a b c d\n.outputs o\n.gate OR2 a b -> t\n.gate OR2 c d -> u\n.gate OR2 t u -> v\n.gate NOT v -> o\n" },
    { "OR2", "TS1", ".inputs a b\n.outputs o\n.gate OR2 a b -> o\n" },
    { "OR3", "TS1", ".inputs a b c\n.outputs o\n.gate OR2 a b -> t\n.gate OR2 t c -> o\n" },
    { "OR4", "TS1", ".inputs a b c d\n.outputs o\n.gate OR2 a b -> t\n.gate OR2 c d -> u\n.gate OR2 t u -> o\n" },
    { "AND2", "TS1", ".inputs a b\n.outputs o\n.gate AND2 a b -> o\n" },
    { "AND3", "TS1", ".inputs a b c\n.outputs o\n.gate AND2 a b -> t\n.gate AND2 t c -> o\n" },
    { "AND4", "TS1", ".inputs a b c d\n.outputs o\n.gate AND2 a b -> t\n.gate AND2 c d -> u\n.gate AND2 t u -> o\n" },
    { "NAND2", "TS1", ".inputs a b\n.outputs o\n.gate AND2 a b -> t\n.gate NOT t -> o\n" },
    { "NAND3", "TS1", ".inputs a b c\n.outputs o\n.gate AND2 a b -> t\n.gate AND2 t c -> u\n.gate NOT u -> o\n" },
    { "NAND4", "TS1",
      ".inputs a b c d\n.outputs o\n.gate AND2 a b -> t\n.gate AND2 c d -> u\n.gate AND2 t u -> v\n"
      ".gate NOT v -> o\n" },
    { "XOR2", "TS1",
      ".inputs a b\n.outputs o\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n.gate AND2 t nn -> o\n" },
    { "XNOR2", "TS1",
      ".inputs a b\n.outputs o\n.gate AND2 a b -> x\n.gate OR2 a b -> y\n.gate NOT y -> ny\n.gate OR2 x ny -> o\n" },
    { "XOR3", "TS1",
      ".inputs a b c\n.outputs o\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n.gate AND2 t nn -> p\n"
      ".gate OR2 p c -> t2\n.gate AND2 p c -> n2\n.gate NOT n2 -> nn2\n.gate AND2 t2 nn2 -> o\n" },
    { "XNOR3", "TS1",
      ".inputs a b c\n.outputs o\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n.gate AND2 t nn -> p\n"
      ".gate AND2 p c -> x\n.gate OR2 p c -> y\n.gate NOT y -> ny\n.gate OR2 x ny -> o\n" },
    { "XOR4", "TS1",
      ".inputs a b c d\n.outputs o\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n.gate AND2 t nn -> p\n"
      ".gate OR2 c d -> t2\n.gate AND2 c d -> n2\n.gate NOT n2 -> nn2\n.gate AND2 t2 nn2 -> q\n"
      ".gate OR2 p q -> t3\n.gate AND2 p q -> n3\n.gate NOT n3 -> nn3\n.gate AND2 t3 nn3 -> o\n" },
    { "XNOR4", "TS1",
      ".inputs a b c d\n.outputs o\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n.gate AND2 t nn -> p\n"
      ".gate OR2 c d -> t2\n.gate AND2 c d -> n2\n.gate NOT n2 -> nn2\n.gate AND2 t2 nn2 -> q\n"
      ".gate AND2 p q -> x\n.gate OR2 p q -> y\n.gate NOT y -> ny\n.gate OR2 x ny -> o\n" },
    { "IMPLIES", "TS1", ".inputs a b\n.outputs o\n.gate NOT a -> na\n.gate OR2 na b -> o\n" },
    { "NOT-IMPLIES", "TS1", ".inputs a b\n.outputs o\n.gate NOT b -> nb\n.gate AND2 a nb -> o\n" },
    { "MUX", "TS1",
      ".inputs s a b\n.outputs o\n.gate NOT s -> ns\n.gate AND2 s a -> x\n.gate AND2 ns b -> y\n.gate OR2 x y -> o\n" },
    { "HA", "TS1",
      ".inputs a b\n.outputs o0 o1\n.gate OR2 a b -> t\n.gate AND2 a b -> o1\n.gate NOT o1 -> n\n"
      ".gate AND2 t n -> o0\n" },
    { "HS", "TS1",
      ".inputs a b\n.outputs o0 o1\n.gate OR2 a b -> t\n.gate AND2 a b -> n\n.gate NOT n -> nn\n"
      ".gate AND2 t nn -> o0\n.gate AND2 b nn -> o1\n" },
};

netlist single_gate_body( instruction const& instr )
{
  netlist body( instr.name );
  std::vector<std::string> ins, outs;
  for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
  {
    ins.push_back( "i" + std::to_string( i ) );
    body.add_input( ins.back() );
  }
  for ( std::uint32_t o = 0u; o < instr.num_outputs; ++o )
  {
    outs.push_back( "o" + std::to_string( o ) );
    body.add_output( outs.back() );
  }
  body.add_gate( instr, ins, outs );
  return body;
}

bool gates_within( netlist const& body, instruction_set const& target )
{
  return std::all_of( body.cells().begin(), body.cells().end(), [&]( auto const& kv ) {
    auto const* instr = target.find( kv.first );
    return instr != nullptr && instr->functions == kv.second.functions;
  } );
}

/* Finds an instruction of `target` computing `fn` on its single output. */
instruction const* find_function( instruction_set const& target, truth_table const& fn )
{
  for ( auto const& instr : target.instructions() )
  {
    if ( instr.num_outputs == 1u && instr.functions[0] == fn )
      return &instr;
  }
  return nullptr;
}

/* Emits NOT/NOR2 through whatever complete basis the target offers. */
class basis_builder
{
public:
  explicit basis_builder( instruction_set const& target, netlist& out )
      : out_( out )
  {
    not_ = find_function( target, truth_table::from_string( "10" ) );
    nor_ = find_function( target, truth_table::from_string( "1000" ) );
    nand_ = find_function( target, truth_table::from_string( "1110" ) );
    and_ = find_function( target, truth_table::from_string( "0001" ) );
    or_ = find_function( target, truth_table::from_string( "0111" ) );
  }

  bool usable() const
  {
    bool const has_not = not_ || nand_ || nor_;
    return nor_ || nand_ || ( has_not && ( and_ || or_ ) );
  }

  std::string inv( std::string const& x )
  {
    if ( not_ )
      return emit( *not_, { x } );
    if ( nand_ )
      return emit( *nand_, { x, x } );
    return emit( *nor_, { x, x } );
  }

  std::string nor2( std::string const& a, std::string const& b )
  {
    if ( nor_ )
      return emit( *nor_, { a, b } );
    if ( or_ )
      return inv( emit( *or_, { a, b } ) );
    if ( and_ )
      return emit( *and_, { inv( a ), inv( b ) } );
    return inv( emit( *nand_, { inv( a ), inv( b ) } ) );
  }

  std::string emit( instruction const& instr, std::vector<std::string> ins, std::string out_name = {} )
  {
    if ( out_name.empty() )
      out_name = "t" + std::to_string( counter_++ );
    out_.add_gate( instr, std::move( ins ), { out_name } );
    return out_name;
  }

  std::string fresh() { return "t" + std::to_string( counter_++ ); }

private:
  netlist& out_;
  instruction const* not_{ nullptr };
  instruction const* nor_{ nullptr };
  instruction const* nand_{ nullptr };
  instruction const* and_{ nullptr };
  instruction const* or_{ nullptr };
  std::size_t counter_{ 0u };
};

/* Rewrites a TS0 body gate by gate through the target's basis. */
netlist rebase_ts0_body( netlist const& ts0_body, instruction_set const& target, basis_builder& builder, netlist& out )
{
  std::map<std::string, std::string> rename;
  for ( auto const& s : ts0_body.inputs() )
  {
    out.add_input( s );
    rename[s] = s;
  }
  auto const idx = index_netlist( ts0_body );
  for ( auto const& [g, o] : idx.order )
  {
    auto const& gate = ts0_body.gates()[g];
    std::vector<std::string> ins;
    for ( auto const& s : gate.inputs )
      ins.push_back( rename.at( s ) );
    rename[gate.outputs[o]] = gate.instruction == "NOT" ? builder.inv( ins[0] ) : builder.nor2( ins[0], ins[1] );
  }
  // Route formal outputs through their final signals by renaming in place.
  netlist renamed( out.model() );
  for ( auto const& s : out.inputs() )
    renamed.add_input( s );
  std::map<std::string, std::string> final_name;
  for ( auto const& s : ts0_body.outputs() )
    final_name[rename.at( s )] = s;
  for ( auto const& gate : out.gates() )
  {
    auto outs = gate.outputs;
    for ( auto& s : outs )
      if ( auto it = final_name.find( s ); it != final_name.end() )
        s = it->second;
    auto ins = gate.inputs;
    for ( auto& s : ins )
      if ( auto it = final_name.find( s ); it != final_name.end() )
        s = it->second;
    renamed.add_gate( out.cell( gate.instruction ), ins, outs );
  }
  for ( auto const& s : ts0_body.outputs() )
    renamed.add_output( s );
  (void)target;
  return renamed;
}

/* Sum-of-products body over NOT/NOR2 for instructions without a hand-written template. */
netlist derive_sop_body( instruction const& instr )
{
  auto const ts0 = builtin_set( "TS0" );
  netlist body( instr.name );
  basis_builder b( ts0, body );
  std::vector<std::string> ins, neg;
  for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
  {
    ins.push_back( "i" + std::to_string( i ) );
    body.add_input( ins.back() );
  }
  for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
    neg.push_back( b.inv( ins[i] ) );
  auto and2 = [&]( std::string const& x, std::string const& y ) { return b.nor2( b.inv( x ), b.inv( y ) ); };
  for ( std::uint32_t o = 0u; o < instr.num_outputs; ++o )
  {
    auto const& fn = instr.functions[o];
    std::vector<std::string> terms;
    for ( std::uint64_t row = 0u; row < fn.num_bits(); ++row )
    {
      if ( !fn.get( row ) )
        continue;
      std::string term;
      for ( std::uint32_t i = 0u; i < instr.num_inputs; ++i )
      {
        auto const& lit = ( ( row >> i ) & 1u ) ? ins[i] : neg[i];
        term = term.empty() ? lit : and2( term, lit );
      }
      terms.push_back( term );
    }
    std::string sum = terms[0];
    for ( std::size_t t = 1u; t < terms.size(); ++t )
      sum = b.inv( b.nor2( sum, terms[t] ) );
    // outputs need a driving gate of their own
    auto const name = "o" + std::to_string( o );
    auto const inverted = b.inv( sum );
    b.emit( ts0.at( "NOT" ), { inverted }, name );
    body.add_output( name );
  }
  return body;
}

netlist single_instruction_netlist( instruction const& instr, std::vector<std::string> const& ins,
                                    std::vector<std::string> const& outs )
{
  netlist n( instr.name );
  for ( auto const& s : ins )
    n.add_input( s );
  for ( auto const& s : outs )
    n.add_output( s );
  n.add_gate( instr, ins, outs );
  return n;
}

} // namespace

void template_registry::add( instruction const& source, expansion_template tmpl )
{
  auto const& body = tmpl.body;
  if ( body.inputs().size() != source.num_inputs || body.outputs().size() != source.num_outputs )
  {
    throw library_error( "template for " + source.name + " has the wrong number of formal pins" );
  }
  for ( auto const& out : body.outputs() )
  {
    if ( std::find( body.inputs().begin(), body.inputs().end(), out ) != body.inputs().end() )
      throw library_error( "template for " + source.name + " passes an input straight to an output" );
  }
  auto const reference = single_instruction_netlist( source, body.inputs(), body.outputs() );
  auto const eq = check_equivalence( reference, body );
  if ( !eq.equivalent )
  {
    throw library_error( "template for " + source.name + " into " + tmpl.target_set +
                         " is not equivalent to the instruction" );
  }
  tmpl.source_instruction = source.name;
  templates_[source.name].push_back( std::move( tmpl ) );
}

void template_registry::add_from_text( std::string_view text, instruction_set const& library )
{
  std::string instr_name, set_name;
  std::string remaining;
  std::istringstream in{ std::string( text ) };
  std::string line;
  std::size_t line_no = 0u;
  while ( std::getline( in, line ) )
  {
    ++line_no;
    std::istringstream ls( line );
    std::string kw;
    ls >> kw;
    if ( kw == ".template" )
    {
      if ( !( ls >> instr_name >> set_name ) )
        throw parse_error( "expected '.template <INSTR> <SET>'", line_no );
      remaining += "\n";
    }
    else
    {
      remaining += line + "\n";
    }
  }
  if ( instr_name.empty() )
    throw parse_error( "template file lacks a '.template <INSTR> <SET>' header", 0u );
  auto const& source = library.at( instr_name );
  add( source, { instr_name, set_name, parse_netlist( remaining, library ) } );
}

std::vector<expansion_template> const* template_registry::find_registered( std::string const& instruction ) const
{
  auto it = templates_.find( instruction );
  return it == templates_.end() ? nullptr : &it->second;
}

template_registry const& template_registry::builtin()
{
  static template_registry const registry = [] {
    template_registry r;
    auto const is3 = builtin_set( "IS3" );
    auto const ts0 = builtin_set( "TS0" );
    auto const ts1m = builtin_machine( "TS1" ).primitives;
    for ( auto const& t : ts0_templates )
      r.add( is3.at( t.instruction ), { t.instruction, t.target, parse_netlist( t.body, ts0 ) } );
    for ( auto const& t : ts1_templates )
      r.add( is3.at( t.instruction ), { t.instruction, t.target, parse_netlist( t.body, ts1m ) } );
    return r;
  }();
  return registry;
}

expansion_template find_expansion_template( instruction const& instr, instruction_set const& target,
                                            template_registry const& registry )
{
  if ( auto const* own = target.find( instr.name ); own != nullptr && own->functions == instr.functions )
  {
    return { instr.name, target.name(), single_gate_body( instr ) };
  }

  std::vector<expansion_template> const* registered = registry.find_registered( instr.name );
  expansion_template const* best = nullptr;
  netlist const* ts0_body = nullptr;
  if ( registered != nullptr )
  {
    for ( auto const& t : *registered )
    {
      if ( t.target_set == "TS0" && ts0_body == nullptr )
        ts0_body = &t.body;
      if ( !gates_within( t.body, target ) )
        continue;
      if ( best == nullptr || t.body.gates().size() < best->body.gates().size() )
        best = &t;
    }
  }
  if ( best != nullptr )
  {
    auto result = *best;
    result.target_set = target.name();
    return result;
  }

  netlist fallback_body = ts0_body != nullptr ? *ts0_body : derive_sop_body( instr );
  netlist out( instr.name );
  basis_builder builder( target, out );
  if ( !builder.usable() )
  {
    throw no_expansion_path_error( instr.name, target.name() );
  }
  auto body = rebase_ts0_body( fallback_body, target, builder, out );
  return { instr.name, target.name(), std::move( body ) };
}

} // namespace pimflow
