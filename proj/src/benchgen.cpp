#include <pimflow/benchgen.hpp>
#include <pimflow/errors.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <sstream>

namespace pimflow
{

benchmark_spec benchmark_spec::adder( std::uint32_t width )
{
  benchmark_spec s;
  s.kind = benchmark_kind::adder;
  s.width = width;
  return s;
}

benchmark_spec benchmark_spec::multiplier( std::uint32_t width )
{
  benchmark_spec s;
  s.kind = benchmark_kind::multiplier;
  s.width = width;
  return s;
}

benchmark_spec benchmark_spec::vmm( std::uint32_t vector_len, std::uint32_t dim, std::uint32_t element_bits )
{
  benchmark_spec s;
  s.kind = benchmark_kind::vmm;
  s.vector_len = vector_len;
  s.dim = dim;
  s.element_bits = element_bits;
  return s;
}

benchmark_spec benchmark_spec::random( std::uint32_t gates, std::uint32_t inputs, std::uint64_t seed )
{
  benchmark_spec s;
  s.kind = benchmark_kind::random;
  s.gates = gates;
  s.inputs = inputs;
  s.seed = seed;
  return s;
}

std::string benchmark_spec::name() const
{
  switch ( kind )
  {
  case benchmark_kind::adder:
    return "adder" + std::to_string( width );
  case benchmark_kind::multiplier:
    return "mult" + std::to_string( width );
  case benchmark_kind::vmm:
    return "vmm" + std::to_string( vector_len ) + "x" + std::to_string( dim ) + "x" + std::to_string( element_bits );
  default:
    return "random" + std::to_string( gates ) + "_" + std::to_string( inputs ) + "_s" + std::to_string( seed );
  }
}

benchmark_spec parse_benchmark_spec( std::string_view text )
{
  auto const colon = text.find( ':' );
  auto const kind = std::string( text.substr( 0u, colon ) );
  std::vector<std::uint64_t> args;
  if ( colon != std::string_view::npos )
  {
    std::string rest( text.substr( colon + 1u ) );
    std::replace( rest.begin(), rest.end(), 'x', ':' );
    std::istringstream ss( rest );
    std::string tok;
    while ( std::getline( ss, tok, ':' ) )
    {
      if ( tok.empty() || !std::all_of( tok.begin(), tok.end(), []( unsigned char c ) { return std::isdigit( c ); } ) ||
           tok.size() > 18u )
        throw error( "bad benchmark parameter '" + tok + "' in '" + std::string( text ) + "'" );
      args.push_back( std::stoull( tok ) );
    }
  }
  auto need = [&]( std::size_t n ) {
    if ( args.size() != n )
      throw error( "benchmark '" + std::string( text ) + "' expects " + std::to_string( n ) + " parameters" );
  };
  benchmark_spec spec;
  if ( kind == "adder" )
  {
    need( 1u );
    spec = benchmark_spec::adder( static_cast<std::uint32_t>( args[0] ) );
  }
  else if ( kind == "mult" || kind == "multiplier" )
  {
    need( 1u );
    spec = benchmark_spec::multiplier( static_cast<std::uint32_t>( args[0] ) );
  }
  else if ( kind == "vmm" )
  {
    need( 3u );
    spec = benchmark_spec::vmm( static_cast<std::uint32_t>( args[0] ), static_cast<std::uint32_t>( args[1] ),
                                static_cast<std::uint32_t>( args[2] ) );
  }
  else if ( kind == "random" )
  {
    need( 3u );
    spec = benchmark_spec::random( static_cast<std::uint32_t>( args[0] ), static_cast<std::uint32_t>( args[1] ), args[2] );
  }
  else
  {
    throw error( "unknown benchmark kind '" + kind + "'" );
  }
  return spec;
}

namespace
{

using word = std::vector<std::string>;

class builder
{
public:
  builder( instruction_set const& base, std::string model ) : ntk_( std::move( model ) )
  {
    auto fetch = [&]( char const* name, char const* bits ) {
      auto const* instr = base.find( name );
      if ( instr == nullptr || instr->num_outputs != 1u || instr->functions[0] != truth_table::from_string( bits ) )
        throw library_error( std::string( "benchmark generation needs a standard " ) + name + " in the base set " +
                             base.name() );
      return instr;
    };
    not_ = fetch( "NOT", "10" );
    and_ = fetch( "AND2", "0001" );
    or_ = fetch( "OR2", "0111" );
    xor_ = fetch( "XOR2", "0110" );
  }

  netlist& ntk() { return ntk_; }

  std::string input( std::string name )
  {
    ntk_.add_input( name );
    return name;
  }

  word input_word( std::string const& prefix, std::uint32_t bits )
  {
    word w;
    for ( std::uint32_t k = 0u; k < bits; ++k )
      w.push_back( input( prefix + std::to_string( k ) ) );
    return w;
  }

  std::string gate( instruction const* instr, std::vector<std::string> ins )
  {
    auto name = "n" + std::to_string( counter_++ );
    ntk_.add_gate( *instr, std::move( ins ), { name } );
    return name;
  }

  std::string inv( std::string const& a ) { return gate( not_, { a } ); }
  std::string and2( std::string const& a, std::string const& b ) { return gate( and_, { a, b } ); }
  std::string or2( std::string const& a, std::string const& b ) { return gate( or_, { a, b } ); }
  std::string xor2( std::string const& a, std::string const& b ) { return gate( xor_, { a, b } ); }

  /* Ripple addition of x and y (|x| <= |y|); result has |y| + 1 bits. */
  word add( word x, word y )
  {
    if ( x.size() > y.size() )
      std::swap( x, y );
    word sum;
    std::string carry;
    for ( std::size_t k = 0u; k < y.size(); ++k )
    {
      if ( k < x.size() && carry.empty() )
      {
        sum.push_back( xor2( x[k], y[k] ) );
        carry = and2( x[k], y[k] );
      }
      else if ( k < x.size() )
      {
        auto const& a = x[k];
        auto const& b = y[k];
        auto const p = xor2( a, b );
        sum.push_back( xor2( p, carry ) );
        carry = or2( or2( and2( a, b ), and2( a, carry ) ), and2( b, carry ) );
      }
      else if ( !carry.empty() )
      {
        sum.push_back( xor2( y[k], carry ) );
        carry = and2( y[k], carry );
      }
      else
      {
        sum.push_back( y[k] );
      }
    }
    if ( !carry.empty() )
      sum.push_back( carry );
    else
      sum.push_back( zero( y.front() ) );
    return sum;
  }

  /* Array multiplication; result has |x| + |y| bits. */
  word multiply( word const& x, word const& y )
  {
    auto row = [&]( std::size_t i ) {
      word r;
      for ( auto const& xb : x )
        r.push_back( and2( xb, y[i] ) );
      return r;
    };
    word out;
    auto acc = row( 0u );
    out.push_back( acc[0] );
    word hi( acc.begin() + 1, acc.end() );
    for ( std::size_t i = 1u; i < y.size(); ++i )
    {
      auto const r = row( i );
      auto res = hi.empty() ? r : add( hi, r );
      out.push_back( res[0] );
      hi.assign( res.begin() + 1, res.end() );
    }
    out.insert( out.end(), hi.begin(), hi.end() );
    while ( out.size() < x.size() + y.size() )
      out.push_back( zero( x.front() ) );
    return out;
  }

  std::string zero( std::string const& any ) { return and2( any, inv( any ) ); }

  void output( std::string const& signal, std::string const& name )
  {
    // outputs get their own name through renaming the driving gate's output
    renames_.emplace_back( signal, name );
  }

  netlist finish()
  {
    netlist out( ntk_.model() );
    std::map<std::string, std::string> rename;
    for ( auto const& [sig, name] : renames_ )
    {
      if ( rename.count( sig ) == 0u && std::find( ntk_.inputs().begin(), ntk_.inputs().end(), sig ) == ntk_.inputs().end() )
        rename[sig] = name;
    }
    auto map = [&]( std::string const& s ) {
      auto it = rename.find( s );
      return it == rename.end() ? s : it->second;
    };
    for ( auto const& s : ntk_.inputs() )
      out.add_input( s );
    for ( auto const& g : ntk_.gates() )
    {
      std::vector<std::string> ins, outs;
      for ( auto const& s : g.inputs )
        ins.push_back( map( s ) );
      for ( auto const& s : g.outputs )
        outs.push_back( map( s ) );
      out.add_gate( ntk_.cell( g.instruction ), ins, outs );
    }
    for ( auto const& [sig, name] : renames_ )
      out.add_output( map( sig ) );
    return out;
  }

private:
  netlist ntk_;
  instruction const* not_;
  instruction const* and_;
  instruction const* or_;
  instruction const* xor_;
  std::size_t counter_{ 0u };
  std::vector<std::pair<std::string, std::string>> renames_;
};

netlist random_netlist( benchmark_spec const& spec, instruction_set const& base )
{
  std::vector<instruction const*> pool;
  for ( auto const& instr : base.instructions() )
    if ( instr.num_inputs <= 4u )
      pool.push_back( &instr );
  if ( spec.inputs == 0u )
    throw error( "random benchmark needs at least one input" );

  std::mt19937_64 rng( spec.seed );
  netlist ntk( spec.name() );
  std::vector<std::string> signals;
  for ( std::uint32_t i = 0u; i < spec.inputs; ++i )
  {
    signals.push_back( "x" + std::to_string( i ) );
    ntk.add_input( signals.back() );
  }
  std::map<std::string, std::size_t> uses;
  std::vector<std::string> produced;
  for ( std::uint32_t g = 0u; g < spec.gates; ++g )
  {
    auto const* instr = pool[rng() % pool.size()];
    std::vector<std::string> ins, outs;
    for ( std::uint32_t p = 0u; p < instr->num_inputs; ++p )
    {
      ins.push_back( signals[rng() % signals.size()] );
      ++uses[ins.back()];
    }
    for ( std::uint32_t o = 0u; o < instr->num_outputs; ++o )
      outs.push_back( "t" + std::to_string( g ) + ( instr->num_outputs > 1u ? "_" + std::to_string( o ) : "" ) );
    ntk.add_gate( *instr, ins, outs );
    signals.insert( signals.end(), outs.begin(), outs.end() );
    produced.insert( produced.end(), outs.begin(), outs.end() );
  }
  for ( auto const& s : produced )
    if ( uses[s] == 0u )
      ntk.add_output( s );
  if ( ntk.outputs().empty() )
    ntk.add_output( signals.back() );
  return ntk;
}

} // namespace

netlist generate( benchmark_spec const& spec, instruction_set const& base_set )
{
  builder b( base_set, spec.name() );
  switch ( spec.kind )
  {
  case benchmark_kind::adder:
  {
    if ( spec.width == 0u )
      throw error( "adder width must be at least 1" );
    auto const a = b.input_word( "a", spec.width );
    auto const c = b.input_word( "b", spec.width );
    auto const sum = b.add( a, c );
    for ( std::uint32_t k = 0u; k < spec.width; ++k )
      b.output( sum[k], "s" + std::to_string( k ) );
    b.output( sum.back(), "cout" );
    return b.finish();
  }
  case benchmark_kind::multiplier:
  {
    if ( spec.width == 0u )
      throw error( "multiplier width must be at least 1" );
    auto const a = b.input_word( "a", spec.width );
    auto const c = b.input_word( "b", spec.width );
    auto const prod = b.multiply( a, c );
    for ( std::size_t k = 0u; k < prod.size(); ++k )
      b.output( prod[k], "p" + std::to_string( k ) );
    return b.finish();
  }
  case benchmark_kind::vmm:
  {
    if ( spec.vector_len == 0u || spec.dim == 0u || spec.element_bits == 0u )
      throw error( "vmm dimensions must be at least 1" );
    std::vector<word> v;
    for ( std::uint32_t i = 0u; i < spec.vector_len; ++i )
      v.push_back( b.input_word( "v" + std::to_string( i ) + "_", spec.element_bits ) );
    std::vector<std::vector<word>> m( spec.vector_len );
    for ( std::uint32_t i = 0u; i < spec.vector_len; ++i )
      for ( std::uint32_t j = 0u; j < spec.dim; ++j )
        m[i].push_back( b.input_word( "m" + std::to_string( i ) + "_" + std::to_string( j ) + "_", spec.element_bits ) );
    for ( std::uint32_t j = 0u; j < spec.dim; ++j )
    {
      auto acc = b.multiply( v[0], m[0][j] );
      for ( std::uint32_t i = 1u; i < spec.vector_len; ++i )
        acc = b.add( b.multiply( v[i], m[i][j] ), acc );
      for ( std::size_t k = 0u; k < acc.size(); ++k )
        b.output( acc[k], "y" + std::to_string( j ) + "_" + std::to_string( k ) );
    }
    return b.finish();
  }
  default:
    return random_netlist( spec, base_set );
  }
}

} // namespace pimflow
