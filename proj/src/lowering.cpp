#include <pimflow/errors.hpp>
#include <pimflow/lowering.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_set>

namespace pimflow
{

namespace
{

constexpr std::uint32_t max_leaves = 6u;
constexpr std::size_t max_cuts = 12u;

using cut = std::vector<std::uint32_t>;

std::uint64_t row_mask( std::uint32_t vars )
{
  return vars >= 6u ? ~std::uint64_t{ 0 } : ( ( std::uint64_t{ 1 } << ( 1u << vars ) ) - 1u );
}

/* Evaluates one instruction output on packed leaf tables. */
std::uint64_t eval_packed( instruction const& instr, std::uint32_t output, std::vector<std::uint64_t> const& pins )
{
  auto const& fn = instr.functions[output];
  std::uint64_t result = 0u;
  for ( std::uint64_t row = 0u; row < fn.num_bits(); ++row )
  {
    if ( !fn.get( row ) )
      continue;
    std::uint64_t term = ~std::uint64_t{ 0 };
    for ( std::size_t p = 0u; p < pins.size(); ++p )
      term &= ( ( row >> p ) & 1u ) ? pins[p] : ~pins[p];
    result |= term;
  }
  return result;
}

std::uint64_t projection( std::uint32_t var, std::uint32_t vars )
{
  std::uint64_t t = 0u;
  for ( std::uint64_t row = 0u; row < ( std::uint64_t{ 1 } << vars ); ++row )
    if ( ( row >> var ) & 1u )
      t |= std::uint64_t{ 1 } << row;
  return t;
}

/* Function tables of every ISA instruction under every pin permutation. */
class matcher
{
public:
  struct entry
  {
    instruction const* instr;
    /*! pin p is driven by leaf perm[p] */
    std::vector<std::uint32_t> perm;
    bool swapped{ false };
  };

  explicit matcher( instruction_set const& isa )
  {
    std::vector<instruction const*> sorted;
    for ( auto const& instr : isa.instructions() )
      sorted.push_back( &instr );
    std::sort( sorted.begin(), sorted.end(), []( auto* a, auto* b ) { return a->name < b->name; } );

    for ( auto const* instr : sorted )
    {
      auto const k = instr->num_inputs;
      if ( k > max_leaves || k == 0u || instr->num_outputs > 2u )
        continue;
      max_inputs_ = std::max( max_inputs_, k );
      if ( instr->num_outputs == 2u )
        pair_arities_.insert( k );
      std::vector<std::uint32_t> perm( k );
      std::iota( perm.begin(), perm.end(), 0u );
      do
      {
        std::vector<std::uint64_t> pins;
        for ( std::uint32_t p = 0u; p < k; ++p )
          pins.push_back( projection( perm[p], k ) );
        std::vector<std::uint64_t> tables;
        for ( std::uint32_t o = 0u; o < instr->num_outputs; ++o )
          tables.push_back( eval_packed( *instr, o, pins ) & row_mask( k ) );
        if ( instr->num_outputs == 1u )
        {
          single_.emplace( std::make_pair( k, tables[0] ), entry{ instr, perm, false } );
        }
        else
        {
          pair_.emplace( std::make_tuple( k, tables[0], tables[1] ), entry{ instr, perm, false } );
          pair_.emplace( std::make_tuple( k, tables[1], tables[0] ), entry{ instr, perm, true } );
        }
      } while ( std::next_permutation( perm.begin(), perm.end() ) );
    }
  }

  std::uint32_t max_inputs() const { return max_inputs_; }
  bool has_pairs( std::uint32_t k ) const { return pair_arities_.count( k ) != 0u; }

  entry const* single( std::uint32_t k, std::uint64_t fn ) const
  {
    auto it = single_.find( { k, fn } );
    return it == single_.end() ? nullptr : &it->second;
  }

  entry const* pair( std::uint32_t k, std::uint64_t f0, std::uint64_t f1 ) const
  {
    auto it = pair_.find( { k, f0, f1 } );
    return it == pair_.end() ? nullptr : &it->second;
  }

private:
  std::uint32_t max_inputs_{ 0u };
  std::set<std::uint32_t> pair_arities_;
  std::map<std::pair<std::uint32_t, std::uint64_t>, entry> single_;
  std::map<std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>, entry> pair_;
};

struct candidate
{
  std::size_t saving;
  std::string instr_name;
  std::size_t position;
  std::string key;
  std::vector<std::uint32_t> region;
  instruction const* instr;
  std::vector<std::uint32_t> inputs;
  std::vector<std::uint32_t> outputs;
};

struct cone
{
  std::uint32_t root;
  cut leaves;
  std::vector<std::uint32_t> gates;
  std::uint64_t fn;
};

class fusion_engine
{
public:
  explicit fusion_engine( instruction_set const& isa ) : matcher_( isa ) {}

  netlist run( netlist ntk )
  {
    if ( matcher_.max_inputs() == 0u )
      return ntk;
    while ( pass( ntk ) )
    {
    }
    return ntk;
  }

private:
  bool pass( netlist& ntk );
  std::vector<cone> enumerate_cones( indexed_netlist const& idx ) const;
  netlist apply( netlist const& ntk, indexed_netlist const& idx, std::vector<candidate const*> const& chosen ) const;

  matcher matcher_;
  std::set<std::string> blacklist_;
};

std::vector<cone> fusion_engine::enumerate_cones( indexed_netlist const& idx ) const
{
  auto const ns = idx.signal_names.size();
  auto const ng = idx.gates.size();
  auto const k_max = matcher_.max_inputs();

  // gate-level topological order; gates on a cycle keep only trivial cuts
  std::vector<std::uint32_t> indeg( ng, 0u );
  std::vector<std::vector<std::uint32_t>> succ( ng );
  for ( std::uint32_t g = 0u; g < ng; ++g )
  {
    for ( auto in : idx.gates[g].inputs )
    {
      if ( idx.driver_gate[in] >= 0 )
      {
        succ[idx.driver_gate[in]].push_back( g );
        ++indeg[g];
      }
    }
  }
  std::vector<std::uint32_t> topo;
  for ( std::uint32_t g = 0u; g < ng; ++g )
    if ( indeg[g] == 0u )
      topo.push_back( g );
  for ( std::size_t i = 0u; i < topo.size(); ++i )
    for ( auto s : succ[topo[i]] )
      if ( --indeg[s] == 0u )
        topo.push_back( s );

  std::vector<std::vector<cut>> cuts( ns );
  for ( std::uint32_t s = 0u; s < ns; ++s )
    cuts[s].push_back( { s } );

  auto by_size = []( cut const& a, cut const& b ) { return a.size() != b.size() ? a.size() < b.size() : a < b; };
  for ( auto g : topo )
  {
    std::vector<cut> merged{ cut{} };
    for ( auto in : idx.gates[g].inputs )
    {
      std::vector<cut> next;
      for ( auto const& m : merged )
      {
        for ( auto const& c : cuts[in] )
        {
          cut u;
          std::set_union( m.begin(), m.end(), c.begin(), c.end(), std::back_inserter( u ) );
          if ( u.size() <= k_max )
            next.push_back( std::move( u ) );
        }
      }
      std::sort( next.begin(), next.end(), by_size );
      next.erase( std::unique( next.begin(), next.end() ), next.end() );
      if ( next.size() > 4u * max_cuts )
        next.resize( 4u * max_cuts );
      merged = std::move( next );
    }
    if ( merged.size() > max_cuts - 1u )
      merged.resize( max_cuts - 1u );
    for ( auto out : idx.gates[g].outputs )
      cuts[out].insert( cuts[out].end(), merged.begin(), merged.end() );
  }

  std::vector<cone> cones;
  std::vector<std::uint64_t> value( ns, 0u );
  std::vector<std::uint32_t> mark( ng, 0u );
  std::uint32_t stamp = 0u;
  for ( std::uint32_t s = 0u; s < ns; ++s )
  {
    if ( idx.driver_gate[s] < 0 )
      continue;
    for ( std::size_t ci = 1u; ci < cuts[s].size(); ++ci )
    {
      auto const& leaves = cuts[s][ci];
      auto const k = static_cast<std::uint32_t>( leaves.size() );
      ++stamp;
      // collect cone gates, then evaluate them in topological order
      std::vector<std::uint32_t> stack{ static_cast<std::uint32_t>( idx.driver_gate[s] ) };
      std::vector<std::uint32_t> gates;
      mark[stack[0]] = stamp;
      while ( !stack.empty() )
      {
        auto const g = stack.back();
        stack.pop_back();
        gates.push_back( g );
        for ( auto in : idx.gates[g].inputs )
        {
          if ( std::binary_search( leaves.begin(), leaves.end(), in ) )
            continue;
          auto const d = static_cast<std::uint32_t>( idx.driver_gate[in] );
          if ( mark[d] != stamp )
          {
            mark[d] = stamp;
            stack.push_back( d );
          }
        }
      }
      // a leaf produced inside the cone would make the cut meaningless
      bool const leaf_inside = std::any_of( gates.begin(), gates.end(), [&]( auto g ) {
        return std::any_of( idx.gates[g].outputs.begin(), idx.gates[g].outputs.end(),
                            [&]( auto o ) { return std::binary_search( leaves.begin(), leaves.end(), o ); } );
      } );
      if ( leaf_inside )
        continue;
      for ( std::uint32_t l = 0u; l < k; ++l )
        value[leaves[l]] = projection( l, k );
      std::vector<std::uint32_t> pending = gates;
      std::vector<bool> done( pending.size(), false );
      std::unordered_set<std::uint32_t> ready_signals( leaves.begin(), leaves.end() );
      std::size_t remaining = pending.size();
      while ( remaining > 0u )
      {
        for ( std::size_t i = 0u; i < pending.size(); ++i )
        {
          if ( done[i] )
            continue;
          auto const& gate = idx.gates[pending[i]];
          if ( !std::all_of( gate.inputs.begin(), gate.inputs.end(),
                             [&]( auto in ) { return ready_signals.count( in ) != 0u; } ) )
            continue;
          std::vector<std::uint64_t> pins;
          for ( auto in : gate.inputs )
            pins.push_back( value[in] );
          for ( std::uint32_t o = 0u; o < gate.outputs.size(); ++o )
          {
            value[gate.outputs[o]] = eval_packed( *gate.instr, o, pins ) & row_mask( k );
            ready_signals.insert( gate.outputs[o] );
          }
          done[i] = true;
          --remaining;
        }
      }
      std::sort( gates.begin(), gates.end() );
      cones.push_back( { s, leaves, std::move( gates ), value[s] } );
    }
  }
  return cones;
}


netlist fusion_engine::apply( netlist const& ntk, indexed_netlist const& idx,
                              std::vector<candidate const*> const& chosen ) const
{
  std::vector<std::int64_t> owner( idx.gates.size(), -1 );
  std::vector<std::uint32_t> anchor( chosen.size() );
  for ( std::size_t c = 0u; c < chosen.size(); ++c )
  {
    for ( auto g : chosen[c]->region )
      owner[g] = static_cast<std::int64_t>( c );
    anchor[c] = chosen[c]->region.back();
  }
  auto names = [&]( std::vector<std::uint32_t> const& ids ) {
    std::vector<std::string> v;
    for ( auto id : ids )
      v.push_back( idx.signal_names[id] );
    return v;
  };

  netlist out( ntk.model() );
  for ( auto const& s : ntk.inputs() )
    out.add_input( s );
  for ( auto const& s : ntk.outputs() )
    out.add_output( s );
  for ( std::uint32_t g = 0u; g < ntk.gates().size(); ++g )
  {
    auto const& gate = ntk.gates()[g];
    if ( owner[g] < 0 )
    {
      out.add_gate( ntk.cell( gate.instruction ), gate.inputs, gate.outputs );
    }
    else if ( anchor[owner[g]] == g )
    {
      auto const* c = chosen[owner[g]];
      out.add_gate( *c->instr, names( c->inputs ), names( c->outputs ) );
    }
  }
  return out;
}

bool fusion_engine::pass( netlist& ntk )
{
  auto const idx = index_netlist( ntk );
  auto const ns = idx.signal_names.size();
  std::vector<std::vector<std::uint32_t>> consumers( ns );
  for ( std::uint32_t g = 0u; g < idx.gates.size(); ++g )
    for ( auto in : idx.gates[g].inputs )
      consumers[in].push_back( g );
  std::vector<bool> is_po( ns, false );
  for ( auto o : idx.outputs )
    is_po[o] = true;

  /* Gates of the cone that die once the roots come from a single new gate. Gates whose
     values escape the cone are kept and simply stop feeding the roots. */
  auto removable = [&]( std::vector<std::uint32_t> region, std::vector<std::uint32_t> const& roots ) {
    bool changed = true;
    while ( changed )
    {
      changed = false;
      for ( std::size_t i = 0u; i < region.size() && !changed; ++i )
      {
        for ( auto out : idx.gates[region[i]].outputs )
        {
          if ( std::find( roots.begin(), roots.end(), out ) != roots.end() )
            continue;
          bool const escapes = is_po[out] || std::any_of( consumers[out].begin(), consumers[out].end(), [&]( auto c ) {
                                 return !std::binary_search( region.begin(), region.end(), c );
                               } );
          if ( escapes )
          {
            region.erase( region.begin() + static_cast<std::ptrdiff_t>( i ) );
            changed = true;
            break;
          }
        }
      }
    }
    for ( auto r : roots )
      if ( !std::binary_search( region.begin(), region.end(), static_cast<std::uint32_t>( idx.driver_gate[r] ) ) )
        region.clear();
    return region;
  };

  std::vector<candidate> candidates;
  auto make = [&]( matcher::entry const& e, cut const& leaves, std::vector<std::uint32_t> region,
                   std::vector<std::uint32_t> outputs ) {
    candidate c;
    c.saving = region.size() - 1u;
    c.instr_name = e.instr->name;
    c.instr = e.instr;
    for ( auto p : e.perm )
      c.inputs.push_back( leaves[p] );
    c.outputs = std::move( outputs );
    c.position = idx.gates.size();
    for ( auto o : c.outputs )
      c.position = std::min<std::size_t>( c.position, static_cast<std::size_t>( idx.driver_gate[o] ) );
    c.key = c.instr_name;
    for ( auto o : c.outputs )
      c.key += " " + idx.signal_names[o];
    c.key += " <-";
    for ( auto i : c.inputs )
      c.key += " " + idx.signal_names[i];
    c.region = std::move( region );
    candidates.push_back( std::move( c ) );
  };

  auto const cones = enumerate_cones( idx );
  std::map<cut, std::vector<std::size_t>> by_leaves;
  for ( std::size_t i = 0u; i < cones.size(); ++i )
  {
    auto const& cn = cones[i];
    auto const k = static_cast<std::uint32_t>( cn.leaves.size() );
    if ( cn.gates.size() >= 2u )
    {
      if ( auto const* e = matcher_.single( k, cn.fn ); e != nullptr )
      {
        if ( auto region = removable( cn.gates, { cn.root } ); region.size() >= 2u )
          make( *e, cn.leaves, std::move( region ), { cn.root } );
      }
    }
    if ( matcher_.has_pairs( k ) )
      by_leaves[cn.leaves].push_back( i );
  }
  for ( auto const& [leaves, members] : by_leaves )
  {
    auto const k = static_cast<std::uint32_t>( leaves.size() );
    for ( std::size_t x = 0u; x < members.size(); ++x )
    {
      for ( std::size_t y = x + 1u; y < members.size(); ++y )
      {
        auto const& a = cones[members[x]];
        auto const& b = cones[members[y]];
        if ( a.root == b.root )
          continue;
        auto const* e = matcher_.pair( k, a.fn, b.fn );
        if ( e == nullptr )
          continue;
        std::vector<std::uint32_t> region;
        std::set_union( a.gates.begin(), a.gates.end(), b.gates.begin(), b.gates.end(), std::back_inserter( region ) );
        region = removable( std::move( region ), { a.root, b.root } );
        if ( region.size() < 2u )
          continue;
        make( *e, leaves, std::move( region ),
              e->swapped ? std::vector<std::uint32_t>{ b.root, a.root } : std::vector<std::uint32_t>{ a.root, b.root } );
      }
    }
  }
  if ( candidates.empty() )
    return false;

  std::sort( candidates.begin(), candidates.end(), []( candidate const& a, candidate const& b ) {
    return std::tie( b.saving, a.instr_name, a.position, a.key ) < std::tie( a.saving, b.instr_name, b.position, b.key );
  } );
  std::vector<bool> used( idx.gates.size(), false );
  std::vector<bool> dead( ns, false ), needed( ns, false );
  std::vector<candidate const*> chosen;
  for ( auto const& c : candidates )
  {
    if ( blacklist_.count( c.key ) != 0u )
      continue;
    if ( std::any_of( c.region.begin(), c.region.end(), [&]( auto g ) { return used[g]; } ) ||
         std::any_of( c.inputs.begin(), c.inputs.end(), [&]( auto s ) { return dead[s]; } ) )
      continue;
    std::vector<std::uint32_t> killed;
    for ( auto g : c.region )
      for ( auto out : idx.gates[g].outputs )
        if ( std::find( c.outputs.begin(), c.outputs.end(), out ) == c.outputs.end() )
          killed.push_back( out );
    if ( std::any_of( killed.begin(), killed.end(), [&]( auto s ) { return needed[s]; } ) )
      continue;
    for ( auto g : c.region )
      used[g] = true;
    for ( auto s : killed )
      dead[s] = true;
    for ( auto s : c.inputs )
      needed[s] = true;
    chosen.push_back( &c );
  }
  if ( chosen.empty() )
    return false;

  auto next = apply( ntk, idx, chosen );
  bool const multi = std::any_of( next.gates().begin(), next.gates().end(),
                                  []( auto const& g ) { return g.outputs.size() > 1u; } );
  if ( multi && !detect_cycles( next ).ok() && detect_cycles( ntk ).ok() )
  {
    // retry one rewrite at a time, dropping those that close a cycle
    std::vector<candidate const*> accepted;
    for ( auto const* c : chosen )
    {
      accepted.push_back( c );
      if ( !detect_cycles( apply( ntk, idx, accepted ) ).ok() )
      {
        accepted.pop_back();
        blacklist_.insert( c->key );
      }
    }
    if ( accepted.empty() )
      return true; // blacklist grew; rescan
    next = apply( ntk, idx, accepted );
  }
  ntk = std::move( next );
  return true;
}

/* Unique names for signals introduced by template expansion. */
class name_pool
{
public:
  explicit name_pool( netlist const& ntk )
  {
    for ( auto const& s : ntk.inputs() )
      used_.insert( s );
    for ( auto const& g : ntk.gates() )
      used_.insert( g.outputs.begin(), g.outputs.end() );
  }

  std::string fresh()
  {
    std::string name;
    do
      name = "_l" + std::to_string( counter_++ );
    while ( used_.count( name ) != 0u );
    used_.insert( name );
    return name;
  }

private:
  std::unordered_set<std::string> used_;
  std::size_t counter_{ 0u };
};

} // namespace

netlist fuse_to_fixed_point( netlist const& ntk, instruction_set const& isa )
{
  fusion_engine engine( isa );
  return engine.run( ntk );
}

netlist lower_to_isa( netlist const& ntk, instruction_set const& isa, template_registry const& registry,
                      lowering_options const& options )
{
  netlist current = options.fusion ? fuse_to_fixed_point( ntk, isa ) : ntk;

  auto in_isa = [&]( std::string const& name, instruction const& def ) {
    auto const* own = isa.find( name );
    return own != nullptr && own->functions == def.functions;
  };
  std::map<std::string, expansion_template> cache;
  name_pool pool( current );
  netlist expanded( current.model() );
  for ( auto const& s : current.inputs() )
    expanded.add_input( s );
  for ( auto const& s : current.outputs() )
    expanded.add_output( s );
  for ( auto const& gate : current.gates() )
  {
    auto const& def = current.cell( gate.instruction );
    if ( in_isa( gate.instruction, def ) )
    {
      expanded.add_gate( isa.at( gate.instruction ), gate.inputs, gate.outputs );
      continue;
    }
    auto it = cache.find( gate.instruction );
    if ( it == cache.end() )
      it = cache.emplace( gate.instruction, find_expansion_template( def, isa, registry ) ).first;
    auto const& body = it->second.body;
    std::map<std::string, std::string> rename;
    for ( std::size_t i = 0u; i < body.inputs().size(); ++i )
      rename[body.inputs()[i]] = gate.inputs[i];
    for ( std::size_t o = 0u; o < body.outputs().size(); ++o )
      rename[body.outputs()[o]] = gate.outputs[o];
    auto resolve = [&]( std::string const& s ) {
      auto r = rename.find( s );
      if ( r == rename.end() )
        r = rename.emplace( s, pool.fresh() ).first;
      return r->second;
    };
    for ( auto const& bg : body.gates() )
    {
      std::vector<std::string> ins, outs;
      for ( auto const& s : bg.inputs )
        ins.push_back( resolve( s ) );
      for ( auto const& s : bg.outputs )
        outs.push_back( resolve( s ) );
      expanded.add_gate( body.cell( bg.instruction ), ins, outs );
    }
  }
  return options.fusion ? fuse_to_fixed_point( expanded, isa ) : expanded;
}

} // namespace pimflow
